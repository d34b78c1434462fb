#!/usr/bin/env python3
"""Walk through the concept language: parsing, normal forms, subsumption."""

from adaptmine import (
    Ontology,
    AtomicInclusion,
    normalize,
    is_subsumed_by,
    parse_concept,
    render_concept,
)

source = parse_concept(
    "Patient and (age >= 45) and (age < 70) and "
    "some tumor.((size >= 4) and some localization.Left-Breast)"
)
print("canonical form:")
print(" ", render_concept(source))

ontology = Ontology([AtomicInclusion("Left-Breast", "Breast")])

nf = normalize(source, ontology)
print("\nnormal form atoms:", sorted(nf.atoms))
print("age constraints:", sorted(str(c.op.value) + str(c.bound) for c in nf.constraint_map()["age"]))

queries = [
    "Patient",
    "(age >= 30)",
    "some tumor.some localization.Breast",
    "(age >= 50)",
    "some tumor.some localization.Right-Breast",
]
print("\nsubsumption checks against the source concept:")
for text in queries:
    verdict = is_subsumed_by(ontology, source, parse_concept(text))
    print(f"  source under {text!r}: {verdict}")
