#!/usr/bin/env python3
"""Format cases into boolean property sets and build the shared universe."""

from adaptmine import Atomic, build_universe, parse_kb_text, properties_of

kb = parse_kb_text("""
[ontology]
Partial-Mastectomy isa Mastectomy
Mastectomy isa Surgery
Surgery isa Therapeutic-Decision
Left-Breast isa Breast
Age-Under-30 := (age < 30)
Age-Over-30 := (age >= 30)
Age-Under-45 := (age < 45)
Age-Over-70 := (age >= 70)
Small-Tumor := some tumor.(size < 4)
[cases]
c1 | Patient and (age >= 45) and (age < 70) and some tumor.((size >= 4) and some localization.Left-Breast) | Partial-Mastectomy
""")

case = kb.cases[0]
print("properties of the case problem:")
for prop in properties_of(case.problem, kb):
    print("  ", prop.key)

print("\nproperties of the decision Partial-Mastectomy:")
for prop in properties_of(Atomic("Partial-Mastectomy"), kb):
    print("  ", prop.key)

universe = build_universe(kb)
print(f"\nproperty universe has {len(universe)} entries; first five ordinals:")
for prop in list(universe)[:5]:
    print(f"  {universe.ordinal_of(prop.key):2d}  {prop.key}")
