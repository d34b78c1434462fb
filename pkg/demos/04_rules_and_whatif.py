#!/usr/bin/env python3
"""Render a mined itemset as an adaptation rule, validate it, apply it."""

from adaptmine import (
    MiningParams,
    RuleStore,
    apply_rule,
    build_transaction_db,
    describe_rule,
    filter_both_sides_changed,
    format_cases,
    mine_fcis,
    parse_kb_text,
    project_properties,
    parse_concept,
    prune_redundant,
    render_rule,
)

kb = parse_kb_text("""
[ontology]
Partial-Mastectomy isa Mastectomy
Mastectomy isa Surgery
Radical-Mastectomy isa Surgery
Surgery isa Therapeutic-Decision
Curettage isa Therapeutic-Decision
[cases]
c1 | Patient and (age >= 45) and (age < 70) and some tumor.(size < 4) | Partial-Mastectomy, Curettage
c2 | Patient and some tumor.(size >= 4) | Radical-Mastectomy
""")

fcb = format_cases(kb)
db = build_transaction_db(fcb)
fcis = filter_both_sides_changed(mine_fcis(db, MiningParams(sigma=0.4)))
fci = max(fcis, key=lambda f: len(f.items))

view = prune_redundant(fci, kb.ontology, fcb.universe)
rule = render_rule(view, kb, fcb.universe)
print(describe_rule(rule, fcb.universe))

store = RuleStore()
store.register(rule)
store.validate_rule(rule.id, "validated",
                    "large tumors call for the radical variant instead")
print(f"\nrule {rule.id} is now {store.get(rule.id).status}")

source = fcb.entries[0]
target = parse_concept("Patient and some tumor.(size >= 4)")
target_set = project_properties(target, kb, fcb.universe)
result = apply_rule(rule, source.problem_set, source.solution_set, target_set,
                    kb=kb, source_decisions=source.case.solution)
if result is None:
    print("rule did not apply")
else:
    print("\nadapted solution properties:")
    for key in sorted(result.keys()):
        print("  ", key)
