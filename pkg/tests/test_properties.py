import random

import pytest

from adaptmine import (
    Atomic,
    ComparisonOp,
    Constraint,
    build_universe,
    concrete_constraints,
    conjunction,
    format_cases,
    is_subsumed_by,
    parse_concept,
    parse_kb_text,
    project_properties,
    properties_of,
    solution_properties,
)
from oracles import phi_by_subsumption_filter, random_kb

GE = ComparisonOp.GE
LT = ComparisonOp.LT


class TestConcreteConstraints:
    def test_age_grid(self, worked_kb):
        got = concrete_constraints(worked_kb, "age")
        assert got == {
            Constraint(LT, 30.0),
            Constraint(GE, 30.0),
            Constraint(LT, 45.0),
            Constraint(GE, 45.0),
            Constraint(LT, 70.0),
            Constraint(GE, 70.0),
        }

    def test_size_grid(self, worked_kb):
        assert concrete_constraints(worked_kb, "size") == {
            Constraint(LT, 4.0),
            Constraint(GE, 4.0),
        }

    def test_unused_grole(self, worked_kb):
        assert concrete_constraints(worked_kb, "weight") == frozenset()


class TestPhi:
    def test_worked_source_properties(self, worked_kb):
        keys = {p.key for p in properties_of(worked_kb.cases[0].problem, worked_kb)}
        assert keys == {
            "Patient",
            "(age >= 30)",
            "(age >= 45)",
            "(age < 70)",
            "some tumor.(size >= 4)",
            "some tumor.some localization.Left-Breast",
            "some tumor.some localization.Breast",
        }

    def test_decision_chain(self, worked_kb):
        keys = {p.key for p in properties_of(Atomic("Partial-Mastectomy"), worked_kb)}
        assert keys == {
            "Partial-Mastectomy",
            "Mastectomy",
            "Surgery",
            "Therapeutic-Decision",
        }

    def test_plain_atomic_in_kb(self, worked_kb):
        assert {p.key for p in properties_of(Atomic("Patient"), worked_kb)} == {"Patient"}

    def test_unknown_atomic_yields_nothing(self, worked_kb):
        assert properties_of(Atomic("Zebra"), worked_kb) == ()

    def test_memoized_results_stable(self, worked_kb):
        first = properties_of(worked_kb.cases[0].problem, worked_kb)
        second = properties_of(worked_kb.cases[0].problem, worked_kb)
        assert first is second


class TestUniverse:
    def test_worked_universe_contains_problem_properties(self, worked_kb):
        universe = build_universe(worked_kb)
        problem_keys = {p.key for p in properties_of(worked_kb.cases[0].problem, worked_kb)}
        assert len(problem_keys) == 7
        assert problem_keys <= {p.key for p in universe}
        # problem + the 4 decision properties, nothing else
        assert len(universe) == 11

    def test_empty_case_base(self):
        kb = parse_kb_text("[ontology]\n[cases]\n")
        assert len(build_universe(kb)) == 0

    def test_shared_properties_coalesce(self):
        kb = parse_kb_text(
            "[ontology]\n[cases]\nc1 | a and b | D\nc2 | a and b | D\n"
        )
        universe = build_universe(kb)
        per_case = {p.key for p in properties_of(kb.cases[0].problem, kb)} | {"D"}
        assert {p.key for p in universe} == per_case

    def test_deterministic_ordering(self, worked_kb):
        from conftest import WORKED_KB_TEXT

        u1 = build_universe(worked_kb)
        u2 = build_universe(parse_kb_text(WORKED_KB_TEXT))
        assert [p.key for p in u1] == [p.key for p in u2]
        assert u1.fingerprint == u2.fingerprint


class TestProjection:
    def test_worked_projection(self, worked_kb):
        universe = build_universe(worked_kb)
        ps = project_properties(worked_kb.cases[0].problem, worked_kb, universe)
        assert len(ps) == 7

    def test_unknown_atomic_empty_with_warning(self, worked_kb, caplog):
        universe = build_universe(worked_kb)
        with caplog.at_level("WARNING"):
            ps = project_properties(Atomic("Zebra"), worked_kb, universe)
        assert len(ps) == 0

    def test_outside_property_dropped_with_warning(self, worked_kb, caplog):
        universe = build_universe(worked_kb)
        target = parse_concept("Patient and (age < 45)")
        with caplog.at_level("WARNING"):
            ps = project_properties(target, worked_kb, universe)
        assert "(age < 45)" not in ps.keys()
        assert "Patient" in ps.keys()
        assert any("outside the universe" in r.message for r in caplog.records)


class TestDualPath:
    """The recursive equations must agree with the subsumption-filter
    definition on every case concept, across many random knowledge bases."""

    def test_worked_kb(self, worked_kb):
        universe = build_universe(worked_kb)
        for case in worked_kb.cases:
            recursive = {p.key for p in properties_of(case.problem, worked_kb)}
            filtered = phi_by_subsumption_filter(case.problem, worked_kb, universe)
            assert recursive == filtered

    @pytest.mark.parametrize("seed", range(30))
    def test_random_kbs(self, seed):
        rng = random.Random(1000 + seed)
        for _ in range(4):
            kb = random_kb(rng)
            universe = build_universe(kb)
            for case in kb.cases:
                recursive = {p.key for p in properties_of(case.problem, kb)}
                filtered = phi_by_subsumption_filter(case.problem, kb, universe)
                assert recursive == filtered, (
                    f"divergence for {case.id}: {recursive ^ filtered}"
                )
                for dec in case.solution:
                    recursive = {p.key for p in properties_of(Atomic(dec), kb)}
                    filtered = phi_by_subsumption_filter(Atomic(dec), kb, universe)
                    assert recursive == filtered


class TestClosureInvariant:
    def test_worked_kb(self, worked_kb):
        universe = build_universe(worked_kb)
        for case in worked_kb.cases:
            having = {p.key for p in properties_of(case.problem, worked_kb)}
            for p in universe:
                if p.key in having:
                    for q in universe:
                        if is_subsumed_by(worked_kb.ontology, p.concept, q.concept):
                            assert q.key in having

    @pytest.mark.parametrize("seed", range(8))
    def test_random_kbs(self, seed):
        rng = random.Random(7000 + seed)
        kb = random_kb(rng)
        universe = build_universe(kb)
        for case in kb.cases:
            having = {p.key for p in properties_of(case.problem, kb)}
            for p in universe:
                if p.key not in having:
                    continue
                for q in universe:
                    if is_subsumed_by(kb.ontology, p.concept, q.concept):
                        assert q.key in having

    def test_monotonicity_of_conjunction(self, worked_kb):
        c = worked_kb.cases[0].problem
        extended = conjunction([c, Atomic("Patient")])
        base = {p.key for p in properties_of(c, worked_kb)}
        bigger = {p.key for p in properties_of(extended, worked_kb)}
        assert base <= bigger


def test_solution_properties_union(worked_kb):
    universe = build_universe(worked_kb)
    sol = solution_properties(["Partial-Mastectomy"], worked_kb, universe)
    assert set(sol.keys()) == {
        "Partial-Mastectomy",
        "Mastectomy",
        "Surgery",
        "Therapeutic-Decision",
    }


def test_format_cases_masks(worked_kb):
    fcb = format_cases(worked_kb)
    entry = fcb.entries[0]
    assert len(entry.problem_set) == 7
    patient = fcb.universe.ordinal_of("Patient")
    masked = fcb.restrict(frozenset(range(len(fcb.universe))) - {patient})
    assert "Patient" not in masked.entries[0].problem_set.keys()
    assert len(masked.entries[0].problem_set) == 6
