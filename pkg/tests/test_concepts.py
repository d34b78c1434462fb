import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptmine import (
    And,
    Atomic,
    AtomicInclusion,
    ComparisonOp,
    ConceptSyntaxError,
    Constraint,
    CyclicDefinitionError,
    Definition,
    ExistsConcrete,
    ExistsRole,
    Ontology,
    OntologyError,
    UnsupportedConstructError,
    atomic_ancestors,
    conjunction,
    constraint_contains,
    constraint_set_contains,
    is_subsumed_by,
    normalize,
    parse_concept,
    render_concept,
)
from oracles import GRID, random_concept, random_ontology, weaken

GE = ComparisonOp.GE
LT = ComparisonOp.LT


class TestParser:
    def test_worked_example_shape(self):
        c = parse_concept(
            "Patient and (age >= 45) and (age < 70) and "
            "some tumor.((size >= 4) and some localization.Left-Breast)"
        )
        assert isinstance(c, And)
        parts = set(c.parts)
        assert Atomic("Patient") in parts
        assert ExistsConcrete("age", Constraint(GE, 45.0)) in parts
        assert ExistsConcrete("age", Constraint(LT, 70.0)) in parts
        tumor = next(p for p in parts if isinstance(p, ExistsRole))
        assert tumor.role == "tumor"
        assert ExistsConcrete("size", Constraint(GE, 4.0)) in set(tumor.filler.parts)

    def test_single_atomic(self):
        assert parse_concept("Mastectomy") == Atomic("Mastectomy")

    def test_idempotent_conjunction_collapses(self):
        assert parse_concept("(a and a)") == Atomic("a")

    def test_nested_some_without_parens(self):
        c = parse_concept("some tumor.some localization.Breast")
        assert c == ExistsRole("tumor", ExistsRole("localization", Atomic("Breast")))

    def test_syntax_error_carries_position(self):
        with pytest.raises(ConceptSyntaxError) as err:
            parse_concept("a and and b")
        assert err.value.position == 6

    @pytest.mark.parametrize("text", ["(age <= 5)", "(age > 5)", "(age = 5)"])
    def test_unsupported_comparators_rejected(self, text):
        with pytest.raises(UnsupportedConstructError):
            parse_concept(text)

    def test_trailing_garbage_rejected(self):
        with pytest.raises(ConceptSyntaxError):
            parse_concept("a b")

    def test_empty_input_rejected(self):
        with pytest.raises(ConceptSyntaxError):
            parse_concept("   ")


class TestRender:
    def test_atomic(self):
        assert render_concept(Atomic("Surgery")) == "Surgery"

    def test_sorted_conjuncts(self):
        c = conjunction([Atomic("b"), Atomic("a")])
        assert render_concept(c) == "a and b"

    def test_constraint_form(self):
        assert render_concept(ExistsConcrete("age", Constraint(GE, 45.0))) == "(age >= 45)"
        assert render_concept(ExistsConcrete("age", Constraint(LT, 4.5))) == "(age < 4.5)"

    def test_and_filler_parenthesized(self):
        c = ExistsRole("r", conjunction([Atomic("a"), Atomic("b")]))
        assert render_concept(c) == "some r.(a and b)"


def _names():
    return st.sampled_from(["a", "b", "c", "Left-Breast", "X_1"])


def _concepts(depth=3):
    if depth == 0:
        return st.builds(Atomic, _names())
    sub = _concepts(depth - 1)
    return st.one_of(
        st.builds(Atomic, _names()),
        st.builds(
            ExistsConcrete,
            st.sampled_from(["age", "size"]),
            st.builds(
                Constraint,
                st.sampled_from([GE, LT]),
                st.sampled_from([0.0, 4.0, 45.5, 70.0]),
            ),
        ),
        st.builds(ExistsRole, st.sampled_from(["r", "tumor"]), sub),
        st.builds(lambda parts: conjunction(parts), st.lists(sub, min_size=2, max_size=3)),
    )


@settings(max_examples=300, deadline=None)
@given(_concepts())
def test_parse_render_round_trip(concept):
    assert parse_concept(render_concept(concept)) == concept


def test_negative_bound_round_trips():
    c = ExistsConcrete("g", Constraint(GE, -5.0))
    assert parse_concept(render_concept(c)) == c


class TestNormalize:
    def test_worked_example(self, worked_kb):
        nf = normalize(worked_kb.cases[0].problem, worked_kb.ontology)
        assert nf.atoms == {"Patient"}
        assert nf.constraint_map() == {
            "age": frozenset({Constraint(GE, 45.0), Constraint(LT, 70.0)})
        }
        tumor = nf.role_map()["tumor"]
        assert tumor.constraint_map() == {"size": frozenset({Constraint(GE, 4.0)})}
        assert tumor.role_map()["localization"].atoms == {"Left-Breast"}

    def test_atomic(self):
        nf = normalize(Atomic("Patient"), Ontology())
        assert nf.atoms == {"Patient"}
        assert not nf.roles and not nf.constraints

    def test_functional_merge(self):
        c = conjunction([ExistsRole("r", Atomic("A")), ExistsRole("r", Atomic("B"))])
        nf = normalize(c, Ontology())
        assert nf.role_map()["r"].atoms == {"A", "B"}

    def test_definition_unfolding(self):
        o = Ontology([Definition("Senior", ExistsConcrete("age", Constraint(GE, 70.0)))])
        nf = normalize(Atomic("Senior"), o)
        assert not nf.atoms
        assert nf.constraint_map()["age"] == frozenset({Constraint(GE, 70.0)})

    def test_cycle_detection(self):
        with pytest.raises(CyclicDefinitionError):
            Ontology(
                [
                    Definition("P", conjunction([Atomic("Q"), Atomic("x")])),
                    Definition("Q", conjunction([Atomic("P"), Atomic("y")])),
                ]
            )


class TestOntologyValidation:
    def test_defined_name_in_inclusion_rejected(self):
        with pytest.raises(OntologyError):
            Ontology([Definition("D", Atomic("a")), AtomicInclusion("D", "b")])

    def test_defined_name_as_super_rejected(self):
        with pytest.raises(OntologyError):
            Ontology([Definition("D", Atomic("a")), AtomicInclusion("b", "D")])

    def test_duplicate_definition_rejected(self):
        with pytest.raises(OntologyError):
            Ontology([Definition("D", Atomic("a")), Definition("D", Atomic("b"))])


class TestConstraints:
    def test_ge_nesting(self):
        assert constraint_contains(Constraint(GE, 30.0), Constraint(GE, 45.0))
        assert not constraint_contains(Constraint(GE, 45.0), Constraint(GE, 30.0))

    def test_reflexive(self):
        c = Constraint(GE, 45.0)
        assert constraint_contains(c, c)

    def test_mixed_directions(self):
        assert not constraint_contains(Constraint(LT, 70.0), Constraint(GE, 45.0))
        assert not constraint_contains(Constraint(GE, 45.0), Constraint(LT, 70.0))

    def test_lt_nesting(self):
        assert constraint_contains(Constraint(LT, 70.0), Constraint(LT, 45.0))
        assert not constraint_contains(Constraint(LT, 45.0), Constraint(LT, 70.0))

    def test_set_containment_interval(self):
        cs = {Constraint(GE, 45.0), Constraint(LT, 70.0)}
        assert constraint_set_contains(cs, Constraint(GE, 30.0))
        assert constraint_set_contains(cs, Constraint(LT, 70.0))
        assert not constraint_set_contains(cs, Constraint(GE, 50.0))

    def test_set_singleton(self):
        assert constraint_set_contains({Constraint(GE, 45.0)}, Constraint(GE, 45.0))
        assert not constraint_set_contains({Constraint(GE, 30.0)}, Constraint(GE, 45.0))

    def test_empty_intersection_contained_everywhere(self):
        cs = {Constraint(GE, 70.0), Constraint(LT, 30.0)}
        assert constraint_set_contains(cs, Constraint(LT, 5.0))
        assert constraint_set_contains(cs, Constraint(GE, 1000.0))

    def test_infinite_bound_rejected(self):
        with pytest.raises(ValueError):
            Constraint(GE, float("inf"))


class TestAncestors:
    def test_decision_chain(self, worked_kb):
        assert atomic_ancestors(worked_kb.ontology, "Partial-Mastectomy") == {
            "Partial-Mastectomy",
            "Mastectomy",
            "Surgery",
            "Therapeutic-Decision",
        }

    def test_isolated_name(self):
        assert atomic_ancestors(Ontology(), "Lonely") == {"Lonely"}

    def test_transitive_chain(self):
        o = Ontology([AtomicInclusion("a", "b"), AtomicInclusion("b", "c")])
        assert atomic_ancestors(o, "a") == {"a", "b", "c"}


class TestSubsumption:
    def test_worked_example(self, worked_kb):
        srce = worked_kb.cases[0].problem
        d = parse_concept("some tumor.some localization.Breast")
        assert is_subsumed_by(worked_kb.ontology, srce, d)

    def test_not_subsumed_without_axiom(self, worked_kb):
        srce = worked_kb.cases[0].problem
        d = parse_concept("some tumor.some localization.Right-Breast")
        assert not is_subsumed_by(worked_kb.ontology, srce, d)

    def test_constraint_side(self, worked_kb):
        srce = worked_kb.cases[0].problem
        assert is_subsumed_by(worked_kb.ontology, srce, parse_concept("(age >= 30)"))
        assert not is_subsumed_by(worked_kb.ontology, srce, parse_concept("(age >= 50)"))
        assert not is_subsumed_by(worked_kb.ontology, srce, parse_concept("(weight >= 1)"))


SAMPLE_SEED = 20240817


def _random_world(seed):
    rng = random.Random(seed)
    ontology = random_ontology(rng, rng.randint(2, 8))
    atomics = [f"A{i}" for i in range(8)]
    return rng, ontology, atomics


def test_reflexivity_and_weakening_chains():
    """c -> weaken(c) -> weaken^2(c) must give a verified subsumption chain;
    transitivity then demands c under the doubly weakened form. Runs well
    past the thousand-triple mark."""
    rng, ontology, atomics = _random_world(SAMPLE_SEED)
    checked = 0
    for _ in range(1200):
        c = random_concept(rng, atomics, 3)
        assert is_subsumed_by(ontology, c, c)
        d = weaken(rng, c, ontology)
        e = weaken(rng, d, ontology)
        assert is_subsumed_by(ontology, c, d)
        assert is_subsumed_by(ontology, d, e)
        assert is_subsumed_by(ontology, c, e)
        checked += 1
    assert checked == 1200


def test_transitivity_on_uniform_triples():
    rng, ontology, atomics = _random_world(SAMPLE_SEED + 1)
    hits = 0
    for _ in range(1500):
        c = random_concept(rng, atomics, 2)
        d = random_concept(rng, atomics, 2)
        e = random_concept(rng, atomics, 2)
        if is_subsumed_by(ontology, c, d) and is_subsumed_by(ontology, d, e):
            hits += 1
            assert is_subsumed_by(ontology, c, e)
    assert hits > 0  # the sample did exercise the implication


def test_conjunction_laws():
    rng, ontology, atomics = _random_world(SAMPLE_SEED + 2)
    for _ in range(600):
        c = random_concept(rng, atomics, 2)
        d = random_concept(rng, atomics, 2)
        cd = conjunction([c, d])
        assert is_subsumed_by(ontology, cd, c)
        assert is_subsumed_by(ontology, cd, d)
        x = random_concept(rng, atomics, 2)
        if is_subsumed_by(ontology, x, c) and is_subsumed_by(ontology, x, d):
            assert is_subsumed_by(ontology, x, cd)


def test_existential_monotonicity():
    rng, ontology, atomics = _random_world(SAMPLE_SEED + 3)
    for _ in range(600):
        c = random_concept(rng, atomics, 2)
        d = weaken(rng, c, ontology)
        assert is_subsumed_by(ontology, ExistsRole("r", c), ExistsRole("r", d))


def test_constraint_law():
    rng = random.Random(SAMPLE_SEED + 4)
    o = Ontology()
    for _ in range(400):
        c = Constraint(rng.choice((GE, LT)), rng.choice(GRID))
        d = Constraint(rng.choice((GE, LT)), rng.choice(GRID))
        left = is_subsumed_by(o, ExistsConcrete("g", c), ExistsConcrete("g", d))
        assert left == constraint_contains(d, c)


def test_functional_merge_equivalence():
    rng, ontology, atomics = _random_world(SAMPLE_SEED + 5)
    for _ in range(300):
        c = random_concept(rng, atomics, 1)
        d = random_concept(rng, atomics, 1)
        merged = conjunction([ExistsRole("r", c), ExistsRole("r", d)])
        single = ExistsRole("r", conjunction([c, d]))
        assert is_subsumed_by(ontology, merged, single)
        assert is_subsumed_by(ontology, single, merged)
