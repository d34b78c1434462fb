"""Deterministic synthetic case bases with planted adaptation regularities.

A planted rule names a trigger feature and a decision substitution. The
generator reserves two disjoint groups of cases: sources carry the trigger
and the old decision, targets lack the trigger and carry the replacement.
Every ordered (source-group, target-group) pair then exhibits the rule's
item pattern, and the ground-truth ledger records the full set of
instantiating pairs by scanning all ordered pairs, so incidental matches
from background cases are counted too.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .casebase import KB, Case
from .concepts import (
    Atomic,
    AtomicInclusion,
    ComparisonOp,
    Concept,
    Constraint,
    Definition,
    ExistsConcrete,
    ExistsRole,
    Ontology,
    conjunction,
)
from .properties import build_universe, project_properties, solution_properties


class InfeasibleSpecError(Exception):
    pass


@dataclass(frozen=True)
class PlantedRule:
    name: str
    trigger_feature: str
    removed_decision: str
    added_decision: str
    prevalence: float

    def __post_init__(self):
        if not 0.0 <= self.prevalence <= 1.0:
            raise InfeasibleSpecError(f"prevalence must be in [0, 1], got {self.prevalence}")
        if self.removed_decision == self.added_decision:
            raise InfeasibleSpecError("planted rule must substitute distinct decisions")


@dataclass(frozen=True)
class SyntheticSpec:
    n_cases: int
    seed: int = 0
    n_classes: int = 4
    n_features: int = 14
    n_feature_groups: int = 3
    n_decisions: int = 10
    n_decision_groups: int = 2
    n_sites: int = 4
    age_grid: tuple[float, ...] = (30.0, 45.0, 70.0)
    extent_grid: tuple[float, ...] = (2.0, 5.0)
    feature_prob: float = 0.3
    finding_prob: float = 0.5
    age_prob: float = 0.8  # below 1.0 so no single property spans every case
    decisions_per_case: tuple[int, int] = (1, 3)
    planted: tuple[PlantedRule, ...] = ()

    def __post_init__(self):
        if self.n_cases < 0:
            raise InfeasibleSpecError("n_cases must be non-negative")
        lo, hi = self.decisions_per_case
        if not (1 <= lo <= hi):
            raise InfeasibleSpecError("decisions_per_case must satisfy 1 <= lo <= hi")


@dataclass
class PlantedRuleTruth:
    rule: PlantedRule
    source_ids: tuple[str, ...]
    target_ids: tuple[str, ...]
    instantiating_pairs: tuple[tuple[str, str], ...]
    expected_support_count: int
    expected_support: float
    pattern_tokens: tuple[str, ...]


@dataclass
class SyntheticLedger:
    kb_digest: str
    n_ordered_pairs: int
    rules: tuple[PlantedRuleTruth, ...]


def default_spec(n_cases: int, seed: int = 0, prevalence: float = 0.2) -> SyntheticSpec:
    """Spec with one planted substitution rule, sized for the given base."""
    return SyntheticSpec(
        n_cases=n_cases,
        seed=seed,
        planted=(
            PlantedRule(
                name="substitute-decision",
                trigger_feature="Feature-0",
                removed_decision="Decision-0",
                added_decision="Decision-1",
                prevalence=prevalence,
            ),
        ),
    )


def scale_spec(n_cases: int = 650, seed: int = 101) -> SyntheticSpec:
    """Richer vocabulary sized so a 650-case base yields a property
    universe of about sixty entries, for throughput exercises."""
    return SyntheticSpec(
        n_cases=n_cases,
        seed=seed,
        n_classes=5,
        n_features=20,
        n_feature_groups=4,
        n_decisions=12,
        n_decision_groups=3,
        n_sites=5,
        age_grid=(30.0, 45.0, 60.0, 70.0),
        extent_grid=(2.0, 5.0, 8.0),
        feature_prob=0.42,
        finding_prob=0.6,
        decisions_per_case=(2, 4),
        planted=(
            PlantedRule(
                name="substitute-decision",
                trigger_feature="Feature-0",
                removed_decision="Decision-0",
                added_decision="Decision-1",
                prevalence=0.2,
            ),
        ),
    )


def _ontology_axioms(spec: SyntheticSpec) -> list:
    axioms = []
    for i in range(spec.n_features):
        if spec.n_feature_groups and i % 2 == 0:
            axioms.append(
                AtomicInclusion(f"Feature-{i}", f"Feature-Group-{i % spec.n_feature_groups}")
            )
    for i in range(spec.n_decisions):
        if spec.n_decision_groups and i % 2 == 0:
            axioms.append(
                AtomicInclusion(f"Decision-{i}", f"Decision-Group-{i % spec.n_decision_groups}")
            )
    # definitions seed the constraint vocabulary for both directions of
    # every grid threshold, mirroring how a hand-built ontology would
    # carry named age bands
    for t in spec.age_grid:
        axioms.append(Definition(f"Age-Over-{int(t)}", ExistsConcrete("age", Constraint(ComparisonOp.GE, t))))
        axioms.append(Definition(f"Age-Under-{int(t)}", ExistsConcrete("age", Constraint(ComparisonOp.LT, t))))
    for t in spec.extent_grid:
        axioms.append(
            Definition(
                f"Extent-Over-{int(t)}",
                ExistsRole("finding", ExistsConcrete("extent", Constraint(ComparisonOp.GE, t))),
            )
        )
        axioms.append(
            Definition(
                f"Extent-Under-{int(t)}",
                ExistsRole("finding", ExistsConcrete("extent", Constraint(ComparisonOp.LT, t))),
            )
        )
    return axioms


def _case_problem(
    spec: SyntheticSpec,
    rng: random.Random,
    force_features: frozenset[str],
    ban_features: frozenset[str],
) -> Concept:
    parts: list[Concept] = [Atomic(f"Class-{rng.randrange(spec.n_classes)}")]
    for i in range(spec.n_features):
        name = f"Feature-{i}"
        if name in ban_features:
            continue
        if name in force_features or rng.random() < spec.feature_prob:
            parts.append(Atomic(name))
    grid = spec.age_grid
    if rng.random() < spec.age_prob:
        lo_idx = rng.randrange(len(grid))
        parts.append(ExistsConcrete("age", Constraint(ComparisonOp.GE, grid[lo_idx])))
        if lo_idx + 1 < len(grid) and rng.random() < 0.8:
            hi_idx = rng.randrange(lo_idx + 1, len(grid))
            parts.append(ExistsConcrete("age", Constraint(ComparisonOp.LT, grid[hi_idx])))
    if rng.random() < spec.finding_prob:
        site = Atomic(f"Site-{rng.randrange(spec.n_sites)}")
        extent = ExistsConcrete(
            "extent", Constraint(ComparisonOp.GE, rng.choice(spec.extent_grid))
        )
        parts.append(ExistsRole("finding", conjunction([site, extent])))
    return conjunction(parts)


def _case_solution(
    spec: SyntheticSpec,
    rng: random.Random,
    force: tuple[str, ...],
    ban: frozenset[str],
) -> tuple[str, ...]:
    lo, hi = spec.decisions_per_case
    want = rng.randint(lo, hi)
    pool = [f"Decision-{i}" for i in range(spec.n_decisions)]
    chosen = list(force)
    for name in rng.sample(pool, len(pool)):
        if len(chosen) >= max(want, len(force)):
            break
        if name in ban or name in chosen:
            continue
        chosen.append(name)
    if not chosen:
        chosen = [rng.choice([d for d in pool if d not in ban] or pool)]
    return tuple(sorted(chosen))


def generate_synthetic(spec: SyntheticSpec) -> tuple[KB, SyntheticLedger]:
    """Deterministic KB plus the ground-truth ledger for its planted rules."""
    rng = random.Random(spec.seed)
    for rule in spec.planted:
        feat_idx = int(rule.trigger_feature.rsplit("-", 1)[-1])
        if feat_idx >= spec.n_features:
            raise InfeasibleSpecError(f"trigger feature {rule.trigger_feature} outside vocabulary")

    n = spec.n_cases
    group_sizes: list[tuple[int, int]] = []
    for rule in spec.planted:
        target_pairs = rule.prevalence * n * (n - 1)
        size = math.ceil(math.sqrt(target_pairs)) if target_pairs > 0 else 0
        group_sizes.append((size, size))
    if sum(a + b for a, b in group_sizes) > n:
        raise InfeasibleSpecError(
            f"planted prevalences need {sum(a + b for a, b in group_sizes)} cases, "
            f"only {n} available"
        )

    indices = list(range(n))
    rng.shuffle(indices)
    cursor = 0
    roles: dict[int, tuple[int, str]] = {}  # case index -> (rule index, 'src'|'tgt')
    for r_idx, (s_src, s_tgt) in enumerate(group_sizes):
        for k in range(s_src):
            roles[indices[cursor + k]] = (r_idx, "src")
        cursor += s_src
        for k in range(s_tgt):
            roles[indices[cursor + k]] = (r_idx, "tgt")
        cursor += s_tgt

    id_width = max(len(str(n - 1)), 3)
    cases: list[Case] = []
    for i in range(n):
        assignment = roles.get(i)
        force_feats: frozenset[str] = frozenset()
        ban_feats: frozenset[str] = frozenset()
        force_dec: tuple[str, ...] = ()
        ban_dec: frozenset[str] = frozenset()
        if assignment is not None:
            rule = spec.planted[assignment[0]]
            if assignment[1] == "src":
                force_feats = frozenset({rule.trigger_feature})
                force_dec = (rule.removed_decision,)
                ban_dec = frozenset({rule.added_decision})
            else:
                ban_feats = frozenset({rule.trigger_feature})
                force_dec = (rule.added_decision,)
                ban_dec = frozenset({rule.removed_decision})
        problem = _case_problem(spec, rng, force_feats, ban_feats)
        solution = _case_solution(spec, rng, force_dec, ban_dec)
        cases.append(Case(f"case-{str(i).zfill(id_width)}", problem, solution))

    kb = KB(Ontology(_ontology_axioms(spec)), cases)
    ledger = _scan_ledger(spec, kb, roles)
    return kb, ledger


def _scan_ledger(
    spec: SyntheticSpec, kb: KB, roles: dict[int, tuple[int, str]]
) -> SyntheticLedger:
    n = len(kb.cases)
    universe = build_universe(kb)
    pb_sets = [project_properties(c.problem, kb, universe).ordinals for c in kb.cases]
    sol_sets = [solution_properties(c.solution, kb, universe).ordinals for c in kb.cases]
    truths = []
    for r_idx, rule in enumerate(spec.planted):
        trig = universe.index.get(rule.trigger_feature)
        old = universe.index.get(rule.removed_decision)
        new = universe.index.get(rule.added_decision)
        pairs = []
        if trig is None or old is None or new is None:
            pass  # pattern vocabulary never materialized (e.g. prevalence 0)
        else:
            for i in range(n):
                if trig not in pb_sets[i] or old not in sol_sets[i] or new in sol_sets[i]:
                    continue
                for j in range(n):
                    if i == j:
                        continue
                    if (
                        trig not in pb_sets[j]
                        and old not in sol_sets[j]
                        and new in sol_sets[j]
                    ):
                        pairs.append((kb.cases[i].id, kb.cases[j].id))
        count = len(pairs)
        denom = n * (n - 1) if n > 1 else 1
        truths.append(
            PlantedRuleTruth(
                rule=rule,
                source_ids=tuple(
                    kb.cases[i].id for i, tag in sorted(roles.items()) if tag == (r_idx, "src")
                ),
                target_ids=tuple(
                    kb.cases[i].id for i, tag in sorted(roles.items()) if tag == (r_idx, "tgt")
                ),
                instantiating_pairs=tuple(pairs),
                expected_support_count=count,
                expected_support=count / denom,
                pattern_tokens=(
                    f"{rule.trigger_feature}|pb|-",
                    f"{rule.removed_decision}|sol|-",
                    f"{rule.added_decision}|sol|+",
                ),
            )
        )
    return SyntheticLedger(kb.digest, n * (n - 1) if n > 1 else 0, tuple(truths))


def ledger_document(ledger: SyntheticLedger) -> dict:
    return {
        "kb_digest": ledger.kb_digest,
        "n_ordered_pairs": ledger.n_ordered_pairs,
        "rules": [
            {
                "name": t.rule.name,
                "trigger_feature": t.rule.trigger_feature,
                "removed_decision": t.rule.removed_decision,
                "added_decision": t.rule.added_decision,
                "prevalence": t.rule.prevalence,
                "pattern_tokens": list(t.pattern_tokens),
                "source_ids": list(t.source_ids),
                "target_ids": list(t.target_ids),
                "instantiating_pairs": [list(p) for p in t.instantiating_pairs],
                "expected_support_count": t.expected_support_count,
                "expected_support": t.expected_support,
            }
            for t in ledger.rules
        ],
    }
