"""From mined itemsets to adaptation rules: filtering, simplification,
rendering, application and analyst validation.

An itemset only becomes a rule candidate if it witnesses change on both
sides (some problem property varied and some solution property varied).
Candidates are shown simplified: within each (part, marker) class, an item
is dropped when the class holds a strictly more specific item that entails
it. The raw itemset always stays available next to the view.
"""

from __future__ import annotations

import hashlib
import weakref
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .casebase import KB
from .concepts import Ontology, is_subsumed_by
from .mining import FCI
from .properties import (
    PropertySet,
    PropertyUniverse,
    same_universe,
    solution_properties,
)
from .transactions import Item, Marker, Part, item_token


class RuleError(Exception):
    pass


class InvalidTransitionError(RuleError):
    pass


# ordinal -> ordinals it entails (reflexive), per (universe, ontology) pair
_implication_cache: "weakref.WeakKeyDictionary[PropertyUniverse, dict[int, frozenset[int]]]" = (
    weakref.WeakKeyDictionary()
)


def universe_implications(
    universe: PropertyUniverse, ontology: Ontology
) -> dict[int, frozenset[int]]:
    """Entailment table between universe properties (reflexive closure)."""
    cached = _implication_cache.get(universe)
    if cached is not None:
        return cached
    table: dict[int, frozenset[int]] = {}
    props = universe.properties
    for i, p in enumerate(props):
        implied = {
            j
            for j, q in enumerate(props)
            if i == j or is_subsumed_by(ontology, p.concept, q.concept)
        }
        table[i] = frozenset(implied)
    _implication_cache[universe] = table
    return table


def close_upward(
    ordinals: frozenset[int], universe: PropertyUniverse, ontology: Ontology
) -> frozenset[int]:
    table = universe_implications(universe, ontology)
    out: set[int] = set()
    for o in ordinals:
        out |= table[o]
    return frozenset(out)


def filter_both_sides_changed(fcis: Iterable[FCI]) -> list[FCI]:
    """Keep itemsets with at least one non-'=' item on each part."""
    kept = []
    for fci in fcis:
        pb_changed = any(
            i.part is Part.PB and i.marker is not Marker.EQUAL for i in fci.items
        )
        sol_changed = any(
            i.part is Part.SOL and i.marker is not Marker.EQUAL for i in fci.items
        )
        if pb_changed and sol_changed:
            kept.append(fci)
    return kept


@dataclass(frozen=True)
class FCIView:
    """An itemset next to its simplified form and browse keys."""

    fci: FCI
    simplified: frozenset[Item]
    group_key: str  # shared problem-side signature after simplification

    @property
    def fci_id(self) -> str:
        return self.fci.id

    @property
    def support_count(self) -> int:
        return self.fci.support_count

    @property
    def item_count(self) -> int:
        return len(self.simplified)


def prune_redundant(fci: FCI, ontology: Ontology, universe: PropertyUniverse) -> FCIView:
    """Drop items entailed by a strictly more specific item of the same class.

    The original itemset is preserved on the view; only the presentation
    set shrinks. Pruning is idempotent and never removes an item that is
    minimal within its (part, marker) class.
    """
    table = universe_implications(universe, ontology)
    classes: dict[tuple[Part, Marker], list[Item]] = {}
    for item in fci.items:
        classes.setdefault((item.part, item.marker), []).append(item)
    kept: set[Item] = set()
    for members in classes.values():
        for x in members:
            redundant = any(
                x.ordinal in table[y.ordinal] and y.ordinal not in table[x.ordinal]
                for y in members
                if y is not x
            )
            if not redundant:
                kept.add(x)
    simplified = frozenset(kept)
    pb_signature = " ".join(
        item_token(i, universe)
        for i in sorted((i for i in simplified if i.part is Part.PB), key=Item.sort_key)
    )
    return FCIView(fci, simplified, pb_signature)


@dataclass
class AdaptationRule:
    """Condition/action reading of an itemset, plus its validation state."""

    id: str
    source_fci_id: str
    universe_fingerprint: str
    pb_minus: frozenset[int]
    pb_equal: frozenset[int]
    pb_plus: frozenset[int]
    sol_remove: frozenset[int]
    sol_keep: frozenset[int]
    sol_add: frozenset[int]
    decision_removals: tuple[str, ...]
    decision_additions: tuple[str, ...]
    support_count: int
    support: float
    status: str = "candidate"
    explanation: str = ""
    author: str = ""
    warnings: tuple[str, ...] = ()

    def has_decision_actions(self) -> bool:
        return bool(self.decision_removals or self.decision_additions)


def _minimal_ordinals(
    ordinals: frozenset[int], table: dict[int, frozenset[int]]
) -> list[int]:
    out = []
    for o in ordinals:
        if not any(
            o in table[p] and p not in table[o] for p in ordinals if p != o
        ):
            out.append(o)
    return sorted(out)


def _rule_id(universe: PropertyUniverse, *ordinal_sets: frozenset[int]) -> str:
    h = hashlib.sha256()
    for s in ordinal_sets:
        h.update("\x1f".join(universe.key_of(o) for o in sorted(s)).encode("utf-8"))
        h.update(b"\x1e")
    return h.hexdigest()[:16]


def render_rule(view: FCIView, kb: KB, universe: PropertyUniverse) -> AdaptationRule:
    """Turn a simplified itemset into a candidate rule.

    Problem-side items become match conditions on the source/target pair;
    solution-side '-' items become removals, '=' items keep conditions and
    '+' items additions. Decision-level actions are the entailment-minimal
    removal/addition items that are atomic decision names; when a minimal
    action item is not a decision atom the rule stays property-level and a
    warning is attached.
    """
    table = universe_implications(universe, kb.ontology)
    buckets: dict[tuple[Part, Marker], set[int]] = {}
    for item in view.simplified:
        buckets.setdefault((item.part, item.marker), set()).add(item.ordinal)

    def bucket(part: Part, marker: Marker) -> frozenset[int]:
        return frozenset(buckets.get((part, marker), set()))

    sol_remove = bucket(Part.SOL, Marker.MINUS)
    sol_add = bucket(Part.SOL, Marker.PLUS)
    decisions = kb.decision_names
    warnings: list[str] = []
    removals: list[str] = []
    additions: list[str] = []
    for action_set, sink in ((sol_remove, removals), (sol_add, additions)):
        for o in _minimal_ordinals(action_set, table):
            key = universe.key_of(o)
            if key in decisions:
                sink.append(key)
            else:
                warnings.append(
                    f"minimal action property {key!r} is not a decision name; "
                    "rule stays property-level"
                )
    rule_id = _rule_id(
        universe,
        bucket(Part.PB, Marker.MINUS),
        bucket(Part.PB, Marker.EQUAL),
        bucket(Part.PB, Marker.PLUS),
        sol_remove,
        bucket(Part.SOL, Marker.EQUAL),
        sol_add,
    )
    return AdaptationRule(
        id=rule_id,
        source_fci_id=view.fci_id,
        universe_fingerprint=universe.fingerprint,
        pb_minus=bucket(Part.PB, Marker.MINUS),
        pb_equal=bucket(Part.PB, Marker.EQUAL),
        pb_plus=bucket(Part.PB, Marker.PLUS),
        sol_remove=sol_remove,
        sol_keep=bucket(Part.SOL, Marker.EQUAL),
        sol_add=sol_add,
        decision_removals=tuple(removals),
        decision_additions=tuple(additions),
        support_count=view.support_count,
        support=view.fci.support,
        warnings=tuple(warnings),
    )


def describe_rule(rule: AdaptationRule, universe: PropertyUniverse) -> str:
    """Human-readable reading of the rule for the analyst."""

    def names(ordinals: frozenset[int]) -> str:
        return ", ".join(f'"{universe.key_of(o)}"' for o in sorted(ordinals))

    lines = ["when comparing the source problem with the target problem:"]
    if rule.pb_minus:
        lines.append(f"  the source has {names(rule.pb_minus)} and the target does not")
    if rule.pb_equal:
        lines.append(f"  both have {names(rule.pb_equal)}")
    if rule.pb_plus:
        lines.append(f"  the target has {names(rule.pb_plus)} and the source does not")
    lines.append("and the source solution:")
    if rule.sol_remove:
        lines.append(f"  includes {names(rule.sol_remove)}")
    if rule.sol_keep:
        lines.append(f"  includes {names(rule.sol_keep)} (unchanged)")
    if rule.sol_add:
        lines.append(f"  does not include {names(rule.sol_add)}")
    removed = names(rule.sol_remove) if rule.sol_remove else "nothing"
    added = names(rule.sol_add) if rule.sol_add else "nothing"
    lines.append(
        f"then the target solution is the source solution minus {removed}, plus {added}"
    )
    if rule.decision_removals or rule.decision_additions:
        acts = []
        if rule.decision_removals:
            acts.append("remove " + ", ".join(rule.decision_removals))
        if rule.decision_additions:
            acts.append("add " + ", ".join(rule.decision_additions))
        lines.append("decision-level actions: " + "; ".join(acts))
    return "\n".join(lines)


def apply_rule(
    rule: AdaptationRule,
    source_pb: PropertySet,
    source_sol: PropertySet,
    target_pb: PropertySet,
    kb: Optional[KB] = None,
    source_decisions: Optional[Sequence[str]] = None,
) -> Optional[PropertySet]:
    """Apply a rule to a (source case, target problem) pairing.

    Returns the target solution property set, or None when the conditions
    do not hold (not-applicable is an ordinary outcome, not an error).
    When the rule carries decision-level actions and the KB is available,
    the result is recomputed from the adjusted decision set so it stays
    deductively closed; otherwise removed/added properties are patched at
    the property level and the result is closed upward.
    """
    universe = same_universe(source_pb, source_sol, target_pb)
    if universe.fingerprint != rule.universe_fingerprint:
        raise RuleError("rule was rendered against a different property universe")
    spb, ssol, tpb = source_pb.ordinals, source_sol.ordinals, target_pb.ordinals
    applicable = (
        rule.pb_minus <= spb - tpb
        and rule.pb_equal <= spb & tpb
        and rule.pb_plus <= tpb - spb
        and rule.sol_remove <= ssol
        and rule.sol_keep <= ssol
        and not (rule.sol_add & ssol)
    )
    if not applicable:
        return None
    if kb is not None and rule.has_decision_actions():
        if source_decisions is None:
            table = universe_implications(universe, kb.ontology)
            source_decisions = [
                universe.key_of(o)
                for o in _minimal_ordinals(ssol, table)
                if universe.key_of(o) in kb.decision_names
            ]
        decisions = [d for d in source_decisions if d not in rule.decision_removals]
        decisions.extend(d for d in rule.decision_additions if d not in decisions)
        return solution_properties(decisions, kb, universe)
    result = (ssol - rule.sol_remove) | rule.sol_add
    if kb is not None:
        result = close_upward(frozenset(result), universe, kb.ontology)
    return PropertySet(universe, frozenset(result))


@dataclass
class AuditEntry:
    seq: int
    action: str
    rule_id: str
    detail: str = ""
    flags: tuple[str, ...] = ()


class RuleStore:
    """Single-writer store of rules with an append-only validation audit.

    Rule identity is a content hash over conditions and actions, so
    re-mining that reproduces an already validated rule re-attaches the
    existing validation instead of producing a fresh candidate.
    """

    def __init__(self):
        self.rules: dict[str, AdaptationRule] = {}
        self.audit: list[AuditEntry] = []

    def _log(self, action: str, rule_id: str, detail: str = "", flags: tuple = ()):
        self.audit.append(AuditEntry(len(self.audit), action, rule_id, detail, flags))

    def register(self, rule: AdaptationRule) -> AdaptationRule:
        existing = self.rules.get(rule.id)
        if existing is not None:
            self._log("rederived", rule.id, f"status kept: {existing.status}")
            return existing
        self.rules[rule.id] = rule
        self._log("registered", rule.id)
        return rule

    def get(self, rule_id: str) -> AdaptationRule:
        try:
            return self.rules[rule_id]
        except KeyError:
            raise RuleError(f"unknown rule {rule_id!r}") from None

    def validate_rule(
        self, rule_id: str, verdict: str, explanation: str, author: str = "analyst"
    ) -> AdaptationRule:
        if verdict not in ("validated", "rejected"):
            raise RuleError(f"verdict must be 'validated' or 'rejected', got {verdict!r}")
        rule = self.get(rule_id)
        if rule.status != "candidate":
            raise InvalidTransitionError(
                f"rule {rule_id} is {rule.status}; only candidates can be judged"
            )
        rule.status = verdict
        rule.explanation = explanation
        rule.author = author
        flags = () if explanation.strip() else ("empty-explanation",)
        self._log(verdict, rule_id, explanation, flags)
        return rule

    def candidates(self) -> list[AdaptationRule]:
        return [r for r in self.rules.values() if r.status == "candidate"]

    def validated(self) -> list[AdaptationRule]:
        return [r for r in self.rules.values() if r.status == "validated"]


def rules_document(
    store: RuleStore,
    universe: PropertyUniverse,
    kb_digest: str,
    sigma: Optional[float] = None,
) -> dict:
    """Deterministic export document; no wall-clock fields, digest-stable."""

    def keys(ordinals: frozenset[int]) -> list[str]:
        return [universe.key_of(o) for o in sorted(ordinals)]

    entries = []
    for rule in sorted(store.rules.values(), key=lambda r: r.id):
        entries.append(
            {
                "id": rule.id,
                "status": rule.status,
                "explanation": rule.explanation,
                "author": rule.author,
                "conditions": {
                    "problem_removed": keys(rule.pb_minus),
                    "problem_shared": keys(rule.pb_equal),
                    "problem_added": keys(rule.pb_plus),
                    "solution_has": keys(rule.sol_remove | rule.sol_keep),
                    "solution_lacks": keys(rule.sol_add),
                },
                "actions": {
                    "remove_properties": keys(rule.sol_remove),
                    "add_properties": keys(rule.sol_add),
                    "remove_decisions": list(rule.decision_removals),
                    "add_decisions": list(rule.decision_additions),
                },
                "provenance": {
                    "fci_id": rule.source_fci_id,
                    "support_count": rule.support_count,
                    "support": rule.support,
                    "sigma": sigma,
                    "case_base_digest": kb_digest,
                },
                "warnings": list(rule.warnings),
            }
        )
    return {"kb_digest": kb_digest, "sigma": sigma, "rules": entries}
