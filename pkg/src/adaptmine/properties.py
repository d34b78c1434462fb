"""Boolean-property formatting of cases.

Every case concept is translated into the set of properties it provably
has, where a property is itself a small concept (an atomic name, a nested
existential over such, or a single numeric half-line). Property sets are
deductively closed: whenever a set contains p and the ontology entails
p -> q for another vocabulary property q, the set contains q too. The
union of all per-case sets is the property universe the mining stage
works over.
"""

from __future__ import annotations

import hashlib
import logging
import weakref
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .casebase import KB, Case
from .concepts import (
    And,
    Atomic,
    Concept,
    Constraint,
    Definition,
    ExistsConcrete,
    ExistsRole,
    NormalForm,
    constraint_contains,
    normalize,
    render_concept,
)

log = logging.getLogger(__name__)

PropertyConcept = Union[Atomic, ExistsRole, ExistsConcrete]


@dataclass(frozen=True)
class Property:
    """A single boolean property; identity is its canonical rendered key."""

    concept: PropertyConcept
    key: str

    @classmethod
    def of(cls, concept: PropertyConcept) -> "Property":
        if isinstance(concept, And):
            raise ValueError("a property may not be a conjunction")
        return cls(concept, render_concept(concept))


class PropertyUniverse:
    """Frozen, ordered vocabulary of properties with dense ordinals."""

    def __init__(self, properties: Iterable[Property]):
        self.properties: tuple[Property, ...] = tuple(properties)
        self.index: dict[str, int] = {p.key: i for i, p in enumerate(self.properties)}
        if len(self.index) != len(self.properties):
            raise ValueError("duplicate property keys in universe")
        self.fingerprint: str = hashlib.sha256(
            "\n".join(p.key for p in self.properties).encode("utf-8")
        ).hexdigest()

    def __len__(self) -> int:
        return len(self.properties)

    def __iter__(self):
        return iter(self.properties)

    def key_of(self, ordinal: int) -> str:
        return self.properties[ordinal].key

    def ordinal_of(self, key: str) -> int:
        return self.index[key]

    def __contains__(self, key: str) -> bool:
        return key in self.index


class UniverseMismatchError(Exception):
    """Property sets from different universes were combined."""


@dataclass(frozen=True)
class PropertySet:
    """Subset of a universe, stored as ordinals."""

    universe: PropertyUniverse
    ordinals: frozenset[int]

    def keys(self) -> list[str]:
        return [self.universe.key_of(i) for i in sorted(self.ordinals)]

    def __len__(self) -> int:
        return len(self.ordinals)

    def __contains__(self, ordinal: int) -> bool:
        return ordinal in self.ordinals


def same_universe(*sets: PropertySet) -> PropertyUniverse:
    universe = sets[0].universe
    for s in sets[1:]:
        if s.universe is not universe and s.universe.fingerprint != universe.fingerprint:
            raise UniverseMismatchError("property sets belong to different universes")
    return universe


# Per-KB caches. Keyed weakly so throwaway knowledge bases do not pile up.
_constraint_caches: "weakref.WeakKeyDictionary[KB, dict[str, frozenset[Constraint]]]" = (
    weakref.WeakKeyDictionary()
)
_phi_caches: "weakref.WeakKeyDictionary[KB, dict[Concept, tuple[Property, ...]]]" = (
    weakref.WeakKeyDictionary()
)


def concrete_constraints(kb: KB, grole: str) -> frozenset[Constraint]:
    """All constraints that occur under the given concrete role in the KB.

    Occurrence is syntactic after definition unfolding, across ontology
    definitions and case problems alike.
    """
    cache = _constraint_caches.get(kb)
    if cache is None:
        cache = _collect_constraint_grid(kb)
        _constraint_caches[kb] = cache
    return cache.get(grole, frozenset())


def _collect_constraint_grid(kb: KB) -> dict[str, frozenset[Constraint]]:
    grid: dict[str, set[Constraint]] = {}

    def walk(nf: NormalForm):
        for g, cs in nf.constraints:
            grid.setdefault(g, set()).update(cs)
        for _, sub in nf.roles:
            walk(sub)

    for ax in kb.ontology.axioms:
        if isinstance(ax, Definition):
            walk(normalize(ax.body, kb.ontology))
    for case in kb.cases:
        walk(normalize(case.problem, kb.ontology))
    return {g: frozenset(cs) for g, cs in grid.items()}


def properties_of(c: Concept, kb: KB) -> tuple[Property, ...]:
    """The deductively closed property reading of a concept.

    Follows the recursive shape of the concept: conjunctions take unions,
    an existential role restriction lifts every property of its filler,
    a numeric restriction expands to every weaker constraint in the KB's
    vocabulary for that concrete role, and an atomic name yields its
    KB-occurring ancestors. Defined names are unfolded first. Results are
    memoized per KB since the same decision concepts recur across cases.

    The returned tuple is duplicate-free and in deterministic first-
    derivation order.
    """
    cache = _phi_caches.setdefault(kb, {})
    hit = cache.get(c)
    if hit is not None:
        return hit
    result = tuple(_phi(c, kb, cache))
    cache[c] = result
    return result


def _phi(c: Concept, kb: KB, cache: dict) -> list[Property]:
    hit = cache.get(c)
    if hit is not None:
        return list(hit)
    if isinstance(c, Atomic):
        body = kb.ontology.definition_of(c.name)
        if body is not None:
            out = _phi(body, kb, cache)
        else:
            names = kb.ontology.ancestors(c.name) & kb.atomic_names
            ordered = sorted(names - {c.name})
            if c.name in names:
                ordered = [c.name] + ordered
            out = [Property.of(Atomic(n)) for n in ordered]
    elif isinstance(c, And):
        seen: dict[str, Property] = {}
        for part in c.parts:
            for p in _phi(part, kb, cache):
                seen.setdefault(p.key, p)
        out = list(seen.values())
    elif isinstance(c, ExistsRole):
        out = [
            Property.of(ExistsRole(c.role, p.concept))
            for p in _phi(c.filler, kb, cache)
        ]
    else:
        weaker = [
            d
            for d in sorted(concrete_constraints(kb, c.grole), key=Constraint.sort_key)
            if constraint_contains(d, c.constraint)
        ]
        out = [Property.of(ExistsConcrete(c.grole, d)) for d in weaker]
    cache[c] = tuple(out)
    return out


def build_universe(kb: KB) -> PropertyUniverse:
    """Union of the property sets of all case problems and all decisions.

    Ordering is the first-appearance order of a case-ordered formatting
    pass, so repeated runs over the same KB produce identical ordinals.
    """
    seen: dict[str, Property] = {}
    for case in kb.cases:
        for p in properties_of(case.problem, kb):
            seen.setdefault(p.key, p)
        for dec in case.solution:
            for p in properties_of(Atomic(dec), kb):
                seen.setdefault(p.key, p)
    return PropertyUniverse(seen.values())


def project_properties(
    c: Concept, kb: KB, universe: PropertyUniverse
) -> PropertySet:
    """Property set of a concept projected onto a frozen universe.

    Concepts from outside the KB may carry properties the universe has
    never seen; those are dropped with a logged warning rather than
    growing the universe.
    """
    ordinals = set()
    dropped = []
    for p in properties_of(c, kb):
        ordinal = universe.index.get(p.key)
        if ordinal is None:
            dropped.append(p.key)
        else:
            ordinals.add(ordinal)
    if dropped:
        log.warning(
            "concept %r has %d properties outside the universe: %s",
            render_concept(c),
            len(dropped),
            ", ".join(dropped[:5]),
        )
    return PropertySet(universe, frozenset(ordinals))


def solution_properties(
    decisions: Iterable[str], kb: KB, universe: PropertyUniverse
) -> PropertySet:
    """Property set of a solution: the union over its decision concepts."""
    ordinals: set[int] = set()
    for dec in decisions:
        ordinals |= project_properties(Atomic(dec), kb, universe).ordinals
    return PropertySet(universe, frozenset(ordinals))


@dataclass(frozen=True)
class FormattedCase:
    case: Case
    problem_set: PropertySet
    solution_set: PropertySet


class FormattedCaseBase:
    """Per-case property sets over one shared universe (formatting output)."""

    def __init__(
        self,
        kb: KB,
        universe: PropertyUniverse,
        entries: Iterable[FormattedCase],
        active_ordinals: Optional[frozenset[int]] = None,
    ):
        self.kb = kb
        self.universe = universe
        self.entries: tuple[FormattedCase, ...] = tuple(entries)
        self.active_ordinals = active_ordinals

    def __len__(self) -> int:
        return len(self.entries)

    def restrict(self, active: frozenset[int]) -> "FormattedCaseBase":
        """Drop properties outside the active set (the property-filter stage)."""
        entries = [
            FormattedCase(
                e.case,
                PropertySet(self.universe, e.problem_set.ordinals & active),
                PropertySet(self.universe, e.solution_set.ordinals & active),
            )
            for e in self.entries
        ]
        return FormattedCaseBase(self.kb, self.universe, entries, active)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.universe.fingerprint.encode())
        for e in self.entries:
            h.update(e.case.id.encode())
            h.update(str(sorted(e.problem_set.ordinals)).encode())
            h.update(str(sorted(e.solution_set.ordinals)).encode())
        if self.active_ordinals is not None:
            h.update(str(sorted(self.active_ordinals)).encode())
        return h.hexdigest()


def format_cases(
    kb: KB,
    case_ids: Optional[Iterable[str]] = None,
    universe: Optional[PropertyUniverse] = None,
) -> FormattedCaseBase:
    """First formatting substep: property sets for every (selected) case."""
    if case_ids is None:
        selected = kb.cases
    else:
        wanted = list(case_ids)
        by_id = {case.id: case for case in kb.cases}
        missing = [cid for cid in wanted if cid not in by_id]
        if missing:
            raise KeyError(f"unknown case ids: {missing}")
        selected = tuple(by_id[cid] for cid in wanted)
    if universe is None:
        if case_ids is None:
            universe = build_universe(kb)
        else:
            universe = _universe_for(kb, selected)
    entries = [
        FormattedCase(
            case,
            project_properties(case.problem, kb, universe),
            solution_properties(case.solution, kb, universe),
        )
        for case in selected
    ]
    return FormattedCaseBase(kb, universe, entries)


def _universe_for(kb: KB, cases: tuple[Case, ...]) -> PropertyUniverse:
    seen: dict[str, Property] = {}
    for case in cases:
        for p in properties_of(case.problem, kb):
            seen.setdefault(p.key, p)
        for dec in case.solution:
            for p in properties_of(Atomic(dec), kb):
                seen.setdefault(p.key, p)
    return PropertyUniverse(seen.values())
