"""Concept language: ASTs, concrete syntax, normalization and subsumption.

The fragment covers atomic concept names, conjunction, existential role
restrictions and existential restrictions over concrete (numeric) roles
constrained to half-lines (``>= b`` or ``< b``). Roles are functional, so
two restrictions on the same role merge into one. Subsumption is decided
structurally on normal forms; no tableau machinery is involved.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Union


class ConceptError(Exception):
    """Base class for concept-language failures."""


class ConceptSyntaxError(ConceptError):
    """Malformed concept expression. Carries the character offset."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} (at offset {position}: {text[position:position + 20]!r})")
        self.text = text
        self.position = position


class UnsupportedConstructError(ConceptSyntaxError):
    """Syntactically recognizable construct outside the supported fragment."""


class UndefinedNameError(ConceptError):
    pass


class CyclicDefinitionError(ConceptError):
    pass


class OntologyError(ConceptError):
    """Axiom set violates the restrictions this fragment relies on."""


class ComparisonOp(str, Enum):
    GE = ">="
    LT = "<"


@dataclass(frozen=True, slots=True)
class Constraint:
    """Half-line over the reals: GE b denotes [b, +inf), LT b denotes (-inf, b)."""

    op: ComparisonOp
    bound: float

    def __post_init__(self):
        if not (self.bound == self.bound and abs(self.bound) != float("inf")):
            raise ValueError(f"constraint bound must be finite, got {self.bound!r}")

    def sort_key(self) -> tuple:
        return (self.op.value, self.bound)


def constraint_contains(d: Constraint, c: Constraint) -> bool:
    """True iff the half-line of c is a subset of the half-line of d.

    Mixed directions never contain each other since both half-lines are
    unbounded on opposite sides.
    """
    if d.op is not c.op:
        return False
    if d.op is ComparisonOp.GE:
        return c.bound >= d.bound
    return c.bound <= d.bound


def constraint_set_contains(cs: Iterable[Constraint], d: Constraint) -> bool:
    """True iff the intersection of the half-lines in cs lies inside d.

    The intersection is [max of GE bounds, min of LT bounds); an empty
    intersection is contained in everything.
    """
    lo = None
    hi = None
    for c in cs:
        if c.op is ComparisonOp.GE:
            lo = c.bound if lo is None else max(lo, c.bound)
        else:
            hi = c.bound if hi is None else min(hi, c.bound)
    if lo is None and hi is None:
        raise ValueError("constraint_set_contains requires a non-empty constraint set")
    if lo is not None and hi is not None and lo >= hi:
        return True
    if d.op is ComparisonOp.GE:
        return lo is not None and lo >= d.bound
    return hi is not None and hi <= d.bound


@dataclass(frozen=True, slots=True)
class Atomic:
    name: str


@dataclass(frozen=True, slots=True)
class ExistsRole:
    role: str
    filler: "Concept"


@dataclass(frozen=True, slots=True)
class ExistsConcrete:
    grole: str
    constraint: Constraint


@dataclass(frozen=True, slots=True)
class And:
    parts: tuple["Concept", ...]

    def __post_init__(self):
        if len(self.parts) < 2:
            raise ValueError("And requires at least two conjuncts; use conjunction()")
        if any(isinstance(p, And) for p in self.parts):
            raise ValueError("And conjuncts must be flattened; use conjunction()")


Concept = Union[Atomic, And, ExistsRole, ExistsConcrete]


def conjunction(parts: Iterable[Concept]) -> Concept:
    """Build a canonical conjunction: flattened, deduplicated, sorted.

    A single surviving conjunct is returned as-is, so idempotent inputs
    like (a and a) collapse to a.
    """
    flat: list[Concept] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    seen: dict[Concept, None] = {}
    for p in flat:
        seen.setdefault(p, None)
    unique = sorted(seen, key=render_concept)
    if not unique:
        raise ValueError("conjunction of zero concepts")
    if len(unique) == 1:
        return unique[0]
    return And(tuple(unique))


def _format_bound(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(value)


def render_concept(c: Concept) -> str:
    """Canonical text form: sorted conjuncts, single spacing, minimal parens."""
    if isinstance(c, Atomic):
        return c.name
    if isinstance(c, ExistsConcrete):
        return f"({c.grole} {c.constraint.op.value} {_format_bound(c.constraint.bound)})"
    if isinstance(c, ExistsRole):
        filler = c.filler
        if isinstance(filler, And):
            return f"some {c.role}.({render_concept(filler)})"
        return f"some {c.role}.{render_concept(filler)}"
    return " and ".join(render_concept(p) for p in c.parts)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<name>[A-Za-z][A-Za-z0-9_-]*)
  | (?P<number>-?[0-9]+(?:\.[0-9]+)?)
  | (?P<ge>>=)
  | (?P<lt><)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<dot>\.)
    """,
    re.VERBOSE,
)

_BAD_COMPARATOR_RE = re.compile(r"<=|==|>|=|≤|≥")


class _Parser:
    """Recursive-descent parser for the concept grammar.

    concept := term { "and" term }
    term    := NAME | "some" ROLE "." term | "(" concept ")"
             | "(" GROLE (">="|"<") NUMBER ")"
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                bad = _BAD_COMPARATOR_RE.match(text, pos)
                if bad:
                    raise UnsupportedConstructError(
                        f"comparator {bad.group()!r} is not supported; use >= or <",
                        text,
                        pos,
                    )
                raise ConceptSyntaxError("unexpected character", text, pos)
            pos = m.end()
            kind = m.lastgroup
            if kind == "ws":
                continue
            value = m.group()
            if kind == "name" and value in ("and", "some"):
                kind = value
            self.tokens.append((kind, value, m.start()))
        self.tokens.append(("end", "", len(text)))
        self.idx = 0

    def peek(self, ahead: int = 0) -> tuple[str, str, int]:
        return self.tokens[min(self.idx + ahead, len(self.tokens) - 1)]

    def take(self, kind: str, what: str) -> tuple[str, str, int]:
        tok = self.tokens[self.idx]
        if tok[0] != kind:
            raise ConceptSyntaxError(f"expected {what}", self.text, tok[2])
        self.idx += 1
        return tok

    def parse(self) -> Concept:
        c = self.concept()
        tok = self.peek()
        if tok[0] != "end":
            raise ConceptSyntaxError("trailing input after concept", self.text, tok[2])
        return c

    def concept(self) -> Concept:
        parts = [self.term()]
        while self.peek()[0] == "and":
            self.idx += 1
            parts.append(self.term())
        return conjunction(parts)

    def term(self) -> Concept:
        kind, value, pos = self.peek()
        if kind == "name":
            self.idx += 1
            return Atomic(value)
        if kind == "some":
            self.idx += 1
            role = self.take("name", "role name after 'some'")[1]
            self.take("dot", "'.' after role name")
            return ExistsRole(role, self.term())
        if kind == "lparen":
            self.idx += 1
            if self.peek()[0] == "name" and self.peek(1)[0] in ("ge", "lt"):
                grole = self.take("name", "concrete role name")[1]
                op_kind = self.tokens[self.idx][0]
                self.idx += 1
                op = ComparisonOp.GE if op_kind == "ge" else ComparisonOp.LT
                number = self.take("number", "numeric bound")[1]
                self.take("rparen", "')'")
                return ExistsConcrete(grole, Constraint(op, float(number)))
            inner = self.concept()
            self.take("rparen", "')'")
            return inner
        raise ConceptSyntaxError("expected a concept term", self.text, pos)


def parse_concept(text: str) -> Concept:
    """Parse a concept expression into its canonical AST."""
    return _Parser(text).parse()


@dataclass(frozen=True)
class AtomicInclusion:
    sub: str
    sup: str


@dataclass(frozen=True)
class Definition:
    name: str
    body: Concept


Axiom = Union[AtomicInclusion, Definition]


@dataclass(frozen=True, slots=True)
class NormalForm:
    """Unfolded, flattened, role-merged form of a concept.

    atoms holds undefined atomic names only; each role appears once (the
    functional-role merge); constraints on a shared concrete role are
    collected as a set.
    """

    atoms: frozenset[str] = frozenset()
    roles: tuple[tuple[str, "NormalForm"], ...] = ()
    constraints: tuple[tuple[str, frozenset[Constraint]], ...] = ()

    def role_map(self) -> dict[str, "NormalForm"]:
        return dict(self.roles)

    def constraint_map(self) -> dict[str, frozenset[Constraint]]:
        return dict(self.constraints)


def _merge_normal_forms(forms: Iterable[NormalForm]) -> NormalForm:
    atoms: set[str] = set()
    roles: dict[str, list[NormalForm]] = {}
    constraints: dict[str, set[Constraint]] = {}
    for nf in forms:
        atoms.update(nf.atoms)
        for r, sub in nf.roles:
            roles.setdefault(r, []).append(sub)
        for g, cs in nf.constraints:
            constraints.setdefault(g, set()).update(cs)
    merged_roles = tuple(
        (r, subs[0] if len(subs) == 1 else _merge_normal_forms(subs))
        for r, subs in sorted(roles.items())
    )
    merged_constraints = tuple((g, frozenset(cs)) for g, cs in sorted(constraints.items()))
    return NormalForm(frozenset(atoms), merged_roles, merged_constraints)


class Ontology:
    """Inclusion axioms between atomic names plus acyclic name definitions.

    General concept inclusions are rejected up front: inclusions relate
    atomic names only, and a defined name may not occur on either side of
    an inclusion. This keeps the structural subsumption test sound and
    complete for the fragment.
    """

    def __init__(self, axioms: Iterable[Axiom] = ()):
        self.axioms: tuple[Axiom, ...] = tuple(axioms)
        self._definitions: dict[str, Concept] = {}
        self._parents: dict[str, set[str]] = {}
        for ax in self.axioms:
            if isinstance(ax, Definition):
                if ax.name in self._definitions:
                    raise OntologyError(f"duplicate definition of {ax.name!r}")
                self._definitions[ax.name] = ax.body
        for ax in self.axioms:
            if isinstance(ax, AtomicInclusion):
                if ax.sub in self._definitions or ax.sup in self._definitions:
                    raise OntologyError(
                        f"inclusion {ax.sub!r} isa {ax.sup!r} mentions a defined name; "
                        "inclusions must relate atomic names"
                    )
                self._parents.setdefault(ax.sub, set()).add(ax.sup)
        self._check_definition_acyclicity()
        self._ancestor_cache: dict[str, frozenset[str]] = {}
        self._nf_cache: dict[Concept, NormalForm] = {}
        self._subs_cache: dict[tuple[Concept, Concept], bool] = {}

    def _check_definition_acyclicity(self):
        state: dict[str, int] = {}  # 1 = on stack, 2 = done

        def visit(name: str):
            if state.get(name) == 2:
                return
            if state.get(name) == 1:
                raise CyclicDefinitionError(f"definition cycle through {name!r}")
            state[name] = 1
            for ref in _referenced_names(self._definitions[name]):
                if ref in self._definitions:
                    visit(ref)
            state[name] = 2

        for name in self._definitions:
            visit(name)

    def definition_of(self, name: str) -> Optional[Concept]:
        return self._definitions.get(name)

    @property
    def definition_names(self) -> frozenset[str]:
        return frozenset(self._definitions)

    def atomic_names(self) -> set[str]:
        """Atomic (undefined) names mentioned anywhere in the axioms."""
        names: set[str] = set()
        for ax in self.axioms:
            if isinstance(ax, AtomicInclusion):
                names.add(ax.sub)
                names.add(ax.sup)
            else:
                names.update(n for n in _referenced_names(ax.body) if n not in self._definitions)
        return names

    def role_names(self) -> set[str]:
        names: set[str] = set()
        for ax in self.axioms:
            if isinstance(ax, Definition):
                names.update(_collect_roles(ax.body))
        return names

    def concrete_role_names(self) -> set[str]:
        names: set[str] = set()
        for ax in self.axioms:
            if isinstance(ax, Definition):
                names.update(_collect_groles(ax.body))
        return names

    def ancestors(self, name: str) -> frozenset[str]:
        cached = self._ancestor_cache.get(name)
        if cached is not None:
            return cached
        seen = {name}
        frontier = [name]
        while frontier:
            current = frontier.pop()
            for parent in self._parents.get(current, ()):
                if parent not in seen:
                    seen.add(parent)
                    frontier.append(parent)
        result = frozenset(seen)
        self._ancestor_cache[name] = result
        return result


def _referenced_names(c: Concept) -> set[str]:
    if isinstance(c, Atomic):
        return {c.name}
    if isinstance(c, And):
        out: set[str] = set()
        for p in c.parts:
            out |= _referenced_names(p)
        return out
    if isinstance(c, ExistsRole):
        return _referenced_names(c.filler)
    return set()


def _collect_roles(c: Concept) -> set[str]:
    if isinstance(c, ExistsRole):
        return {c.role} | _collect_roles(c.filler)
    if isinstance(c, And):
        out: set[str] = set()
        for p in c.parts:
            out |= _collect_roles(p)
        return out
    return set()


def _collect_groles(c: Concept) -> set[str]:
    if isinstance(c, ExistsConcrete):
        return {c.grole}
    if isinstance(c, ExistsRole):
        return _collect_groles(c.filler)
    if isinstance(c, And):
        out: set[str] = set()
        for p in c.parts:
            out |= _collect_groles(p)
        return out
    return set()


def normalize(c: Concept, ontology: Ontology) -> NormalForm:
    """Unfold definitions, flatten conjunctions, merge functional roles.

    Raises CyclicDefinitionError if a definition reaches its own name.
    Results are cached on the ontology; concepts are immutable so the
    cache never needs invalidation.
    """
    cached = ontology._nf_cache.get(c)
    if cached is not None:
        return cached
    result = _normalize(c, ontology, ())
    ontology._nf_cache[c] = result
    return result


def _normalize(c: Concept, o: Ontology, stack: tuple[str, ...]) -> NormalForm:
    if isinstance(c, Atomic):
        body = o.definition_of(c.name)
        if body is None:
            return NormalForm(atoms=frozenset({c.name}))
        if c.name in stack:
            raise CyclicDefinitionError(f"definition cycle through {c.name!r}")
        return _normalize(body, o, stack + (c.name,))
    if isinstance(c, And):
        return _merge_normal_forms(_normalize(p, o, stack) for p in c.parts)
    if isinstance(c, ExistsRole):
        return NormalForm(roles=((c.role, _normalize(c.filler, o, stack)),))
    return NormalForm(constraints=((c.grole, frozenset({c.constraint})),))


def atomic_ancestors(ontology: Ontology, name: str) -> frozenset[str]:
    """Reflexive-transitive closure of the inclusion edges from name."""
    return ontology.ancestors(name)


def is_subsumed_by(ontology: Ontology, c: Concept, d: Concept) -> bool:
    """Structural subsumption test: does c fall under d given the ontology?"""
    key = (c, d)
    cached = ontology._subs_cache.get(key)
    if cached is not None:
        return cached
    result = _nf_subsumed(normalize(c, ontology), normalize(d, ontology), ontology)
    ontology._subs_cache[key] = result
    return result


def _nf_subsumed(cn: NormalForm, dn: NormalForm, o: Ontology) -> bool:
    for b in dn.atoms:
        if not any(b in o.ancestors(a) for a in cn.atoms):
            return False
    c_roles = cn.role_map()
    for r, d_sub in dn.roles:
        c_sub = c_roles.get(r)
        if c_sub is None or not _nf_subsumed(c_sub, d_sub, o):
            return False
    c_constraints = cn.constraint_map()
    for g, d_cs in dn.constraints:
        own = c_constraints.get(g)
        if not own:
            return False
        for d_c in d_cs:
            if not constraint_set_contains(own, d_c):
                return False
    return True


def satisfiable_constraints(nf: NormalForm) -> bool:
    """Check every constraint set in the normal form denotes a non-empty interval."""
    for _, cs in nf.constraints:
        lo = max((c.bound for c in cs if c.op is ComparisonOp.GE), default=None)
        hi = min((c.bound for c in cs if c.op is ComparisonOp.LT), default=None)
        if lo is not None and hi is not None and lo >= hi:
            return False
    for _, sub in nf.roles:
        if not satisfiable_constraints(sub):
            return False
    return True
