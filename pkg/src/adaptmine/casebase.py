"""Case base loading, validation and canonical serialization.

The file format is a plain UTF-8 text document with two sections:

    [ontology]
    Partial-Mastectomy isa Mastectomy
    Senior := (age >= 70)
    [cases]
    c1 | Patient and (age >= 45) | Partial-Mastectomy, Curettage

Lines starting with '#' are comments. Ontology lines are either atomic
inclusions ("A isa B") or name definitions ("N := <concept>"). A case line
is "id | <problem concept> | decision, decision, ...".
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Union

from .concepts import (
    AtomicInclusion,
    Concept,
    ConceptError,
    ConceptSyntaxError,
    Definition,
    Ontology,
    OntologyError,
    _collect_groles,
    _collect_roles,
    _referenced_names,
    normalize,
    parse_concept,
    render_concept,
    satisfiable_constraints,
)


class KBLoadError(Exception):
    """Case-base file failed to parse or validate. Carries line context."""

    def __init__(self, message: str, line_no: int | None = None):
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(prefix + message)
        self.line_no = line_no


@dataclass(frozen=True)
class Case:
    id: str
    problem: Concept
    solution: tuple[str, ...]  # atomic decision names, file order, deduplicated


class KB:
    """A domain ontology together with the case base formulated over it."""

    def __init__(self, ontology: Ontology, cases: Iterable[Case]):
        self.ontology = ontology
        self.cases: tuple[Case, ...] = tuple(cases)
        self._validate()

    def _validate(self):
        seen_ids: set[str] = set()
        for case in self.cases:
            if case.id in seen_ids:
                raise KBLoadError(f"duplicate case id {case.id!r}")
            seen_ids.add(case.id)
            if not case.solution:
                raise KBLoadError(f"case {case.id!r} has an empty solution")
            for dec in case.solution:
                if dec in self.ontology.definition_names:
                    raise KBLoadError(
                        f"case {case.id!r}: decision {dec!r} is a defined name; "
                        "decisions must be atomic concepts"
                    )
            try:
                nf = normalize(case.problem, self.ontology)
            except ConceptError as exc:
                raise KBLoadError(f"case {case.id!r}: {exc}") from exc
            if not satisfiable_constraints(nf):
                raise KBLoadError(
                    f"case {case.id!r}: problem carries contradictory constraints "
                    "(empty numeric interval)"
                )
        roles: set[str] = self.ontology.role_names()
        groles: set[str] = self.ontology.concrete_role_names()
        for case in self.cases:
            roles |= _collect_roles(case.problem)
            groles |= _collect_groles(case.problem)
        clash = roles & groles
        if clash:
            raise KBLoadError(f"names used both as role and concrete role: {sorted(clash)}")
        self.role_names = frozenset(roles)
        self.concrete_role_names = frozenset(groles)

    @cached_property
    def atomic_names(self) -> frozenset[str]:
        """Atomic names occurring anywhere: axioms, problem bodies, solutions."""
        names = self.ontology.atomic_names()
        defined = self.ontology.definition_names
        for case in self.cases:
            names.update(n for n in _referenced_names(case.problem) if n not in defined)
            names.update(case.solution)
        return frozenset(names)

    @cached_property
    def decision_names(self) -> frozenset[str]:
        names: set[str] = set()
        for case in self.cases:
            names.update(case.solution)
        return frozenset(names)

    def case_by_id(self, case_id: str) -> Case:
        for case in self.cases:
            if case.id == case_id:
                return case
        raise KeyError(case_id)

    @cached_property
    def digest(self) -> str:
        """Content hash over the canonical rendering, sorted; stable provenance key."""
        return hashlib.sha256(canonical_kb_text(self).encode("utf-8")).hexdigest()


def canonical_kb_text(kb: KB) -> str:
    """Render the KB with axioms and cases in sorted order (digest input)."""
    lines = ["[ontology]"]
    axiom_lines = []
    for ax in kb.ontology.axioms:
        if isinstance(ax, AtomicInclusion):
            axiom_lines.append(f"{ax.sub} isa {ax.sup}")
        else:
            axiom_lines.append(f"{ax.name} := {render_concept(ax.body)}")
    lines.extend(sorted(axiom_lines))
    lines.append("[cases]")
    case_lines = [
        f"{case.id} | {render_concept(case.problem)} | {', '.join(case.solution)}"
        for case in kb.cases
    ]
    lines.extend(sorted(case_lines))
    return "\n".join(lines) + "\n"


def dump_kb(kb: KB, path: Union[str, Path]) -> None:
    """Write the KB in file-format order (cases keep their load order)."""
    lines = ["[ontology]"]
    for ax in kb.ontology.axioms:
        if isinstance(ax, AtomicInclusion):
            lines.append(f"{ax.sub} isa {ax.sup}")
        else:
            lines.append(f"{ax.name} := {render_concept(ax.body)}")
    lines.append("[cases]")
    for case in kb.cases:
        lines.append(f"{case.id} | {render_concept(case.problem)} | {', '.join(case.solution)}")
    text = "\n".join(lines) + "\n"
    _atomic_write(Path(path), text)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


_NAME_CHARS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-"


def _valid_name(name: str) -> bool:
    return bool(name) and name[0].isalpha() and all(ch in _NAME_CHARS for ch in name)


def parse_kb_text(text: str) -> KB:
    axioms: list = []
    cases: list[Case] = []
    section = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "[ontology]":
            section = "ontology"
            continue
        if line == "[cases]":
            section = "cases"
            continue
        if line.startswith("["):
            raise KBLoadError(f"unknown section header {line!r}", line_no)
        if section == "ontology":
            axioms.append(_parse_axiom_line(line, line_no))
        elif section == "cases":
            cases.append(_parse_case_line(line, line_no))
        else:
            raise KBLoadError("content before any section header", line_no)
    try:
        ontology = Ontology(axioms)
    except (OntologyError, ConceptError) as exc:
        raise KBLoadError(str(exc)) from exc
    return KB(ontology, cases)


def _parse_axiom_line(line: str, line_no: int):
    if ":=" in line:
        name, _, body_text = line.partition(":=")
        name = name.strip()
        if not _valid_name(name):
            raise KBLoadError(f"invalid definition name {name!r}", line_no)
        try:
            body = parse_concept(body_text.strip())
        except ConceptSyntaxError as exc:
            raise KBLoadError(f"definition body: {exc}", line_no) from exc
        return Definition(name, body)
    parts = line.split()
    if len(parts) == 3 and parts[1] == "isa":
        sub, _, sup = parts
        if not (_valid_name(sub) and _valid_name(sup)):
            raise KBLoadError(f"invalid name in inclusion {line!r}", line_no)
        return AtomicInclusion(sub, sup)
    raise KBLoadError(
        f"ontology line must be 'A isa B' or 'N := <concept>', got {line!r}", line_no
    )


def _parse_case_line(line: str, line_no: int) -> Case:
    fields = [f.strip() for f in line.split("|")]
    if len(fields) != 3:
        raise KBLoadError("case line must be 'id | <problem> | dec, dec, ...'", line_no)
    case_id, problem_text, solution_text = fields
    if not case_id:
        raise KBLoadError("empty case id", line_no)
    try:
        problem = parse_concept(problem_text)
    except ConceptSyntaxError as exc:
        raise KBLoadError(f"case problem: {exc}", line_no) from exc
    decisions: list[str] = []
    for chunk in solution_text.split(","):
        name = chunk.strip()
        if not name:
            continue
        if not _valid_name(name):
            raise KBLoadError(f"invalid decision name {name!r}", line_no)
        if name not in decisions:
            decisions.append(name)
    return Case(case_id, problem, tuple(decisions))


def load_kb(path: Union[str, Path]) -> KB:
    """Load and fully validate a case-base file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise KBLoadError(f"cannot read {path}: {exc}") from exc
    return parse_kb_text(text)
