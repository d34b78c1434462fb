"""Interactive discovery sessions: the nine-step pipeline with rewind.

A session walks the case base through selection, formatting, encoding,
mining, filtering and interpretation. Steps form a strict prefix: an
artifact exists only if everything it depends on was computed under the
current parameters, and changing a parameter wipes everything downstream.
Long steps run cooperatively interruptible; an interrupted step leaves the
session exactly as it was before the attempt. Every mutation is recorded
declaratively so a session can be replayed to byte-identical artifacts.
"""

from __future__ import annotations

import hashlib
import io
import json
import re
import threading
import uuid
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from .casebase import KB, canonical_kb_text, parse_kb_text
from .concepts import parse_concept
from .mining import FCI, MiningParams, TransactionDB, mine_fcis, write_fcis
from .properties import (
    FormattedCase,
    FormattedCaseBase,
    Property,
    PropertySet,
    PropertyUniverse,
    format_cases,
)
from .rules import (
    AdaptationRule,
    AuditEntry,
    FCIView,
    RuleStore,
    filter_both_sides_changed,
    prune_redundant,
    render_rule,
)
from .transactions import (
    Item,
    Marker,
    Part,
    build_transaction_db,
    item_token,
    pair_selection,
)

STEPS = ("s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9")

STEP_TITLES = {
    "s1": "input case base",
    "s2": "select case subset",
    "s3": "format cases into property sets",
    "s4": "filter properties",
    "s5": "encode case pairs as transactions",
    "s6": "filter transactions",
    "s7": "mine frequent closed itemsets",
    "s8": "filter itemsets",
    "s9": "interpret itemsets as rule candidates",
}

FILTER_STAGES = ("case-subset", "property", "transaction", "fci")

# which step consumes each parameter; changing it invalidates from there on
_PARAM_STEP = {
    "filters.case-subset": "s2",
    "filters.property": "s4",
    "filters.transaction": "s6",
    "sigma": "s7",
    "workers": "s7",
    "time_budget": "s7",
    "max_items": "s7",
    "filters.fci": "s8",
}


class SessionError(Exception):
    pass


class MissingInputError(SessionError):
    pass


class NoSnapshotError(SessionError):
    pass


class StepInterrupted(SessionError):
    pass


@dataclass
class FilterSpec:
    """Declarative, serializable filter for one pipeline stage."""

    stage: str
    params: dict

    def __post_init__(self):
        if self.stage not in FILTER_STAGES:
            raise SessionError(f"unknown filter stage {self.stage!r}")
        allowed = {
            "case-subset": {"include_ids", "exclude_ids"},
            "property": {"include_keys", "exclude_keys"},
            "transaction": {"min_overlap", "min_items", "max_items"},
            "fci": {
                "require_change_both_sides",
                "min_support",
                "max_support",
                "min_items",
                "max_items",
            },
        }[self.stage]
        unknown = set(self.params) - allowed
        if unknown:
            raise SessionError(f"filter stage {self.stage}: unknown keys {sorted(unknown)}")


def _default_params() -> dict:
    return {
        "sigma": 0.1,
        "workers": 1,
        "time_budget": None,
        "max_items": None,
        "filters": {stage: {} for stage in FILTER_STAGES},
    }


@dataclass
class _Snapshot:
    step: str
    params: dict
    artifact_steps: tuple[str, ...]


class Session:
    """One analyst's discovery run over a fixed knowledge base."""

    def __init__(self, kb: KB, session_id: Optional[str] = None):
        self.id = session_id or uuid.uuid4().hex[:12]
        self.kb = kb
        self.params = _default_params()
        self.artifacts: dict[str, Any] = {}
        self.rule_store = RuleStore()
        self.history: list[_Snapshot] = []
        self.run_log: list[dict] = []
        self.audit: list[dict] = []
        self.status = "idle"
        self.running_step: Optional[str] = None
        self.progress: dict = {}
        self.revision = 0
        self._interrupt = threading.Event()
        self._lock = threading.Lock()

    # ------------------------------------------------------------- params

    def set_params(self, updates: dict) -> None:
        """Merge parameter updates and invalidate stale downstream artifacts."""
        if self.status == "running":
            raise SessionError("cannot change parameters while a step is running")
        earliest: Optional[int] = None
        for key, value in updates.items():
            if key == "filters":
                for stage, params in value.items():
                    FilterSpec(stage, dict(params))
                    self.params["filters"][stage] = dict(params)
                    step = _PARAM_STEP[f"filters.{stage}"]
                    idx = STEPS.index(step)
                    earliest = idx if earliest is None else min(earliest, idx)
            elif key in ("sigma", "workers", "time_budget", "max_items"):
                if key == "sigma" and not 0.0 <= float(value) <= 1.0:
                    raise SessionError(f"sigma must be in [0, 1], got {value}")
                self.params[key] = value
                idx = STEPS.index(_PARAM_STEP[key])
                earliest = idx if earliest is None else min(earliest, idx)
            else:
                raise SessionError(f"unknown parameter {key!r}")
        if earliest is not None:
            self._invalidate_from(STEPS[earliest])
        self.run_log.append({"action": "set_params", "updates": updates})
        self.revision += 1

    def _invalidate_from(self, step: str) -> None:
        idx = STEPS.index(step)
        for later in STEPS[idx:]:
            self.artifacts.pop(later, None)

    # -------------------------------------------------------------- steps

    def run_step(self, step: str, params: Optional[dict] = None) -> None:
        """Execute one pipeline step; raises StepInterrupted on cancellation."""
        if step not in STEPS:
            raise SessionError(f"unknown step {step!r}")
        if self.status == "running":
            raise SessionError("a step is already running")
        idx = STEPS.index(step)
        missing = [s for s in STEPS[:idx] if s not in self.artifacts]
        if missing:
            raise MissingInputError(
                f"step {step} needs artifacts of {', '.join(missing)}; run them first"
            )
        params_before = _copy_params(self.params)
        if params:
            self.set_params(params)
        self.history.append(
            _Snapshot(step, params_before, tuple(s for s in STEPS if s in self.artifacts))
        )
        self._interrupt.clear()
        self.status = "running"
        self.running_step = step
        self.progress = {"step": step, "fraction": 0.0}
        try:
            artifact = self._compute(step)
        except (StepInterrupted, InterruptedError):
            with self._lock:
                self.params = self.history.pop().params
                self.status = "interrupted"
                self.running_step = None
                self.progress = {}
                self.audit.append({"event": "interrupted", "step": step})
                self.revision += 1
            raise StepInterrupted(f"step {step} interrupted; session restored")
        except Exception:
            with self._lock:
                self.history.pop()
                self.status = "idle"
                self.running_step = None
                self.progress = {}
                self.revision += 1
            raise
        with self._lock:
            self._invalidate_from(step)
            self.artifacts[step] = artifact
            self.status = "idle"
            self.running_step = None
            self.progress = {}
            self.run_log.append({"action": "run", "step": step})
            self.revision += 1

    def interrupt(self) -> bool:
        if self.status != "running":
            return False
        self._interrupt.set()
        return True

    def _stop_requested(self) -> bool:
        return self._interrupt.is_set()

    def _compute(self, step: str):
        filters = self.params["filters"]
        if step == "s1":
            return {"kb_digest": self.kb.digest, "case_count": len(self.kb.cases)}
        if step == "s2":
            spec = filters["case-subset"]
            ids = [c.id for c in self.kb.cases]
            include = spec.get("include_ids")
            if include is not None:
                known = set(ids)
                bad = [i for i in include if i not in known]
                if bad:
                    raise SessionError(f"case-subset filter names unknown ids {bad}")
                ids = [i for i in ids if i in set(include)]
            exclude = set(spec.get("exclude_ids", ()))
            return tuple(i for i in ids if i not in exclude)
        if step == "s3":
            return format_cases(self.kb, case_ids=self.artifacts["s2"])
        if step == "s4":
            fcb: FormattedCaseBase = self.artifacts["s3"]
            spec = filters["property"]
            active = set(range(len(fcb.universe)))
            include = spec.get("include_keys")
            if include is not None:
                wanted = {fcb.universe.ordinal_of(k) for k in include if k in fcb.universe}
                active &= wanted
            for key in spec.get("exclude_keys", ()):
                if key in fcb.universe:
                    active.discard(fcb.universe.ordinal_of(key))
            return fcb.restrict(frozenset(active))
        if step == "s5":
            fcb = self.artifacts["s4"]

            def report(done: int, total: int):
                self.progress = {"step": step, "fraction": done / max(total, 1)}

            return build_transaction_db(
                fcb, progress=report, should_stop=self._stop_requested
            )
        if step == "s6":
            db: TransactionDB = self.artifacts["s5"]
            fcb = self.artifacts["s4"]
            spec = filters["transaction"]
            keep = np.ones(db.n_transactions, dtype=bool)
            min_overlap = spec.get("min_overlap")
            if min_overlap is not None and min_overlap > 0 and db.pair_codes is not None:
                _, keep_matrix = pair_selection(fcb, int(min_overlap))
                keep &= keep_matrix.ravel()[db.pair_codes]
            if spec.get("min_items") is not None or spec.get("max_items") is not None:
                counts = _per_transaction_item_counts(db)
                if spec.get("min_items") is not None:
                    keep &= counts >= int(spec["min_items"])
                if spec.get("max_items") is not None:
                    keep &= counts <= int(spec["max_items"])
            if bool(keep.all()):
                return db
            return db.select(keep)
        if step == "s7":
            db = self.artifacts["s6"]

            def report(found: int):
                self.progress = {"step": step, "closed_sets": found}

            mp = MiningParams(
                sigma=float(self.params["sigma"]),
                max_items=self.params.get("max_items"),
                time_budget=self.params.get("time_budget"),
            )
            return mine_fcis(
                db,
                mp,
                workers=int(self.params.get("workers") or 1),
                progress=report,
                should_stop=self._stop_requested,
            )
        if step == "s8":
            fcis: set[FCI] = self.artifacts["s7"]
            fcb = self.artifacts["s4"]
            spec = filters["fci"]
            kept = list(fcis)
            if spec.get("require_change_both_sides", True):
                kept = filter_both_sides_changed(kept)
            if spec.get("min_support") is not None:
                kept = [f for f in kept if f.support >= float(spec["min_support"])]
            if spec.get("max_support") is not None:
                kept = [f for f in kept if f.support <= float(spec["max_support"])]
            if spec.get("min_items") is not None:
                kept = [f for f in kept if len(f.items) >= int(spec["min_items"])]
            if spec.get("max_items") is not None:
                kept = [f for f in kept if len(f.items) <= int(spec["max_items"])]
            views = [prune_redundant(f, self.kb.ontology, fcb.universe) for f in kept]
            views.sort(key=lambda v: (-v.support_count, -v.item_count, v.fci_id))
            return tuple(views)
        if step == "s9":
            fcb = self.artifacts["s4"]
            rule_ids = []
            for view in self.artifacts["s8"]:
                rule = render_rule(view, self.kb, fcb.universe)
                self.rule_store.register(rule)
                rule_ids.append(rule.id)
            return tuple(rule_ids)
        raise SessionError(f"unknown step {step!r}")

    # ------------------------------------------------------------ go back

    def go_back(self, step: str) -> None:
        """Rewind to just before the most recent run of the given step."""
        for pos in range(len(self.history) - 1, -1, -1):
            snap = self.history[pos]
            if snap.step == step:
                abandoned = [s for s in STEPS if s in self.artifacts and s not in snap.artifact_steps]
                for s in STEPS:
                    if s not in snap.artifact_steps:
                        self.artifacts.pop(s, None)
                self.params = snap.params
                self.history = self.history[:pos]
                self.status = "idle"
                self.audit.append(
                    {"event": "went_back", "step": step, "abandoned_steps": abandoned}
                )
                self.run_log.append({"action": "go_back", "step": step})
                self.revision += 1
                return
        raise NoSnapshotError(f"no snapshot recorded for step {step}")

    # ------------------------------------------------------------ queries

    def query_fcis(
        self,
        sort: str = "support",
        descending: bool = True,
        group: bool = False,
        page: int = 0,
        page_size: int = 50,
        min_support: Optional[float] = None,
        contains: Optional[str] = None,
    ) -> dict:
        """Stable paged view over the filtered itemsets (s8 artifact)."""
        if "s8" not in self.artifacts:
            raise MissingInputError("no filtered itemsets; run s8 first")
        keys = {
            "support": lambda v: (v.support_count, v.item_count),
            "items": lambda v: (v.item_count, v.support_count),
            "id": lambda v: v.fci_id,
        }
        if sort not in keys:
            raise SessionError(f"invalid sort key {sort!r}; use one of {sorted(keys)}")
        views = list(self.artifacts["s8"])
        fcb = self.artifacts["s4"]
        if min_support is not None:
            views = [v for v in views if v.fci.support >= min_support]
        if contains:
            views = [
                v
                for v in views
                if any(contains in item_token(i, fcb.universe) for i in v.simplified)
            ]
        views.sort(key=lambda v: (keys[sort](v), v.fci_id), reverse=descending)
        total = len(views)
        if group:
            grouped: dict[str, list] = {}
            order: list[str] = []
            for v in views:
                if v.group_key not in grouped:
                    grouped[v.group_key] = []
                    order.append(v.group_key)
                grouped[v.group_key].append(v)
            start = page * page_size
            page_groups = order[start : start + page_size]
            return {
                "total": total,
                "total_groups": len(order),
                "page": page,
                "groups": [
                    {
                        "group_key": g,
                        "fcis": [self.describe_view(v) for v in grouped[g]],
                    }
                    for g in page_groups
                ],
            }
        start = page * page_size
        return {
            "total": total,
            "page": page,
            "fcis": [self.describe_view(v) for v in views[start : start + page_size]],
        }

    def describe_view(self, view: FCIView) -> dict:
        universe = self.artifacts["s4"].universe
        return {
            "fci_id": view.fci_id,
            "support_count": view.support_count,
            "support": view.fci.support,
            "item_count": view.item_count,
            "group_key": view.group_key,
            "simplified_items": [
                item_token(i, universe)
                for i in sorted(view.simplified, key=Item.sort_key)
            ],
            "raw_items": [
                item_token(i, universe) for i in sorted(view.fci.items, key=Item.sort_key)
            ],
        }

    def view_by_id(self, fci_id: str) -> FCIView:
        for view in self.artifacts.get("s8", ()):
            if view.fci_id == fci_id:
                return view
        raise SessionError(f"no filtered itemset with id {fci_id!r}")

    # ------------------------------------------------------------ digests

    def artifact_digest(self, step: str) -> Optional[str]:
        if step not in self.artifacts:
            return None
        art = self.artifacts[step]
        h = hashlib.sha256()
        if step == "s1":
            h.update(json.dumps(art, sort_keys=True).encode())
        elif step == "s2":
            h.update("\n".join(art).encode())
        elif step in ("s3", "s4"):
            h.update(art.digest().encode())
        elif step in ("s5", "s6"):
            h.update(art.digest().encode())
        elif step == "s7":
            universe = self.artifacts["s4"].universe
            h.update(
                write_fcis(art, lambda i: item_token(i, universe)).encode()
            )
        elif step == "s8":
            universe = self.artifacts["s4"].universe
            for view in art:
                h.update(view.fci_id.encode())
                h.update(
                    " ".join(
                        item_token(i, universe)
                        for i in sorted(view.simplified, key=Item.sort_key)
                    ).encode()
                )
        elif step == "s9":
            h.update("\n".join(art).encode())
        return h.hexdigest()

    def describe(self) -> dict:
        return {
            "id": self.id,
            "kb_digest": self.kb.digest,
            "case_count": len(self.kb.cases),
            "status": self.status,
            "running_step": self.running_step,
            "progress": self.progress,
            "revision": self.revision,
            "params": _copy_params(self.params),
            "steps": {
                s: {
                    "title": STEP_TITLES[s],
                    "present": s in self.artifacts,
                    "digest": self.artifact_digest(s),
                }
                for s in STEPS
            },
        }


def _copy_params(params: dict) -> dict:
    return json.loads(json.dumps(params))


def _per_transaction_item_counts(db: TransactionDB) -> np.ndarray:
    counts = np.zeros(db.n_transactions, dtype=np.int64)
    for start in range(0, len(db.labels), 64):
        block = np.unpackbits(db.bitmaps[start : start + 64], axis=1)[:, : db.n_transactions]
        counts += block.sum(axis=0)
    return counts


def run_pipeline(
    kb: KB,
    sigma: float,
    min_overlap: Optional[int] = None,
    time_budget: Optional[float] = None,
    workers: int = 1,
    filters: Optional[dict] = None,
) -> Session:
    """Drive s1 through s9 non-interactively and return the session."""
    session = Session(kb)
    updates: dict = {"sigma": sigma, "workers": workers}
    if time_budget is not None:
        updates["time_budget"] = time_budget
    merged_filters = {stage: {} for stage in FILTER_STAGES}
    if filters:
        for stage, spec in filters.items():
            merged_filters[stage] = dict(spec)
    if min_overlap is not None:
        merged_filters["transaction"]["min_overlap"] = min_overlap
    updates["filters"] = merged_filters
    session.set_params(updates)
    for step in STEPS:
        session.run_step(step)
    return session


def replay(kb: KB, run_log: Iterable[dict]) -> Session:
    """Re-execute a declarative session log against the same KB."""
    session = Session(kb)
    for event in run_log:
        if event["action"] == "set_params":
            session.set_params(event["updates"])
        elif event["action"] == "run":
            session.run_step(event["step"])
        elif event["action"] == "go_back":
            session.go_back(event["step"])
        else:
            raise SessionError(f"unknown log action {event['action']!r}")
    return session


# ------------------------------------------------------------- snapshots


def save_session(session: Session, path) -> None:
    """Self-contained snapshot: KB text, params, history, artifacts, rules."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("kb.txt", canonical_kb_text(session.kb))
        manifest = {
            "id": session.id,
            "kb_digest": session.kb.digest,
            "params": session.params,
            "run_log": session.run_log,
            "audit": session.audit,
            "history": [
                {"step": s.step, "params": s.params, "artifact_steps": list(s.artifact_steps)}
                for s in session.history
            ],
            "revision": session.revision,
            "artifact_steps": [s for s in STEPS if s in session.artifacts],
        }
        zf.writestr("manifest.json", json.dumps(manifest, sort_keys=True, indent=1))
        for step in STEPS:
            if step not in session.artifacts:
                continue
            for name, payload in _serialize_artifact(session, step).items():
                zf.writestr(f"artifacts/{step}/{name}", payload)
        zf.writestr(
            "rules.json",
            json.dumps(_rule_store_state(session.rule_store), sort_keys=True, indent=1),
        )
    data = buf.getvalue()
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(Path(path))


def load_session(path) -> Session:
    with zipfile.ZipFile(path) as zf:
        kb = parse_kb_text(zf.read("kb.txt").decode("utf-8"))
        manifest = json.loads(zf.read("manifest.json"))
        session = Session(kb, session_id=manifest["id"])
        session.params = manifest["params"]
        session.run_log = manifest["run_log"]
        session.audit = manifest["audit"]
        session.history = [
            _Snapshot(h["step"], h["params"], tuple(h["artifact_steps"]))
            for h in manifest["history"]
        ]
        session.revision = manifest["revision"]
        for step in manifest["artifact_steps"]:
            names = {
                info.filename.split("/", 2)[2]: zf.read(info.filename)
                for info in zf.infolist()
                if info.filename.startswith(f"artifacts/{step}/")
            }
            session.artifacts[step] = _deserialize_artifact(session, step, names)
        _restore_rule_store(session.rule_store, json.loads(zf.read("rules.json")))
    return session


def _serialize_artifact(session: Session, step: str) -> dict[str, bytes]:
    art = session.artifacts[step]
    if step == "s1":
        return {"data.json": json.dumps(art, sort_keys=True).encode()}
    if step == "s2":
        return {"data.json": json.dumps(list(art)).encode()}
    if step in ("s3", "s4"):
        fcb: FormattedCaseBase = art
        doc = {
            "universe": [p.key for p in fcb.universe],
            "active": sorted(fcb.active_ordinals) if fcb.active_ordinals is not None else None,
            "cases": [
                {
                    "id": e.case.id,
                    "pb": sorted(e.problem_set.ordinals),
                    "sol": sorted(e.solution_set.ordinals),
                }
                for e in fcb.entries
            ],
        }
        return {"data.json": json.dumps(doc).encode()}
    if step in ("s5", "s6"):
        db: TransactionDB = art
        doc = {
            "tokens": list(db.tokens),
            "n": db.n_transactions,
            "item_counts": [int(c) for c in db.item_counts],
            "pair_codes": [int(c) for c in db.pair_codes] if db.pair_codes is not None else None,
            "shape": list(db.bitmaps.shape),
        }
        return {"data.json": json.dumps(doc).encode(), "bitmaps.bin": db.bitmaps.tobytes()}
    if step == "s7":
        universe = session.artifacts["s4"].universe
        return {"fcis.txt": write_fcis(art, lambda i: item_token(i, universe)).encode()}
    if step == "s8":
        universe = session.artifacts["s4"].universe
        doc = [
            {
                "fci_id": v.fci_id,
                "simplified": [
                    item_token(i, universe) for i in sorted(v.simplified, key=Item.sort_key)
                ],
            }
            for v in art
        ]
        return {"data.json": json.dumps(doc).encode()}
    if step == "s9":
        return {"data.json": json.dumps(list(art)).encode()}
    raise SessionError(step)


def _token_to_item(token: str, universe) -> Item:
    key, part, marker = token.rsplit("|", 2)
    return Item(universe.ordinal_of(key), Part(part), Marker(marker))


def _deserialize_artifact(session: Session, step: str, names: dict[str, bytes]):
    if step == "s1":
        return json.loads(names["data.json"])
    if step == "s2":
        return tuple(json.loads(names["data.json"]))
    if step in ("s3", "s4"):
        doc = json.loads(names["data.json"])
        if step == "s4" and "s3" in session.artifacts:
            universe = session.artifacts["s3"].universe
        else:
            universe = PropertyUniverse(
                Property.of(parse_concept(k)) for k in doc["universe"]
            )
        entries = [
            FormattedCase(
                session.kb.case_by_id(row["id"]),
                PropertySet(universe, frozenset(row["pb"])),
                PropertySet(universe, frozenset(row["sol"])),
            )
            for row in doc["cases"]
        ]
        active = doc["active"]
        return FormattedCaseBase(
            session.kb,
            universe,
            entries,
            frozenset(active) if active is not None else None,
        )
    if step in ("s5", "s6"):
        doc = json.loads(names["data.json"])
        universe = session.artifacts["s4"].universe
        labels = [_token_to_item(t, universe) for t in doc["tokens"]]
        bitmaps = np.frombuffer(names["bitmaps.bin"], dtype=np.uint8).reshape(doc["shape"])
        return TransactionDB(
            labels,
            doc["tokens"],
            bitmaps.copy(),
            doc["n"],
            item_counts=np.array(doc["item_counts"], dtype=np.int64),
            pair_codes=np.array(doc["pair_codes"], dtype=np.int64)
            if doc["pair_codes"] is not None
            else None,
        )
    if step == "s7":
        universe = session.artifacts["s4"].universe
        fcis = set()
        for line in names["fcis.txt"].decode().splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            count_text, _, tokens_text = line.partition("\t")
            items = frozenset(
                _token_to_item(t, universe) for t in _split_item_tokens(tokens_text)
            )
            db_n = session.artifacts["s6"].n_transactions
            fcis.add(FCI.make(items, int(count_text), db_n, lambda i: item_token(i, universe)))
        return fcis
    if step == "s8":
        doc = json.loads(names["data.json"])
        universe = session.artifacts["s4"].universe
        by_id = {f.id: f for f in session.artifacts["s7"]}
        views = []
        for row in doc:
            fci = by_id[row["fci_id"]]
            simplified = frozenset(_token_to_item(t, universe) for t in row["simplified"])
            pb_signature = " ".join(
                item_token(i, universe)
                for i in sorted(
                    (i for i in simplified if i.part is Part.PB), key=Item.sort_key
                )
            )
            views.append(FCIView(fci, simplified, pb_signature))
        return tuple(views)
    if step == "s9":
        return tuple(json.loads(names["data.json"]))
    raise SessionError(step)


_ITEM_SPLIT_RE = re.compile(r"(.+?\|(?:pb|sol)\|[-=+])(?: |$)")


def _split_item_tokens(text: str) -> list[str]:
    return [m.group(1) for m in _ITEM_SPLIT_RE.finditer(text)]


def _rule_store_state(store: RuleStore) -> dict:
    return {
        "rules": [
            {
                "id": r.id,
                "source_fci_id": r.source_fci_id,
                "universe_fingerprint": r.universe_fingerprint,
                "pb_minus": sorted(r.pb_minus),
                "pb_equal": sorted(r.pb_equal),
                "pb_plus": sorted(r.pb_plus),
                "sol_remove": sorted(r.sol_remove),
                "sol_keep": sorted(r.sol_keep),
                "sol_add": sorted(r.sol_add),
                "decision_removals": list(r.decision_removals),
                "decision_additions": list(r.decision_additions),
                "support_count": r.support_count,
                "support": r.support,
                "status": r.status,
                "explanation": r.explanation,
                "author": r.author,
                "warnings": list(r.warnings),
            }
            for r in sorted(store.rules.values(), key=lambda r: r.id)
        ],
        "audit": [
            {
                "seq": a.seq,
                "action": a.action,
                "rule_id": a.rule_id,
                "detail": a.detail,
                "flags": list(a.flags),
            }
            for a in store.audit
        ],
    }


def _restore_rule_store(store: RuleStore, state: dict) -> None:
    for row in state["rules"]:
        rule = AdaptationRule(
            id=row["id"],
            source_fci_id=row["source_fci_id"],
            universe_fingerprint=row["universe_fingerprint"],
            pb_minus=frozenset(row["pb_minus"]),
            pb_equal=frozenset(row["pb_equal"]),
            pb_plus=frozenset(row["pb_plus"]),
            sol_remove=frozenset(row["sol_remove"]),
            sol_keep=frozenset(row["sol_keep"]),
            sol_add=frozenset(row["sol_add"]),
            decision_removals=tuple(row["decision_removals"]),
            decision_additions=tuple(row["decision_additions"]),
            support_count=row["support_count"],
            support=row["support"],
            status=row["status"],
            explanation=row["explanation"],
            author=row["author"],
            warnings=tuple(row["warnings"]),
        )
        store.rules[rule.id] = rule
    for row in state["audit"]:
        store.audit.append(
            AuditEntry(row["seq"], row["action"], row["rule_id"], row["detail"], tuple(row["flags"]))
        )
