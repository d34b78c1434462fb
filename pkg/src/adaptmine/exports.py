"""Artifact exports in their fixed text formats, written atomically."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .mining import TransactionDB, write_fcis
from .rules import rules_document
from .session import Session, save_session
from .transactions import item_token

EXPORT_KINDS = ("transactions", "fcis", "rules", "session")


class MissingArtifactError(Exception):
    pass


def transactions_text(session: Session) -> str:
    """Transaction database in line format, from the filtered stage."""
    db = session.artifacts.get("s6") or session.artifacts.get("s5")
    if db is None:
        raise MissingArtifactError("no transaction artifact; run s5 (and s6) first")
    fcb = session.artifacts["s4"]
    return _db_to_text(db, fcb, session.kb.digest)


def _db_to_text(db: TransactionDB, fcb, kb_digest: str) -> str:
    ids = [e.case.id for e in fcb.entries]
    n_cases = len(ids)
    lines = [f"# kb-digest: {kb_digest}"]
    if db.n_transactions == 0:
        return "\n".join(lines) + "\n"
    # column-wise reconstruction of item lists from the vertical bitmaps
    tokens_by_row = list(db.tokens)
    order = sorted(range(len(db.labels)), key=lambda r: db.labels[r].sort_key())
    chunk = 4096
    pair_codes = db.pair_codes
    out_rows: list[str] = []
    for start in range(0, db.n_transactions, chunk):
        stop = min(start + chunk, db.n_transactions)
        byte_start = start // 8
        byte_stop = (stop + 7) // 8
        block = np.unpackbits(db.bitmaps[:, byte_start:byte_stop], axis=1)
        local = block[:, start - byte_start * 8 : stop - byte_start * 8]
        for col in range(stop - start):
            tid = start + col
            present = [r for r in order if local[r, col]]
            token_text = " ".join(tokens_by_row[r] for r in present)
            if pair_codes is not None:
                code = int(pair_codes[tid])
                src, tgt = ids[code // n_cases], ids[code % n_cases]
            else:
                src, tgt = str(tid), str(tid)
            out_rows.append(f"{src},{tgt}: {token_text}")
    lines.extend(out_rows)
    return "\n".join(lines) + "\n"


def fcis_text(session: Session) -> str:
    fcis = session.artifacts.get("s7")
    if fcis is None:
        raise MissingArtifactError("no mined itemsets; run s7 first")
    universe = session.artifacts["s4"].universe
    return write_fcis(
        fcis,
        lambda i: item_token(i, universe),
        header={"kb-digest": session.kb.digest, "sigma": session.params["sigma"]},
    )


def rules_text(session: Session) -> str:
    if "s4" not in session.artifacts:
        raise MissingArtifactError("no formatted case base; run the pipeline first")
    universe = session.artifacts["s4"].universe
    doc = rules_document(
        session.rule_store, universe, session.kb.digest, session.params["sigma"]
    )
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def export_artifact(session: Session, kind: str, path: Union[str, Path]) -> Path:
    """Write one artifact kind to disk (temp file then rename)."""
    path = Path(path)
    if kind == "session":
        save_session(session, path)
        return path
    if kind == "transactions":
        text = transactions_text(session)
    elif kind == "fcis":
        text = fcis_text(session)
    elif kind == "rules":
        text = rules_text(session)
    else:
        raise ValueError(f"unknown export kind {kind!r}; expected one of {EXPORT_KINDS}")
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path
