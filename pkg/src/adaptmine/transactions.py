"""Marked-transaction encoding of ordered case pairs.

Each ordered pair of distinct cases becomes one transaction. An item is a
property tagged with the part it describes (problem or solution) and a
marker: '-' for properties of the first case the second lacks, '=' for
shared properties, '+' for properties only the second case has.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional

import numpy as np

from .mining import TransactionDB
from .properties import FormattedCaseBase, PropertySet, same_universe, PropertyUniverse


class Part(str, Enum):
    PB = "pb"
    SOL = "sol"


class Marker(str, Enum):
    MINUS = "-"
    EQUAL = "="
    PLUS = "+"


_PART_RANK = {Part.PB: 0, Part.SOL: 1}
_MARKER_RANK = {Marker.MINUS: 0, Marker.EQUAL: 1, Marker.PLUS: 2}


@dataclass(frozen=True)
class Item:
    ordinal: int
    part: Part
    marker: Marker

    def sort_key(self) -> tuple[int, int, int]:
        return (_PART_RANK[self.part], self.ordinal, _MARKER_RANK[self.marker])

    def dense_code(self) -> int:
        # ordinal * 6 + part/marker code; small ids help the miner
        return self.ordinal * 6 + _PART_RANK[self.part] * 3 + _MARKER_RANK[self.marker]


def item_token(item: Item, universe: PropertyUniverse) -> str:
    return f"{universe.key_of(item.ordinal)}|{item.part.value}|{item.marker.value}"


@dataclass(frozen=True)
class Transaction:
    source_id: str
    target_id: str
    items: frozenset[Item]

    @property
    def pair(self) -> tuple[str, str]:
        return (self.source_id, self.target_id)


def encode_pair(
    pb1: PropertySet,
    pb2: PropertySet,
    sol1: PropertySet,
    sol2: PropertySet,
    source_id: str = "",
    target_id: str = "",
) -> Transaction:
    """Encode the variation between two cases as one marked transaction."""
    same_universe(pb1, pb2, sol1, sol2)
    items: set[Item] = set()
    for part, left, right in ((Part.PB, pb1, pb2), (Part.SOL, sol1, sol2)):
        for o in left.ordinals - right.ordinals:
            items.add(Item(o, part, Marker.MINUS))
        for o in left.ordinals & right.ordinals:
            items.add(Item(o, part, Marker.EQUAL))
        for o in right.ordinals - left.ordinals:
            items.add(Item(o, part, Marker.PLUS))
    return Transaction(source_id, target_id, frozenset(items))


def build_transactions(
    fcb: FormattedCaseBase, min_overlap: Optional[int] = None
) -> Iterator[Transaction]:
    """Stream transactions for every ordered pair of distinct cases.

    Pairs come in row-major (source index, target index) order. When
    min_overlap is given, a pair is kept only if the two problems share at
    least that many properties. The stream never holds more than one
    transaction, so callers decide how much to materialize.
    """
    entries = fcb.entries
    for i, src in enumerate(entries):
        for j, tgt in enumerate(entries):
            if i == j:
                continue
            if min_overlap is not None:
                if len(src.problem_set.ordinals & tgt.problem_set.ordinals) < min_overlap:
                    continue
            yield encode_pair(
                src.problem_set,
                tgt.problem_set,
                src.solution_set,
                tgt.solution_set,
                src.case.id,
                tgt.case.id,
            )


@dataclass
class TransactionStats:
    count: int
    item_frequencies: dict[Item, int]
    mean_items: float
    density: float


def transaction_stats(transactions: Iterable[Transaction]) -> TransactionStats:
    """Exact counts over a transaction stream (consumes it)."""
    count = 0
    total_items = 0
    freq: dict[Item, int] = {}
    for t in transactions:
        count += 1
        total_items += len(t.items)
        for item in t.items:
            freq[item] = freq.get(item, 0) + 1
    mean = total_items / count if count else 0.0
    density = mean / len(freq) if freq else 0.0
    return TransactionStats(count, freq, mean, density)


def _bool_matrices(fcb: FormattedCaseBase) -> tuple[np.ndarray, np.ndarray]:
    n = len(fcb.entries)
    width = len(fcb.universe)
    pb = np.zeros((n, width), dtype=bool)
    sol = np.zeros((n, width), dtype=bool)
    for row, entry in enumerate(fcb.entries):
        if entry.problem_set.ordinals:
            pb[row, sorted(entry.problem_set.ordinals)] = True
        if entry.solution_set.ordinals:
            sol[row, sorted(entry.solution_set.ordinals)] = True
    return pb, sol


def pair_selection(
    fcb: FormattedCaseBase, min_overlap: Optional[int] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Kept ordered pairs as (pair_codes, keep_matrix); code = i * n + j."""
    pb, _ = _bool_matrices(fcb)
    n = pb.shape[0]
    keep = ~np.eye(n, dtype=bool)
    if min_overlap is not None and min_overlap > 0:
        overlap = pb.astype(np.int32) @ pb.T.astype(np.int32)
        keep &= overlap >= min_overlap
    codes = np.flatnonzero(keep.ravel()).astype(np.int64)
    return codes, keep


def build_transaction_db(
    fcb: FormattedCaseBase,
    min_overlap: Optional[int] = None,
    progress: Optional[callable] = None,
    should_stop: Optional[callable] = None,
) -> TransactionDB:
    """Vertical bitmap database over all kept ordered pairs.

    Columns are pairs in row-major order, rows are the marked items that
    occur at least once. Construction is vectorized per source case and
    packs bits in fixed-width chunks, so peak memory stays near the packed
    size. Equivalent to mining over build_transactions output.
    """
    pb, sol = _bool_matrices(fcb)
    n, width = pb.shape
    codes, keep = pair_selection(fcb, min_overlap)
    n_pairs = codes.shape[0]
    n_rows = 6 * width
    n_bytes = max((n_pairs + 7) // 8, 1)
    packed = np.zeros((n_rows, n_bytes), dtype=np.uint8)

    chunk_width = 8192
    buf = np.zeros((n_rows, chunk_width), dtype=bool)
    buf_fill = 0
    byte_pos = 0

    def flush(cols: int):
        nonlocal byte_pos
        if cols == 0:
            return
        chunk = np.packbits(buf[:, :cols], axis=1)
        packed[:, byte_pos : byte_pos + chunk.shape[1]] |= chunk
        byte_pos += cols // 8

    for i in range(n):
        if should_stop is not None and should_stop():
            raise InterruptedError("transaction encoding interrupted")
        targets = np.flatnonzero(keep[i])
        if targets.size == 0:
            continue
        src_pb = pb[i]
        src_sol = sol[i]
        tgt_pb = pb[targets]
        tgt_sol = sol[targets]
        block = np.concatenate(
            [
                (src_pb[None, :] & ~tgt_pb).T,
                (src_pb[None, :] & tgt_pb).T,
                (~src_pb[None, :] & tgt_pb).T,
                (src_sol[None, :] & ~tgt_sol).T,
                (src_sol[None, :] & tgt_sol).T,
                (~src_sol[None, :] & tgt_sol).T,
            ],
            axis=0,
        )
        filled = 0
        while filled < block.shape[1]:
            take = min(chunk_width - buf_fill, block.shape[1] - filled)
            buf[:, buf_fill : buf_fill + take] = block[:, filled : filled + take]
            buf_fill += take
            filled += take
            if buf_fill == chunk_width:
                flush(chunk_width)
                buf_fill = 0
        if progress is not None:
            progress(i + 1, n)
    flush(buf_fill)

    counts = np.bitwise_count(packed).sum(axis=1)
    occupied = np.flatnonzero(counts > 0)

    def row_item(row: int) -> Item:
        part_marker, ordinal = divmod(row, width)
        # rows were stacked as pb-/pb=/pb+/sol-/sol=/sol+
        part = Part.PB if part_marker < 3 else Part.SOL
        marker = (Marker.MINUS, Marker.EQUAL, Marker.PLUS)[part_marker % 3]
        return Item(int(ordinal), part, marker)

    items = sorted((row_item(r) for r in occupied), key=Item.sort_key)
    # map back from item to its block row for the final row gather
    row_of = {row_item(r): r for r in occupied}
    order = [row_of[item] for item in items]
    bitmaps = packed[order] if order else np.zeros((0, n_bytes), dtype=np.uint8)
    tokens = [item_token(item, fcb.universe) for item in items]
    return TransactionDB(
        items,
        tokens,
        bitmaps,
        n_pairs,
        item_counts=counts[order] if order else None,
        pair_codes=codes,
    )


def write_transactions(
    fcb: FormattedCaseBase,
    min_overlap: Optional[int] = None,
    kb_digest: Optional[str] = None,
) -> str:
    """Text export: '<id1>,<id2>: token token ...' with items in total order."""
    lines = []
    if kb_digest:
        lines.append(f"# kb-digest: {kb_digest}")
    for t in build_transactions(fcb, min_overlap):
        tokens = " ".join(
            item_token(i, fcb.universe) for i in sorted(t.items, key=Item.sort_key)
        )
        lines.append(f"{t.source_id},{t.target_id}: {tokens}")
    return "\n".join(lines) + "\n"


_ITEM_TOKEN_RE = re.compile(r"(.+?)\|(pb|sol)\|([-=+])(?: |$)")


def read_transactions(text: str) -> tuple[dict, list[tuple[str, str, frozenset[str]]]]:
    """Parse a transaction export back into token itemsets.

    Items come back as raw token strings; mining over them is equivalent
    to mining the original database. Property keys may contain spaces but
    never '|', which keeps the token grammar unambiguous.
    """
    header: dict = {}
    rows: list[tuple[str, str, frozenset[str]]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
            continue
        prefix, _, items_part = line.partition(":")
        src, _, tgt = prefix.partition(",")
        tokens = frozenset(
            m.group(1) + "|" + m.group(2) + "|" + m.group(3)
            for m in _ITEM_TOKEN_RE.finditer(items_part.strip())
        )
        rows.append((src.strip(), tgt.strip(), tokens))
    return header, rows
