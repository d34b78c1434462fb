"""Exact frequent-closed-itemset extraction over a vertical bitmap database.

The search is CHARM-style: items are explored in increasing support order
and branch tidsets are compared with the classic four-way test (equal,
subset, superset, incomparable) so that items known to co-occur are merged
instead of spawning redundant branches. Tidsets are kept as packed bit
arrays, which makes intersections and support counts cheap even for a few
hundred thousand transactions.

Branch exploration may be spread over worker threads; every branch only
appends to its own candidate list and the final closed-set resolution is
an order-independent reduction, so the result set is identical for any
worker count.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Optional, Sequence

import numpy as np


class MiningError(Exception):
    pass


class EmptyDatabaseError(MiningError):
    pass


class ZeroSupportError(MiningError):
    pass


class MiningBudgetExceeded(MiningError):
    """Time budget ran out; partial results are discarded."""


@dataclass(frozen=True)
class MiningParams:
    sigma: float
    max_items: Optional[int] = None
    time_budget: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError(f"sigma must be in [0, 1], got {self.sigma}")
        if self.max_items is not None and self.max_items < 0:
            raise ValueError("max_items must be non-negative")


@dataclass(frozen=True)
class FCI:
    """A frequent closed itemset with its absolute and relative support."""

    items: frozenset
    support_count: int
    support: float
    id: str

    @staticmethod
    def make(items: frozenset, support_count: int, n_transactions: int,
             token_of: Callable[[Hashable], str] = str) -> "FCI":
        tokens = sorted(token_of(i) for i in items)
        digest = hashlib.sha256("\x1f".join(tokens).encode("utf-8")).hexdigest()[:16]
        return FCI(items, support_count, support_count / n_transactions, digest)


class TransactionDB:
    """Vertical (item by transaction) bitmap representation.

    labels are arbitrary hashable item identities; tokens are their
    canonical strings, used for ordering ties, itemset ids and export.
    """

    def __init__(
        self,
        labels: Sequence[Hashable],
        tokens: Sequence[str],
        bitmaps: np.ndarray,
        n_transactions: int,
        item_counts: Optional[np.ndarray] = None,
        pair_codes: Optional[np.ndarray] = None,
    ):
        self.labels = tuple(labels)
        self.tokens = tuple(tokens)
        self.bitmaps = np.ascontiguousarray(bitmaps, dtype=np.uint8)
        self.n_transactions = int(n_transactions)
        self.label_index = {label: i for i, label in enumerate(self.labels)}
        if item_counts is None and len(self.labels):
            item_counts = np.array(
                [int(np.bitwise_count(row).sum()) for row in self.bitmaps], dtype=np.int64
            )
        elif item_counts is None:
            item_counts = np.zeros(0, dtype=np.int64)
        self.item_counts = np.asarray(item_counts, dtype=np.int64)
        self.pair_codes = pair_codes

    def token_of(self, label) -> str:
        return self.tokens[self.label_index[label]]

    @classmethod
    def from_itemsets(
        cls,
        itemsets: Iterable[frozenset],
        token_of: Callable[[Hashable], str] = str,
        pair_codes: Optional[np.ndarray] = None,
    ) -> "TransactionDB":
        rows = [frozenset(t) for t in itemsets]
        n = len(rows)
        labels = sorted({item for t in rows for item in t}, key=token_of)
        index = {label: i for i, label in enumerate(labels)}
        n_bytes = (n + 7) // 8 if n else 0
        bitmaps = np.zeros((len(labels), max(n_bytes, 1)), dtype=np.uint8)
        for tid, t in enumerate(rows):
            byte, bit = divmod(tid, 8)
            mask = np.uint8(0x80 >> bit)
            for item in t:
                bitmaps[index[item], byte] |= mask
        return cls(labels, [token_of(l) for l in labels], bitmaps, n, pair_codes=pair_codes)

    def support_count_of(self, labels: Iterable[Hashable]) -> int:
        """Number of transactions containing every given item."""
        rows = [self.label_index[l] for l in labels]
        if not rows:
            return self.n_transactions
        acc = self.bitmaps[rows[0]].copy()
        for r in rows[1:]:
            np.bitwise_and(acc, self.bitmaps[r], out=acc)
        return int(np.bitwise_count(acc).sum())

    def _tidset_of(self, labels: Iterable[Hashable]) -> np.ndarray:
        rows = [self.label_index[l] for l in labels]
        if not rows:
            return self._full_bitmap()
        acc = self.bitmaps[rows[0]].copy()
        for r in rows[1:]:
            np.bitwise_and(acc, self.bitmaps[r], out=acc)
        return acc

    def _full_bitmap(self) -> np.ndarray:
        n_bytes = (
            self.bitmaps.shape[1]
            if len(self.labels)
            else max((self.n_transactions + 7) // 8, 1)
        )
        bits = np.zeros(n_bytes * 8, dtype=np.uint8)
        bits[: self.n_transactions] = 1
        return np.packbits(bits)

    def select(self, keep: np.ndarray) -> "TransactionDB":
        """Column subset: keep[i] says whether transaction i survives."""
        keep = np.asarray(keep, dtype=bool)
        if keep.shape[0] != self.n_transactions:
            raise ValueError("selection mask length must equal the transaction count")
        new_n = int(keep.sum())
        n_bytes = max((new_n + 7) // 8, 1)
        out = np.zeros((len(self.labels), n_bytes), dtype=np.uint8)
        if new_n:
            for start in range(0, len(self.labels), 64):
                stop = min(start + 64, len(self.labels))
                block = np.unpackbits(self.bitmaps[start:stop], axis=1)[:, : self.n_transactions]
                out[start:stop] = np.packbits(block[:, keep], axis=1)[:, :n_bytes]
        counts = np.array([int(np.bitwise_count(r).sum()) for r in out], dtype=np.int64)
        codes = self.pair_codes[keep] if self.pair_codes is not None else None
        return TransactionDB(self.labels, self.tokens, out, new_n, counts, codes)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.n_transactions).encode())
        for token in self.tokens:
            h.update(token.encode("utf-8"))
            h.update(b"\x1f")
        h.update(self.bitmaps.tobytes())
        if self.pair_codes is not None:
            h.update(np.ascontiguousarray(self.pair_codes).tobytes())
        return h.hexdigest()


def min_support_count(sigma: float, n_transactions: int) -> int:
    """Absolute support threshold; support-zero itemsets are never mined."""
    return max(1, math.ceil(sigma * n_transactions))


def support_of(db: TransactionDB, items: Iterable[Hashable]) -> float:
    """Fraction of transactions containing the itemset (1.0 for the empty set)."""
    items = list(items)
    for item in items:
        if item not in db.label_index:
            return 0.0
    return db.support_count_of(items) / db.n_transactions


def closure_of(db: TransactionDB, items: Iterable[Hashable]) -> frozenset:
    """Largest superset with the same support: intersect the supporting rows."""
    items = list(items)
    if any(item not in db.label_index for item in items):
        raise ZeroSupportError(f"itemset {items!r} occurs in no transaction")
    tid = db._tidset_of(items)
    count = int(np.bitwise_count(tid).sum())
    if count == 0:
        raise ZeroSupportError(f"itemset {items!r} occurs in no transaction")
    out = []
    for row, label in zip(db.bitmaps, db.labels):
        if not np.any(tid & ~row):
            out.append(label)
    return frozenset(out)


@dataclass
class _Node:
    items: frozenset
    tidset: np.ndarray
    count: int
    order_token: str


def mine_fcis(
    db: TransactionDB,
    params: MiningParams,
    workers: int = 1,
    progress: Optional[Callable[[int], None]] = None,
    should_stop: Optional[Callable[[], bool]] = None,
) -> set[FCI]:
    """All frequent closed itemsets at the given threshold, exactly.

    The empty itemset is reported (support 1) when it is closed, that is
    when no single item occurs in every transaction. Raises
    MiningBudgetExceeded when the optional time budget runs out, and
    InterruptedError via should_stop for cooperative cancellation.
    """
    n = db.n_transactions
    if n == 0:
        raise EmptyDatabaseError("cannot mine an empty transaction database")
    min_count = min_support_count(params.sigma, n)
    deadline = time.monotonic() + params.time_budget if params.time_budget is not None else None

    roots: list[_Node] = []
    for i, label in enumerate(db.labels):
        count = int(db.item_counts[i])
        if count >= min_count:
            roots.append(_Node(frozenset({label}), db.bitmaps[i], count, db.tokens[i]))
    roots.sort(key=lambda nd: (nd.count, nd.order_token))

    candidates: list[tuple[frozenset, int, bytes]] = []
    emitted = 0

    def checkpoint():
        nonlocal emitted
        if deadline is not None and time.monotonic() > deadline:
            raise MiningBudgetExceeded(
                f"time budget of {params.time_budget}s exceeded; partial results discarded"
            )
        if should_stop is not None and should_stop():
            raise InterruptedError("mining interrupted")

    def extend(nodes: list[_Node], sink: list):
        consumed = [False] * len(nodes)
        for idx, node in enumerate(nodes):
            if consumed[idx]:
                continue
            checkpoint()
            merged = set(node.items)
            raw_children: list[tuple[_Node, np.ndarray, int]] = []
            for jdx in range(idx + 1, len(nodes)):
                if consumed[jdx]:
                    continue
                other = nodes[jdx]
                tid = node.tidset & other.tidset
                count = int(np.bitwise_count(tid).sum())
                if count < min_count:
                    continue
                if count == node.count and count == other.count:
                    merged |= other.items
                    consumed[jdx] = True
                elif count == node.count:
                    merged |= other.items
                elif count == other.count:
                    consumed[jdx] = True
                    raw_children.append((other, tid, count))
                else:
                    raw_children.append((other, tid, count))
            closed_items = frozenset(merged)
            if params.max_items is not None and len(closed_items) > params.max_items:
                continue  # every superset is larger still, prune the branch
            if raw_children:
                children = [
                    _Node(closed_items | child.items, tid, count, child.order_token)
                    for child, tid, count in raw_children
                ]
                children.sort(key=lambda nd: (nd.count, nd.order_token))
                extend(children, sink)
            sink.append((closed_items, node.count, _tid_key(node.tidset)))
            _report()

    def _report():
        nonlocal emitted
        emitted += 1
        if progress is not None and emitted % 1000 == 0:
            progress(emitted)

    if workers <= 1 or len(roots) <= 1:
        extend(roots, candidates)
    else:
        # Resolve cross-branch merges sequentially, then explore the
        # surviving top-level branches in parallel.
        branch_jobs: list[list[_Node]] = []
        consumed = [False] * len(roots)
        for idx, node in enumerate(roots):
            if consumed[idx]:
                continue
            checkpoint()
            merged = set(node.items)
            raw_children = []
            for jdx in range(idx + 1, len(roots)):
                if consumed[jdx]:
                    continue
                other = roots[jdx]
                tid = node.tidset & other.tidset
                count = int(np.bitwise_count(tid).sum())
                if count < min_count:
                    continue
                if count == node.count and count == other.count:
                    merged |= other.items
                    consumed[jdx] = True
                elif count == node.count:
                    merged |= other.items
                elif count == other.count:
                    consumed[jdx] = True
                    raw_children.append((other, tid, count))
                else:
                    raw_children.append((other, tid, count))
            closed_items = frozenset(merged)
            job: list[_Node] = []
            if not (params.max_items is not None and len(closed_items) > params.max_items):
                job = [
                    _Node(closed_items | child.items, tid, count, child.order_token)
                    for child, tid, count in raw_children
                ]
                job.sort(key=lambda nd: (nd.count, nd.order_token))
                candidates.append((closed_items, node.count, _tid_key(node.tidset)))
            if job:
                branch_jobs.append(job)
        sinks: list[list] = [[] for _ in branch_jobs]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(extend, job, sink) for job, sink in zip(branch_jobs, sinks)
            ]
            for fut in futures:
                fut.result()
        for sink in sinks:
            candidates.extend(sink)

    best: dict[tuple[int, bytes], tuple[int, tuple, frozenset]] = {}
    for items, count, tid_key in candidates:
        key = (count, tid_key)
        rank = (len(items), tuple(sorted(db.token_of(i) for i in items)))
        prev = best.get(key)
        if prev is None or rank > prev[:2]:
            best[key] = (rank[0], rank[1], items)
    result = {
        FCI.make(items, count, n, db.token_of)
        for (count, _), (_, _, items) in best.items()
    }

    # The empty itemset is closed exactly when nothing occurs in every row.
    if not any(int(c) == n for c in db.item_counts):
        result.add(FCI.make(frozenset(), n, n, db.token_of))
    return result


def _tid_key(tidset: np.ndarray) -> bytes:
    return hashlib.blake2b(np.ascontiguousarray(tidset).tobytes(), digest_size=16).digest()


def write_fcis(fcis: Iterable[FCI], token_of: Callable[[Hashable], str] = str,
               header: Optional[dict] = None) -> str:
    """Serialize FCIs: 'support_count<TAB>tokens', most supported first."""
    lines = []
    if header:
        for k, v in header.items():
            lines.append(f"# {k}: {v}")
    rendered = []
    for fci in fcis:
        tokens = " ".join(sorted(token_of(i) for i in fci.items))
        rendered.append((-fci.support_count, tokens, f"{fci.support_count}\t{tokens}"))
    rendered.sort(key=lambda r: (r[0], r[1]))
    lines.extend(r[2] for r in rendered)
    return "\n".join(lines) + "\n"
