"""Frequent-itemset mining.

``mine_frequent`` is the production miner: FP-growth over a prefix tree of
frequency-ordered transactions, recursing on conditional pattern bases.
``brute_force_frequent`` is the exhaustive reference with the same contract;
the two must agree itemset-for-itemset and count-for-count.

The threshold comparison is inclusive (support >= min_support) and is carried
out on integer counts via cross-multiplication, so mining never depends on a
floating-point boundary.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

from .model import (
    FrequencyTable,
    FrequentItemset,
    TransactionDatabase,
    canonical_order,
    item_frequencies,
    support_count,
)

# Exhaustive enumeration is exponential in the frequent-item count; refuse
# beyond this many frequent single items.
BRUTE_FORCE_ITEM_LIMIT = 20


class Mode(Enum):
    """Mining output mode: every frequent itemset, or only maximal ones."""

    ALL = "all"
    MAXIMAL = "maximal"


@dataclass(frozen=True)
class MiningConfig:
    min_support: float
    mode: Mode = Mode.ALL

    def __post_init__(self):
        if not 0.0 < self.min_support <= 1.0:
            raise ValueError(f"min_support must lie in (0, 1], got {self.min_support}")


def min_count(min_support: float, n_transactions: int) -> int:
    """Smallest transaction count c with c/n >= min_support, computed exactly."""
    num, den = float(min_support).as_integer_ratio()
    return -((-num * n_transactions) // den)


class _FPNode:
    __slots__ = ("item", "count", "parent", "children")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children = {}


def _fp_growth(rows, threshold, suffix, found):
    """Mine ``rows`` (item tuples in rank order, with multiplicities) into ``found``.

    Every itemset emitted is ``suffix`` extended by items from the rows; counts
    are exact. Each frequent itemset is reached exactly once because a
    conditional pattern base only ever contains items that precede the
    conditioning item in rank order.
    """
    counts: dict[int, int] = defaultdict(int)
    for items, mult in rows:
        for item in items:
            counts[item] += mult
    keep = {item for item, c in counts.items() if c >= threshold}
    if not keep:
        return

    root = _FPNode(None, None)
    header: dict[int, list[_FPNode]] = defaultdict(list)
    for items, mult in rows:
        node = root
        for item in items:
            if item not in keep:
                continue
            child = node.children.get(item)
            if child is None:
                child = _FPNode(item, node)
                node.children[item] = child
                header[item].append(child)
            child.count += mult
            node = child

    for item in keep:
        found[suffix | {item}] = counts[item]
        base = []
        for node in header[item]:
            path = []
            up = node.parent
            while up.item is not None:
                path.append(up.item)
                up = up.parent
            if path:
                path.reverse()
                base.append((tuple(path), node.count))
        if base:
            _fp_growth(base, threshold, suffix | {item}, found)


def _finalize(found: dict[frozenset[int], int], freq: FrequencyTable, n: int) -> list[FrequentItemset]:
    """Deterministic output contract: canonical items per set; sets sorted by
    descending count, then ascending length, then lexicographic id sequence."""
    out = [
        FrequentItemset(items=canonical_order(s, freq), count=c, n_transactions=n)
        for s, c in found.items()
    ]
    out.sort(key=lambda fi: (-fi.count, len(fi.items), fi.items))
    return out


def mine_frequent(db: TransactionDatabase, config: MiningConfig) -> list[FrequentItemset]:
    """All itemsets with support >= min_support (ALL mode), or only those with
    no frequent proper superset (MAXIMAL mode), with exact supports."""
    if db.n_transactions == 0:
        raise ValueError("cannot mine an empty database")
    freq = item_frequencies(db)
    threshold = min_count(config.min_support, db.n_transactions)

    rows = []
    for t in db.transactions:
        # Infrequent items can never be part of a frequent itemset; prune
        # before tree construction.
        kept = [item for item in t if freq.count(item) >= threshold]
        if kept:
            kept.sort(key=freq.order_key)
            rows.append((tuple(kept), 1))

    found: dict[frozenset[int], int] = {}
    _fp_growth(rows, threshold, frozenset(), found)
    itemsets = _finalize(found, freq, db.n_transactions)
    if config.mode is Mode.MAXIMAL:
        itemsets = maximal_filter(itemsets)
    return itemsets


def brute_force_frequent(db: TransactionDatabase, config: MiningConfig) -> list[FrequentItemset]:
    """Reference miner: enumerate every subset of the frequent single items and
    count its support directly. Same output contract as mine_frequent."""
    if db.n_transactions == 0:
        raise ValueError("cannot mine an empty database")
    freq = item_frequencies(db)
    threshold = min_count(config.min_support, db.n_transactions)

    singles = [item for item in freq if freq.count(item) >= threshold]
    if len(singles) > BRUTE_FORCE_ITEM_LIMIT:
        raise ValueError(
            f"{len(singles)} frequent items exceed the brute-force limit of "
            f"{BRUTE_FORCE_ITEM_LIMIT}"
        )

    found: dict[frozenset[int], int] = {}
    for size in range(1, len(singles) + 1):
        for combo in combinations(singles, size):
            c = support_count(combo, db)
            if c >= threshold:
                found[frozenset(combo)] = c
    itemsets = _finalize(found, freq, db.n_transactions)
    if config.mode is Mode.MAXIMAL:
        itemsets = maximal_filter(itemsets)
    return itemsets


def maximal_filter(itemsets: list[FrequentItemset]) -> list[FrequentItemset]:
    """Keep exactly the itemsets with no proper superset in the input.

    The input is expected to be a complete all-frequent collection; the result
    preserves its relative order.
    """
    sets = [fi.item_set for fi in itemsets]
    return [
        fi
        for fi, s in zip(itemsets, sets)
        if not any(s < other for other in sets)
    ]
