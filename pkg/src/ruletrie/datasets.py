"""Seeded synthetic basket data at grocery-retail scale.

Real point-of-sale datasets are not bundled; this generator produces a
deterministic stand-in with the same gross shape: a long-tail item popularity
curve, a handful of dominant staples, small baskets, and themed item clusters
that co-occur often enough to make multi-item itemsets frequent.

Identical (seed, size) arguments always produce identical rows.
"""

from __future__ import annotations

import random
from typing import IO, Sequence

from .model import TransactionDatabase, parse_basket_file

DEFAULT_SEED = 9834
DEFAULT_TRANSACTIONS = 9835
DEFAULT_ITEMS = 169

_CLUSTER_SIZE = 8
_CLUSTER_BOOST = 11.0
_CLUSTER_PROB = 0.78
_MEAN_EXTRA_ITEMS = 4.0
_MAX_BASKET = 32
_POPULARITY_EXPONENT = 1.12
_POPULARITY_OFFSET = 2.0
_POPULARITY_CAP = 0.07


def _popularity(n_items: int) -> list[float]:
    """Truncated power-law popularity weights, most popular first."""
    raw = [1.0 / (i + _POPULARITY_OFFSET) ** _POPULARITY_EXPONENT for i in range(n_items)]
    total = sum(raw)
    capped = [min(w / total, _POPULARITY_CAP) for w in raw]
    return capped


def synthetic_baskets(
    n_transactions: int = DEFAULT_TRANSACTIONS,
    n_items: int = DEFAULT_ITEMS,
    seed: int = DEFAULT_SEED,
) -> list[list[str]]:
    """Generate basket rows (token lists) deterministically from ``seed``."""
    if n_transactions < 1 or n_items < 2:
        raise ValueError("need at least one transaction and two items")
    rng = random.Random(seed)
    names = [f"item{i:03d}" for i in range(n_items)]
    base = _popularity(n_items)
    clusters = [
        list(range(start, min(start + _CLUSTER_SIZE, n_items)))
        for start in range(0, n_items, _CLUSTER_SIZE)
    ]

    rows = []
    for _ in range(n_transactions):
        weights = list(base)
        if rng.random() < _CLUSTER_PROB:
            for item in rng.choice(clusters):
                weights[item] *= _CLUSTER_BOOST
        size = 1 + min(_MAX_BASKET - 1, int(rng.expovariate(1.0 / _MEAN_EXTRA_ITEMS)))
        chosen: set[int] = set()
        # Weighted draws with replacement, deduplicated; bounded attempts keep
        # the row count deterministic even when weights concentrate.
        for _ in range(4 * size):
            if len(chosen) >= size:
                break
            chosen.add(rng.choices(range(n_items), weights=weights, k=1)[0])
        rows.append([names[i] for i in sorted(chosen)])
    return rows


def basket_text(rows: Sequence[Sequence[str]]) -> str:
    """Render rows in the basket file format: one comma-joined line per transaction."""
    return "\n".join(",".join(row) for row in rows) + ("\n" if rows else "")


def write_basket(rows: Sequence[Sequence[str]], fp: IO[str]) -> None:
    fp.write(basket_text(rows))


def synthetic_database(
    n_transactions: int = DEFAULT_TRANSACTIONS,
    n_items: int = DEFAULT_ITEMS,
    seed: int = DEFAULT_SEED,
) -> TransactionDatabase:
    """Generate and parse in one step (round-trips through the file format)."""
    return parse_basket_file(basket_text(synthetic_baskets(n_transactions, n_items, seed)))
