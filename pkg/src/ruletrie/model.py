"""Domain types for transactions, itemsets and rules, plus exact support
counting and canonical item ordering.

Items are interned to dense integer ids at parse time; every downstream
structure works on ids and maps back to tokens only when printing. Support is
kept as an exact transaction count next to the database size so that equality
checks never depend on floating point.

All types here are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Iterator

from .errors import DictionaryMismatchError


class ItemDictionary:
    """Bijection between item tokens and dense ids 0..len-1, in first-appearance order."""

    def __init__(self) -> None:
        self._names: list[str] = []
        self._ids: dict[str, int] = {}

    def add(self, name: str) -> int:
        """Intern ``name`` and return its id (existing id if already present)."""
        existing = self._ids.get(name)
        if existing is not None:
            return existing
        item = len(self._names)
        self._names.append(name)
        self._ids[name] = item
        return item

    def get(self, name: str) -> int | None:
        return self._ids.get(name)

    def id_of(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise DictionaryMismatchError(name) from None

    def name_of(self, item: int) -> str:
        try:
            return self._names[item]
        except IndexError:
            raise DictionaryMismatchError(item) from None

    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def __iter__(self) -> Iterator[int]:
        return iter(range(len(self._names)))


class TransactionDatabase:
    """The mined database: a list of item-id sets over an ItemDictionary."""

    def __init__(self, dictionary: ItemDictionary, transactions: Iterable[frozenset[int]]):
        self.dictionary = dictionary
        self.transactions: tuple[frozenset[int], ...] = tuple(
            frozenset(t) for t in transactions
        )
        n_items = len(dictionary)
        for t in self.transactions:
            for item in t:
                if not 0 <= item < n_items:
                    raise DictionaryMismatchError(item)

    @property
    def n_transactions(self) -> int:
        return len(self.transactions)

    @classmethod
    def from_transactions(cls, rows: Iterable[Iterable[str]]) -> "TransactionDatabase":
        """Build a database from token rows, interning tokens in appearance order.

        Duplicate tokens within a row collapse to one item (a transaction is a set).
        """
        dictionary = ItemDictionary()
        transactions = []
        for row in rows:
            transactions.append(frozenset(dictionary.add(tok) for tok in row))
        return cls(dictionary, transactions)


def parse_basket_file(stream: str | IO[str] | Iterable[str]) -> TransactionDatabase:
    """Parse newline-delimited, comma-separated basket data.

    One transaction per non-empty line; tokens are trimmed, empty tokens
    dropped, and duplicates within a line collapsed. Ids are assigned in order
    of first appearance. Nothing is fatal: an all-whitespace input yields an
    empty database.
    """
    if isinstance(stream, str):
        lines: Iterable[str] = stream.splitlines()
    else:
        lines = stream
    dictionary = ItemDictionary()
    transactions = []
    for line in lines:
        items = []
        for tok in line.rstrip("\n").split(","):
            tok = tok.strip()
            if tok:
                items.append(dictionary.add(tok))
        if items:
            transactions.append(frozenset(items))
    return TransactionDatabase(dictionary, transactions)


class FrequencyTable:
    """Per-item support counts, exact fractions and first-occurrence positions.

    Covers every item in the dictionary (items absent from all transactions
    carry count 0). The table fixes the canonical total order on items:
    descending support count, ties by ascending first occurrence, then by id.
    """

    def __init__(self, n_transactions: int, counts: dict[int, int], first_seen: dict[int, int]):
        self.n_transactions = n_transactions
        self._counts = dict(counts)
        self._first = dict(first_seen)
        ordered = sorted(self._counts, key=self.order_key)
        self._rank = {item: pos for pos, item in enumerate(ordered)}

    def count(self, item: int) -> int:
        try:
            return self._counts[item]
        except KeyError:
            raise DictionaryMismatchError(item) from None

    def fraction(self, item: int) -> float:
        if self.n_transactions == 0:
            return 0.0
        return self.count(item) / self.n_transactions

    def first_seen(self, item: int) -> int:
        try:
            return self._first[item]
        except KeyError:
            raise DictionaryMismatchError(item) from None

    def order_key(self, item: int) -> tuple[int, int, int]:
        return (-self._counts[item], self._first[item], item)

    def rank(self, item: int) -> int:
        """Position of ``item`` in the canonical total order (0 = most frequent)."""
        try:
            return self._rank[item]
        except KeyError:
            raise DictionaryMismatchError(item) from None

    def ranks(self) -> dict[int, int]:
        """The full item -> canonical rank map. Treat as read-only."""
        return self._rank

    def __contains__(self, item: int) -> bool:
        return item in self._counts

    def __len__(self) -> int:
        return len(self._counts)

    def __iter__(self) -> Iterator[int]:
        return iter(self._counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrequencyTable):
            return NotImplemented
        return (
            self.n_transactions == other.n_transactions
            and self._counts == other._counts
            and self._first == other._first
        )


def item_frequencies(db: TransactionDatabase) -> FrequencyTable:
    """Exact per-item counts, fractions and first-occurrence positions for ``db``."""
    counts = {item: 0 for item in db.dictionary}
    first: dict[int, int] = {}
    pos = 0
    for t in db.transactions:
        # Ascending id within a transaction reproduces token order for parsed
        # input: a new item's id is assigned at its first token.
        for item in sorted(t):
            counts[item] += 1
            if item not in first:
                first[item] = pos
            pos += 1
    for item in counts:
        first.setdefault(item, pos)  # zero-count items: order falls back to id
    return FrequencyTable(db.n_transactions, counts, first)


def support_count(itemset: Iterable[int], db: TransactionDatabase) -> int:
    """Number of transactions containing every item of ``itemset``."""
    s = frozenset(itemset)
    return sum(1 for t in db.transactions if s <= t)


def support(itemset: Iterable[int], db: TransactionDatabase) -> float:
    """Exact support fraction of ``itemset`` in ``db``; the brute-force oracle.

    The empty itemset has support 1.0 on any non-empty database; unknown items
    simply never match.
    """
    n = db.n_transactions
    if n == 0:
        return 0.0
    return support_count(itemset, db) / n


def canonical_order(itemset: Iterable[int], freq: FrequencyTable) -> tuple[int, ...]:
    """Sort an itemset into the canonical order fixed by ``freq``.

    Descending support count, ties broken by ascending first occurrence, then
    ascending id. Idempotent and permutation-invariant; every prefix of the
    result is itself in canonical order.
    """
    items = list(itemset)
    for item in items:
        if item not in freq:
            raise DictionaryMismatchError(item)
    items.sort(key=freq.order_key)
    return tuple(items)


@dataclass(frozen=True)
class FrequentItemset:
    """An itemset with its exact support, as produced by mining.

    ``items`` is stored in canonical order; ``count`` of ``n_transactions``
    gives the exact fraction.
    """

    items: tuple[int, ...]
    count: int
    n_transactions: int

    @property
    def support(self) -> float:
        return self.count / self.n_transactions

    @property
    def item_set(self) -> frozenset[int]:
        return frozenset(self.items)


@dataclass(frozen=True)
class MetricSet:
    """Support / Confidence / Lift triple for one rule.

    ``lift`` is None when the structure cannot justify a value (compound
    consequent whose itemset support is not on any root path).
    """

    support: float
    confidence: float
    lift: float | None


@dataclass(frozen=True)
class Rule:
    """An association rule: ordered antecedent -> ordered consequent with metrics."""

    antecedent: tuple[int, ...]
    consequent: tuple[int, ...]
    metrics: MetricSet

    def __post_init__(self):
        if not self.consequent:
            raise ValueError("a rule needs a non-empty consequent")
        if set(self.antecedent) & set(self.consequent):
            raise ValueError("antecedent and consequent must be disjoint")


class ProbeCounter:
    """Accumulates child-map or row probes for instrumented lookups."""

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0
