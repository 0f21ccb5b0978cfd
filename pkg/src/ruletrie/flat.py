"""Flat array-of-rows baseline: one rule per row, searched by linear scan.

Mirrors the tabular ruleset representation the trie is benchmarked against.
``from_trie`` guarantees both structures hold the identical rule population,
which is the precondition for any paired comparison.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable

from .errors import RuleNotFoundError
from .model import ProbeCounter, Rule
from .trie import RuleTrie, enumerate_rules


class Metric(Enum):
    SUPPORT = "support"
    CONFIDENCE = "confidence"


class FlatRuleTable:
    """Rules in insertion order; no two rows may share the same
    (antecedent set, consequent list) pair."""

    def __init__(self, rules: Iterable[Rule]):
        self.rows: list[Rule] = list(rules)
        self._keys = [(frozenset(r.antecedent), r.consequent) for r in self.rows]
        if len(set(self._keys)) != len(self._keys):
            raise ValueError("duplicate (antecedent, consequent) row")

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def from_trie(
    trie: RuleTrie,
    max_consequent_len: int = 1,
    min_antecedent_len: int = 0,
) -> FlatRuleTable:
    """One row per rule of ``enumerate_rules`` with the same parameters,
    metrics copied verbatim."""
    return FlatRuleTable(enumerate_rules(trie, max_consequent_len, min_antecedent_len))


def scan_lookup(
    table: FlatRuleTable,
    antecedent: Iterable[int],
    consequent: Iterable[int],
    probes: ProbeCounter | None = None,
) -> Rule:
    """Linear scan comparing the antecedent as a set and the consequent as a
    list; the probe count of a hit is the matched row's 1-based index."""
    key = (frozenset(antecedent), tuple(consequent))
    if probes is None:
        for row_key, rule in zip(table._keys, table.rows):
            if row_key == key:
                return rule
    else:
        for row_key, rule in zip(table._keys, table.rows):
            probes.count += 1
            if row_key == key:
                return rule
    raise RuleNotFoundError(message=f"no row for rule {key[0]!r} -> {key[1]!r}")


def sort_top_n(table: FlatRuleTable, metric: Metric, n: int) -> list[Rule]:
    """Full stable sort by the metric, descending; first n rows."""
    if n <= 0:
        return []
    if metric is Metric.SUPPORT:
        key = lambda rule: rule.metrics.support
    else:
        key = lambda rule: rule.metrics.confidence
    return sorted(table.rows, key=key, reverse=True)[:n]
