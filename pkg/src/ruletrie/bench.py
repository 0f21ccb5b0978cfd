"""Timing harness, paired t-test, and threshold sweeps.

The comparison is paired by rule: for every rule in the shared population the
same lookup runs against the trie and against the flat table, the monotonic
clock read around each call. Wall-clock conclusions are directional only; the
deterministic probe counts carry the asymptotic claim on noisy machines.

Benchmark runs are strictly single-threaded; reports are immutable.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from .flat import FlatRuleTable, scan_lookup
from .mining import MiningConfig, Mode, mine_frequent
from .model import ProbeCounter, TransactionDatabase, item_frequencies
from .trie import RuleTrie, annotate_metrics, build_trie, lookup_rule

# Two-sided critical values of Student's t at alpha = 0.05, by degrees of
# freedom; the normal approximation 1.96 applies beyond df = 30.
T_CRITICAL_05 = {
    1: 12.706, 2: 4.303, 3: 3.182, 4: 2.776, 5: 2.571,
    6: 2.447, 7: 2.365, 8: 2.306, 9: 2.262, 10: 2.228,
    11: 2.201, 12: 2.179, 13: 2.160, 14: 2.145, 15: 2.131,
    16: 2.120, 17: 2.110, 18: 2.101, 19: 2.093, 20: 2.086,
    21: 2.080, 22: 2.074, 23: 2.069, 24: 2.064, 25: 2.060,
    26: 2.056, 27: 2.052, 28: 2.048, 29: 2.045, 30: 2.042,
}

SMALL_SAMPLE_FLOOR = 30


def paired_t_test(diffs: Sequence[float]) -> tuple[float, bool]:
    """t statistic of paired differences and its two-sided 0.05 verdict.

    t = mean / (sd / sqrt(n)) with the n-1 denominator in sd. Degenerate
    samples (fewer than two values, or zero variance) are errors.
    """
    n = len(diffs)
    if n < 2:
        raise ValueError("paired t-test needs at least two differences")
    mean = sum(diffs) / n
    variance = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if variance <= 0.0:
        raise ValueError("zero variance: degenerate paired sample")
    t = mean / math.sqrt(variance / n)
    df = n - 1
    critical = T_CRITICAL_05.get(df, 1.96)
    return t, abs(t) > critical


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def _sd(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    m = _mean(values)
    return math.sqrt(sum((v - m) ** 2 for v in values) / (len(values) - 1))


@dataclass(frozen=True)
class BenchReport:
    """Paired per-rule timings and probe counts for trie vs flat lookups."""

    trie_ns: tuple[float, ...]
    flat_ns: tuple[float, ...]
    trie_probes: tuple[int, ...]
    flat_probes: tuple[int, ...]
    reps: int
    warmup: int
    t_statistic: float
    significant_at_0_05: bool
    small_sample: bool
    p_value_note: str

    @property
    def n_rules(self) -> int:
        return len(self.trie_ns)

    @property
    def trie_mean_ns(self) -> float:
        return _mean(self.trie_ns)

    @property
    def flat_mean_ns(self) -> float:
        return _mean(self.flat_ns)

    @property
    def trie_sd_ns(self) -> float:
        return _sd(self.trie_ns)

    @property
    def flat_sd_ns(self) -> float:
        return _sd(self.flat_ns)

    @property
    def speedup(self) -> float:
        return self.flat_mean_ns / self.trie_mean_ns

    def to_csv(self) -> str:
        """One row per rule plus a summary footer (footer lines start with '#')."""
        lines = ["rule_index,trie_ns,flat_ns,trie_probes,flat_probes"]
        for i in range(self.n_rules):
            lines.append(
                f"{i},{self.trie_ns[i]!r},{self.flat_ns[i]!r},"
                f"{self.trie_probes[i]},{self.flat_probes[i]}"
            )
        lines.append(
            f"# rules={self.n_rules} reps={self.reps} warmup={self.warmup}"
        )
        lines.append(
            f"# trie_mean_ns={self.trie_mean_ns!r} trie_sd_ns={self.trie_sd_ns!r}"
        )
        lines.append(
            f"# flat_mean_ns={self.flat_mean_ns!r} flat_sd_ns={self.flat_sd_ns!r}"
        )
        verdict = "yes" if self.significant_at_0_05 else "no"
        caveat = " (small sample, informational)" if self.small_sample else ""
        lines.append(
            f"# speedup={self.speedup!r} t_statistic={self.t_statistic!r} "
            f"significant_at_0.05={verdict}{caveat} [{self.p_value_note}]"
        )
        return "\n".join(lines) + "\n"


def time_lookup_suite(
    trie: RuleTrie,
    table: FlatRuleTable,
    reps: int,
    warmup: int = 3,
) -> BenchReport:
    """Time every rule of the shared population against both structures.

    Each rule is looked up ``warmup`` times unrecorded, then ``reps`` times
    with the monotonic clock read per lookup; per-rule means feed the paired
    t-test on (flat - trie) differences.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if warmup < 0:
        raise ValueError("warmup must be >= 0")
    if len(table) == 0:
        raise ValueError("empty rule population")

    queries = [(set(rule.antecedent), list(rule.consequent)) for rule in table.rows]

    trie_ns: list[float] = []
    flat_ns: list[float] = []
    trie_probes: list[int] = []
    flat_probes: list[int] = []
    clock = time.perf_counter_ns

    for ante, cons in queries:
        counter = ProbeCounter()
        lookup_rule(trie, ante, cons, probes=counter)
        trie_probes.append(counter.count)
        for _ in range(warmup):
            lookup_rule(trie, ante, cons)
        total = 0
        for _ in range(reps):
            start = clock()
            lookup_rule(trie, ante, cons)
            total += clock() - start
        trie_ns.append(total / reps)

        counter = ProbeCounter()
        scan_lookup(table, ante, cons, probes=counter)
        flat_probes.append(counter.count)
        for _ in range(warmup):
            scan_lookup(table, ante, cons)
        total = 0
        for _ in range(reps):
            start = clock()
            scan_lookup(table, ante, cons)
            total += clock() - start
        flat_ns.append(total / reps)

    diffs = [f - t for f, t in zip(flat_ns, trie_ns)]
    try:
        t_stat, significant = paired_t_test(diffs)
        note = f"two-sided, df={len(diffs) - 1}, alpha=0.05"
    except ValueError as exc:
        t_stat, significant = float("nan"), False
        note = f"t-test unavailable: {exc}"
    return BenchReport(
        trie_ns=tuple(trie_ns),
        flat_ns=tuple(flat_ns),
        trie_probes=tuple(trie_probes),
        flat_probes=tuple(flat_probes),
        reps=reps,
        warmup=warmup,
        t_statistic=t_stat,
        significant_at_0_05=significant,
        small_sample=len(diffs) < SMALL_SAMPLE_FLOOR,
        p_value_note=note,
    )


@dataclass(frozen=True)
class SweepRecord:
    """Mining / construction outcome at one support threshold."""

    min_support: float
    itemset_count: int
    node_count: int
    build_ms: float
    annotate_ms: float


def support_sweep(
    db: TransactionDatabase,
    thresholds: Iterable[float],
    mode: Mode = Mode.ALL,
) -> list[SweepRecord]:
    """Mine and build at each threshold of a strictly descending ladder,
    recording exact counts and wall-clock build/annotate times."""
    ladder = list(thresholds)
    for upper, lower in zip(ladder, ladder[1:]):
        if lower >= upper:
            raise ValueError("thresholds must be strictly descending")
    if not ladder:
        return []

    freq = item_frequencies(db)
    records = []
    for threshold in ladder:
        config = MiningConfig(threshold, mode)
        itemsets = mine_frequent(db, config)
        start = time.perf_counter()
        trie = build_trie(itemsets, freq, db, mode)
        build_ms = (time.perf_counter() - start) * 1e3
        start = time.perf_counter()
        annotate_metrics(trie, itemsets, db)
        annotate_ms = (time.perf_counter() - start) * 1e3
        records.append(
            SweepRecord(threshold, len(itemsets), trie.node_count, build_ms, annotate_ms)
        )
    return records


def sweep_to_csv(records: Sequence[SweepRecord]) -> str:
    lines = ["threshold,itemset_count,node_count,build_ms,annotate_ms"]
    for rec in records:
        lines.append(
            f"{rec.min_support!r},{rec.itemset_count},{rec.node_count},"
            f"{rec.build_ms!r},{rec.annotate_ms!r}"
        )
    return "\n".join(lines) + "\n"
