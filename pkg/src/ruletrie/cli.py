"""Command-line interface.

Subcommands: mine, build, query, top, enumerate, bench, sweep, export-dot,
synth. Every run is deterministic given its input file, flags and seed;
CSV bodies are byte-identical across identical invocations (timing columns
aside). Exit codes are stable so pipelines can branch on them:

    0  success
    2  usage error (bad flags, thresholds out of range, malformed query)
    3  I/O error (unreadable input, missing columns, bad file format)
    4  rule not found
    5  rule not representable as a trie path
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from collections import Counter
from typing import IO, Iterable

from .bench import support_sweep, sweep_to_csv, time_lookup_suite
from .datasets import synthetic_baskets, write_basket
from .errors import (
    DictionaryMismatchError,
    NotRepresentableError,
    RuleNotFoundError,
    TrieFormatError,
)
from .flat import Metric, from_trie, sort_top_n
from .mining import MiningConfig, Mode, mine_frequent
from .model import Rule, TransactionDatabase, item_frequencies, parse_basket_file
from .trie import (
    annotate_metrics,
    build_trie,
    enumerate_rules,
    export_dot,
    export_json,
    lookup_rule,
    top_n_by_confidence,
    top_n_by_support,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NOT_FOUND = 4
EXIT_NOT_REPRESENTABLE = 5


def parse_retail_csv(
    stream: Iterable[str],
    invoice_col: str = "InvoiceNo",
    item_col: str = "Description",
) -> TransactionDatabase:
    """Group invoice-log rows into one transaction per invoice id.

    Item tokens are trimmed, blank descriptions dropped, duplicates per
    invoice collapsed. Missing configured columns are an error naming them.
    """
    reader = csv.DictReader(stream)
    fields = reader.fieldnames or []
    missing = [col for col in (invoice_col, item_col) if col not in fields]
    if missing:
        raise ValueError(f"retail CSV is missing required column(s): {', '.join(missing)}")
    baskets: dict[str, list[str]] = {}
    for row in reader:
        invoice = row.get(invoice_col)
        item = (row.get(item_col) or "").strip()
        if invoice is None or not item:
            continue
        baskets.setdefault(invoice, []).append(item)
    return TransactionDatabase.from_transactions(baskets.values())


def _load_database(args) -> TransactionDatabase:
    with open(args.input, "r", encoding="utf-8", newline="") as fp:
        if args.format == "retail-csv":
            return parse_retail_csv(fp, args.invoice_col, args.item_col)
        return parse_basket_file(fp)


def _build_annotated(db: TransactionDatabase, args):
    config = MiningConfig(args.min_support, Mode(args.mode))
    itemsets = mine_frequent(db, config)
    freq = item_frequencies(db)
    start = time.perf_counter()
    trie = build_trie(itemsets, freq, db, config.mode)
    build_ms = (time.perf_counter() - start) * 1e3
    start = time.perf_counter()
    annotate_metrics(trie, itemsets, db)
    annotate_ms = (time.perf_counter() - start) * 1e3
    return trie, itemsets, build_ms, annotate_ms


def _out_stream(path: str | None) -> tuple[IO[str], bool]:
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _write(path: str | None, text: str) -> None:
    fp, owned = _out_stream(path)
    try:
        fp.write(text)
    finally:
        if owned:
            fp.close()


def _names(dictionary, items: Iterable[int]) -> str:
    return "|".join(dictionary.name_of(i) for i in items)


def _rule_rows(dictionary, rules: Iterable[Rule]) -> list[list[str]]:
    rows = []
    for rule in rules:
        lift = rule.metrics.lift
        rows.append(
            [
                _names(dictionary, rule.antecedent),
                _names(dictionary, rule.consequent),
                repr(rule.metrics.support),
                repr(rule.metrics.confidence),
                "" if lift is None else repr(lift),
            ]
        )
    return rows


def _write_csv(path: str | None, header: list[str], rows: list[list[str]]) -> None:
    fp, owned = _out_stream(path)
    try:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if owned:
            fp.close()


def _resolve_top_n(text: str, population: int) -> int:
    """Absolute integer, or 'P%' of the population rounded up so a small
    ruleset never yields zero rows."""
    if text.endswith("%"):
        pct = float(text[:-1])
        if not 0.0 < pct <= 100.0:
            raise ValueError(f"percentage top-n must lie in (0, 100], got {text}")
        return math.ceil(pct / 100.0 * population)
    n = int(text)
    if n < 0:
        raise ValueError("top-n must be non-negative")
    return n


def _parse_tokens(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _token_ids(db: TransactionDatabase, tokens: list[str]) -> list[int]:
    ids = []
    for tok in tokens:
        item = db.dictionary.get(tok)
        if item is None:
            raise RuleNotFoundError(tok, f"item not in dictionary: {tok!r}")
        ids.append(item)
    return ids


def cmd_mine(args) -> int:
    db = _load_database(args)
    itemsets = mine_frequent(db, MiningConfig(args.min_support, Mode(args.mode)))
    rows = [
        [_names(db.dictionary, fi.items), repr(fi.support), str(fi.count)]
        for fi in itemsets
    ]
    _write_csv(args.output, ["items", "support", "count"], rows)
    return EXIT_OK


def cmd_build(args) -> int:
    db = _load_database(args)
    trie, _, build_ms, annotate_ms = _build_annotated(db, args)
    document = export_json(trie)
    if args.output and args.output != "-":
        _write(args.output, document)
        print(f"nodes={trie.node_count} build_ms={build_ms:.3f} annotate_ms={annotate_ms:.3f}")
    else:
        sys.stdout.write(document)
        print(
            f"nodes={trie.node_count} build_ms={build_ms:.3f} annotate_ms={annotate_ms:.3f}",
            file=sys.stderr,
        )
    return EXIT_OK


def _named_item(db: TransactionDatabase, item) -> str:
    if isinstance(item, int) and 0 <= item < len(db.dictionary):
        return db.dictionary.name_of(item)
    return repr(item)


def cmd_query(args) -> int:
    db = _load_database(args)
    trie, _, _, _ = _build_annotated(db, args)
    antecedent = _token_ids(db, _parse_tokens(args.antecedent))
    consequent = _token_ids(db, _parse_tokens(args.consequent))
    if not consequent:
        raise ValueError("consequent must name at least one item")
    try:
        rule = lookup_rule(trie, antecedent, consequent)
    except NotRepresentableError as exc:
        raise NotRepresentableError(
            exc.item,
            f"rule not representable: item {_named_item(db, exc.item)} "
            "sorts into the antecedent span",
        ) from None
    except RuleNotFoundError as exc:
        raise RuleNotFoundError(
            exc.item, f"rule not found (missing item: {_named_item(db, exc.item)})"
        ) from None
    ante = "{" + ",".join(db.dictionary.name_of(i) for i in rule.antecedent) + "}"
    cons = "{" + ",".join(db.dictionary.name_of(i) for i in rule.consequent) + "}"
    lift = "unavailable" if rule.metrics.lift is None else f"{rule.metrics.lift:.4f}"
    print(
        f"{ante} -> {cons} support={rule.metrics.support:.4f} "
        f"confidence={rule.metrics.confidence:.4f} lift={lift}"
    )
    return EXIT_OK


def cmd_top(args) -> int:
    db = _load_database(args)
    trie, _, _, _ = _build_annotated(db, args)
    metric = Metric(args.metric)
    n = _resolve_top_n(args.top_n, trie.node_count)
    if metric is Metric.SUPPORT:
        rules = top_n_by_support(trie, n)
    else:
        rules = top_n_by_confidence(trie, n)
    if args.cross_check:
        table = from_trie(trie, max_consequent_len=1, min_antecedent_len=0)
        flat_rules = sort_top_n(table, metric, n)
        key = (
            (lambda r: (r.antecedent, r.consequent, r.metrics.support))
            if metric is Metric.SUPPORT
            else (lambda r: (r.antecedent, r.consequent, r.metrics.confidence))
        )
        if Counter(map(key, rules)) != Counter(map(key, flat_rules)):
            print("cross-check failed: trie and flat top-n differ", file=sys.stderr)
            return 1
    _write_csv(
        args.output,
        ["antecedent", "consequent", "support", "confidence", "lift"],
        _rule_rows(db.dictionary, rules),
    )
    return EXIT_OK


def cmd_enumerate(args) -> int:
    db = _load_database(args)
    trie, _, _, _ = _build_annotated(db, args)
    rules = enumerate_rules(trie, args.max_consequent, args.min_antecedent)
    _write_csv(
        args.output,
        ["antecedent", "consequent", "support", "confidence", "lift"],
        _rule_rows(db.dictionary, rules),
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    db = _load_database(args)
    trie, _, _, _ = _build_annotated(db, args)
    table = from_trie(trie, args.max_consequent, args.min_antecedent)
    report = time_lookup_suite(trie, table, reps=args.reps, warmup=args.warmup)
    _write(args.output, report.to_csv())
    verdict = "yes" if report.significant_at_0_05 else "no"
    caveat = " (small sample, informational)" if report.small_sample else ""
    print(
        f"rules={report.n_rules} trie_mean_ns={report.trie_mean_ns:.0f} "
        f"flat_mean_ns={report.flat_mean_ns:.0f} speedup={report.speedup:.2f}x "
        f"t={report.t_statistic:.4f} significant={verdict}{caveat}"
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    db = _load_database(args)
    thresholds = [float(tok) for tok in _parse_tokens(args.min_support_list)]
    records = support_sweep(db, thresholds, Mode(args.mode))
    _write(args.output, sweep_to_csv(records))
    return EXIT_OK


def cmd_export_dot(args) -> int:
    db = _load_database(args)
    trie, _, _, _ = _build_annotated(db, args)
    _write(args.output, export_dot(trie))
    return EXIT_OK


def cmd_synth(args) -> int:
    rows = synthetic_baskets(args.transactions, args.items, args.seed)
    fp, owned = _out_stream(args.output)
    try:
        write_basket(rows, fp)
    finally:
        if owned:
            fp.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruletrie",
        description="Mine frequent itemsets, store rules in a prefix trie, query and benchmark them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, input_required=True):
        p.add_argument("--input", required=input_required, help="input data file")
        p.add_argument(
            "--format",
            choices=["basket", "retail-csv"],
            default="basket",
            help="input format (default: basket)",
        )
        p.add_argument("--invoice-col", default="InvoiceNo")
        p.add_argument("--item-col", default="Description")
        p.add_argument("--output", default=None, help="output path (default: stdout)")

    def add_mining(p):
        p.add_argument("--min-support", type=float, default=0.005)
        p.add_argument("--mode", choices=["all", "maximal"], default="all")

    p = sub.add_parser("mine", help="write frequent itemsets as CSV")
    add_io(p)
    add_mining(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("build", help="build the annotated trie and write it as JSON")
    add_io(p)
    add_mining(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="look one rule up in the trie")
    add_io(p)
    add_mining(p)
    p.add_argument("antecedent", help="comma-separated antecedent items (may be empty)")
    p.add_argument("consequent", help="comma-separated consequent items")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("top", help="top-N node-rules by a metric, as CSV")
    add_io(p)
    add_mining(p)
    p.add_argument("--top-n", default="10%", help="row count or percentage like '10%%'")
    p.add_argument("--metric", choices=["support", "confidence"], default="support")
    p.add_argument(
        "--cross-check",
        action="store_true",
        help="verify the result against a flat-table sort; fail loudly on mismatch",
    )
    p.set_defaults(func=cmd_top)

    p = sub.add_parser("enumerate", help="write every stored rule as CSV")
    add_io(p)
    add_mining(p)
    p.add_argument("--max-consequent", type=int, default=1)
    p.add_argument("--min-antecedent", type=int, default=0)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("bench", help="paired trie-vs-flat lookup timing over the full ruleset")
    add_io(p)
    add_mining(p)
    p.add_argument("--max-consequent", type=int, default=1)
    p.add_argument("--min-antecedent", type=int, default=0)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--warmup", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="mine and build across a descending threshold ladder")
    add_io(p)
    p.add_argument("--mode", choices=["all", "maximal"], default="all")
    p.add_argument(
        "--min-support",
        dest="min_support_list",
        required=True,
        help="comma-separated strictly descending thresholds, e.g. 0.0135,0.009,0.005",
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export-dot", help="write the trie as a Graphviz digraph")
    add_io(p)
    add_mining(p)
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("synth", help="write a seeded synthetic basket dataset")
    p.add_argument("--output", default=None, help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=9834)
    p.add_argument("--transactions", type=int, default=9835)
    p.add_argument("--items", type=int, default=169)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NotRepresentableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_REPRESENTABLE
    except RuleNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except (TrieFormatError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, DictionaryMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
