"""ruletrie: prefix-tree storage and fast lookup for association rules.

Frequent itemsets mined from a transaction database are canonical-ordered and
overlaid into one trie; every node encodes a rule (path above = antecedent,
node item = consequent) with exact Support, Confidence and Lift. A flat
array-of-rows baseline and a paired timing harness reproduce the classic
trie-vs-table lookup comparison.
"""

from .bench import (
    BenchReport,
    SweepRecord,
    paired_t_test,
    support_sweep,
    sweep_to_csv,
    time_lookup_suite,
)
from .errors import (
    DictionaryMismatchError,
    NotRepresentableError,
    RuleNotFoundError,
    RuleTrieError,
    TrieFormatError,
)
from .flat import FlatRuleTable, Metric, from_trie, scan_lookup, sort_top_n
from .mining import (
    MiningConfig,
    Mode,
    brute_force_frequent,
    maximal_filter,
    mine_frequent,
)
from .model import (
    FrequencyTable,
    FrequentItemset,
    ItemDictionary,
    MetricSet,
    ProbeCounter,
    Rule,
    TransactionDatabase,
    canonical_order,
    item_frequencies,
    parse_basket_file,
    support,
    support_count,
)
from .trie import (
    RuleTrie,
    TrieNode,
    annotate_metrics,
    build_trie,
    compound_confidence,
    enumerate_rules,
    export_dot,
    export_json,
    import_json,
    lookup_rule,
    node_rule,
    top_n_by_confidence,
    top_n_by_support,
    trie_from_database,
)

__version__ = "0.1.0"

__all__ = [
    "BenchReport",
    "DictionaryMismatchError",
    "FlatRuleTable",
    "FrequencyTable",
    "FrequentItemset",
    "ItemDictionary",
    "Metric",
    "MetricSet",
    "MiningConfig",
    "Mode",
    "NotRepresentableError",
    "ProbeCounter",
    "Rule",
    "RuleNotFoundError",
    "RuleTrie",
    "RuleTrieError",
    "SweepRecord",
    "TransactionDatabase",
    "TrieFormatError",
    "TrieNode",
    "annotate_metrics",
    "brute_force_frequent",
    "build_trie",
    "canonical_order",
    "compound_confidence",
    "enumerate_rules",
    "export_dot",
    "export_json",
    "import_json",
    "item_frequencies",
    "lookup_rule",
    "maximal_filter",
    "mine_frequent",
    "node_rule",
    "paired_t_test",
    "parse_basket_file",
    "scan_lookup",
    "sort_top_n",
    "support",
    "support_count",
    "support_sweep",
    "sweep_to_csv",
    "time_lookup_suite",
    "top_n_by_confidence",
    "top_n_by_support",
    "from_trie",
    "trie_from_database",
]
