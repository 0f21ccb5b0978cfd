"""Prefix tree of association rules.

Every mined itemset is canonical-ordered and inserted as a root path; shared
prefixes overlay. Each non-root node then encodes one rule: the path above it
is the antecedent, the node's item the consequent. Nodes store exact support
counts; confidence and lift are derived on read, so equal rationals always
compare equal.

The trie is immutable once ``annotate_metrics`` has run; every query below is
read-only and safe for unrestricted concurrent use.
"""

from __future__ import annotations

import json
from heapq import heappop, heappush
from typing import IO, Iterable, Iterator

from .errors import (
    NotRepresentableError,
    RuleNotFoundError,
    TrieFormatError,
)
from .mining import MiningConfig, Mode, mine_frequent
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
)

JSON_FORMAT_VERSION = 1


class TrieNode:
    """One node of the rule trie. The root carries no item and no metrics."""

    __slots__ = ("item", "parent", "children", "depth", "support_count", "order_index", "trie")

    def __init__(self, item: int | None, parent: "TrieNode | None", depth: int):
        self.item = item
        self.parent = parent
        self.children: dict[int, TrieNode] = {}
        self.depth = depth
        self.support_count: int | None = None
        self.order_index: int | None = None
        self.trie: "RuleTrie | None" = None

    @property
    def is_root(self) -> bool:
        return self.parent is None

    def path_items(self) -> tuple[int, ...]:
        """Items along the root path ending at this node, in path order."""
        items = []
        node = self
        while node.parent is not None:
            items.append(node.item)
            node = node.parent
        items.reverse()
        return tuple(items)

    def _count(self) -> int:
        if self.support_count is None:
            raise RuntimeError("trie metrics not annotated; run annotate_metrics first")
        return self.support_count

    @property
    def support(self) -> float:
        """Support fraction of the full root path."""
        return self._count() / self.trie.n_transactions

    @property
    def confidence(self) -> float:
        """Support(path) / Support(parent path); the parent of a depth-1 node
        is the root, whose path support is 1."""
        return self._count() / self.parent._count()

    @property
    def lift(self) -> float:
        """Confidence divided by the support of this node's single item."""
        return self.confidence / self.trie.freq.fraction(self.item)


class RuleTrie:
    """The annotated prefix tree plus the tables needed to interpret it."""

    def __init__(
        self,
        root: TrieNode,
        freq: FrequencyTable,
        dictionary: ItemDictionary,
        n_transactions: int,
        mode: Mode,
    ):
        self.root = root
        self.freq = freq
        self.dictionary = dictionary
        self.n_transactions = n_transactions
        self.mode = mode
        self.node_count = 0
        self.annotated = False

    def nodes(self) -> Iterator[TrieNode]:
        """Preorder traversal of all non-root nodes, children in canonical rank order."""

        def walk(node: TrieNode) -> Iterator[TrieNode]:
            for child in node.children.values():
                yield child
                yield from walk(child)

        return walk(self.root)

    def structurally_equal(self, other: "RuleTrie") -> bool:
        """Deep equality: dictionary, frequency table, mode, and every node's
        item, support count and children."""
        if (
            self.n_transactions != other.n_transactions
            or self.mode is not other.mode
            or self.node_count != other.node_count
            or self.dictionary.names() != other.dictionary.names()
            or self.freq != other.freq
        ):
            return False

        def eq(a: TrieNode, b: TrieNode) -> bool:
            if a.item != b.item or a.support_count != b.support_count:
                return False
            if a.children.keys() != b.children.keys():
                return False
            return all(eq(a.children[k], b.children[k]) for k in a.children)

        return eq(self.root, other.root)


def _finalize_layout(trie: RuleTrie) -> None:
    """Sort every child map into canonical rank order and assign preorder indices."""
    rank = trie.freq.rank

    def sort_children(node: TrieNode) -> None:
        if len(node.children) > 1:
            node.children = dict(
                sorted(node.children.items(), key=lambda kv: rank(kv[0]))
            )
        for child in node.children.values():
            sort_children(child)

    sort_children(trie.root)
    for index, node in enumerate(trie.nodes()):
        node.order_index = index


def build_trie(
    itemsets: Iterable[FrequentItemset],
    freq: FrequencyTable,
    db: TransactionDatabase,
    mode: Mode = Mode.ALL,
) -> RuleTrie:
    """Insert each itemset as a canonical-ordered root path, overlaying shared
    prefixes. The result is independent of insertion order."""
    root = TrieNode(None, None, 0)
    trie = RuleTrie(root, freq, db.dictionary, db.n_transactions, mode)
    created = 0
    for fi in itemsets:
        node = root
        for item in canonical_order(fi.item_set, freq):
            child = node.children.get(item)
            if child is None:
                child = TrieNode(item, node, node.depth + 1)
                child.trie = trie
                node.children[item] = child
                created += 1
            node = child
    root.trie = trie
    root.support_count = db.n_transactions
    trie.node_count = created
    _finalize_layout(trie)
    return trie


def annotate_metrics(
    trie: RuleTrie,
    itemsets: Iterable[FrequentItemset],
    db: TransactionDatabase,
) -> RuleTrie:
    """Attach exact support counts to every node.

    In ALL mode every root path is a mined itemset, so counts come from the
    mining output (a missing path means the inputs do not belong together). In
    MAXIMAL mode prefix paths are not all mined, so counts come from one
    counting pass over the database.
    """
    if trie.mode is Mode.ALL:
        by_set = {fi.item_set: fi.count for fi in itemsets}
        for node in trie.nodes():
            count = by_set.get(frozenset(node.path_items()))
            if count is None:
                raise ValueError(
                    "no mined support for trie path "
                    f"{node.path_items()!r}; itemsets do not match this trie"
                )
            node.support_count = count
    else:
        for node in trie.nodes():
            node.support_count = 0
        for t in db.transactions:
            stack = [trie.root]
            while stack:
                node = stack.pop()
                for child in node.children.values():
                    if child.item in t:
                        child.support_count += 1
                        stack.append(child)
    trie.annotated = True
    return trie


def trie_from_database(db: TransactionDatabase, config: MiningConfig) -> RuleTrie:
    """Mine, build and annotate in one step."""
    itemsets = mine_frequent(db, config)
    freq = item_frequencies(db)
    trie = build_trie(itemsets, freq, db, config.mode)
    return annotate_metrics(trie, itemsets, db)


def _node_metrics(trie: RuleTrie, node: TrieNode) -> MetricSet:
    """MetricSet of a single node, computed with the same float expressions as
    the TrieNode properties (all query paths must agree bit-for-bit)."""
    count = node.support_count
    if count is None:
        raise RuntimeError("trie metrics not annotated; run annotate_metrics first")
    confidence = count / node.parent.support_count
    return MetricSet(
        count / trie.n_transactions,
        confidence,
        confidence / trie.freq.fraction(node.item),
    )


def node_rule(node: TrieNode) -> Rule:
    """The rule encoded by a single node: path above as antecedent, the node's
    item as consequent."""
    if node.is_root:
        raise ValueError("the root encodes no rule")
    path = node.path_items()
    return Rule(
        antecedent=path[:-1],
        consequent=(node.item,),
        metrics=_node_metrics(node.trie, node),
    )


def compound_confidence(trie: RuleTrie, path_nodes: Iterable[TrieNode]) -> float:
    """Product of the confidence values along a contiguous parent-child chain.

    Telescopes to Support(full path) / Support(path above the segment).
    """
    nodes = list(path_nodes)
    if not nodes:
        raise ValueError("empty consequent segment")
    for node in nodes:
        if node.is_root:
            raise ValueError("the root cannot be part of a consequent segment")
    for upper, lower in zip(nodes, nodes[1:]):
        if lower.parent is not upper:
            raise ValueError("nodes do not form a contiguous parent-child chain")
    product = 1.0
    for node in nodes:
        product *= node.confidence
    return product


def _walk_path(trie: RuleTrie, items: Iterable[int], probes: ProbeCounter | None) -> TrieNode | None:
    """Follow ``items`` from the root; None as soon as a child is missing."""
    node = trie.root
    for item in items:
        if probes is not None:
            probes.count += 1
        node = node.children.get(item)
        if node is None:
            return None
    return node


def _segment_rule(
    trie: RuleTrie,
    terminal: TrieNode,
    segment_len: int,
    probes: ProbeCounter | None = None,
) -> Rule:
    """Rule whose consequent is the ``segment_len`` path nodes ending at
    ``terminal`` and whose antecedent is the path above them."""
    path = terminal.path_items()
    antecedent = path[:-segment_len]
    consequent = path[-segment_len:]

    if segment_len == 1:
        return Rule(antecedent, consequent, _node_metrics(trie, terminal))

    segment = []
    node = terminal
    for _ in range(segment_len):
        segment.append(node)
        node = node.parent
    segment.reverse()
    confidence = compound_confidence(trie, segment)

    # A contiguous segment is already in canonical order, so its itemset
    # support is on a root path exactly when that path exists.
    consequent_node = _walk_path(trie, consequent, probes)
    if consequent_node is None:
        lift = None
    else:
        lift = confidence / consequent_node.support
    return Rule(antecedent, consequent, MetricSet(terminal.support, confidence, lift))


def lookup_rule(
    trie: RuleTrie,
    antecedent: Iterable[int],
    consequent: Iterable[int],
    probes: ProbeCounter | None = None,
) -> Rule:
    """Find the rule (antecedent -> consequent) as a trie path.

    The union is canonical-ordered; the rule is representable only if every
    antecedent item sorts strictly before every consequent item
    (NotRepresentableError otherwise), and found only if the ordered sequence
    is a root path (RuleNotFoundError otherwise). Both errors carry the
    offending item.

    Resolving the rule itself costs at most one child-map probe per item;
    compound consequents spend up to |consequent| further probes fetching the
    consequent itemset's support for lift.
    """
    ante = frozenset(antecedent)
    cons = tuple(consequent)
    if not cons:
        raise ValueError("consequent must be non-empty")
    cons_set = frozenset(cons)
    if len(cons_set) != len(cons):
        raise ValueError("duplicate items in consequent")
    if ante & cons_set:
        raise ValueError("antecedent and consequent must be disjoint")

    ranks = trie.freq.ranks()
    union = ante | cons_set
    for item in union:
        if item not in ranks:
            raise RuleNotFoundError(item)
    merged = sorted(union, key=ranks.__getitem__)
    for item in merged[: len(ante)]:
        if item not in ante:
            raise NotRepresentableError(item)

    node = trie.root
    for item in merged:
        if probes is not None:
            probes.count += 1
        node = node.children.get(item)
        if node is None:
            raise RuleNotFoundError(item)
    return _segment_rule(trie, node, len(cons), probes)


def enumerate_rules(
    trie: RuleTrie,
    max_consequent_len: int = 1,
    min_antecedent_len: int = 0,
) -> Iterator[Rule]:
    """Yield every rule whose consequent is a contiguous path segment of length
    <= max_consequent_len and whose antecedent is at least min_antecedent_len
    long. Deterministic: preorder over nodes (children by canonical rank),
    segment length ascending at each node."""
    if max_consequent_len < 1:
        raise ValueError("max_consequent_len must be >= 1")
    if min_antecedent_len < 0:
        raise ValueError("min_antecedent_len must be >= 0")
    for node in trie.nodes():
        longest = min(max_consequent_len, node.depth - min_antecedent_len)
        for segment_len in range(1, longest + 1):
            yield _segment_rule(trie, node, segment_len)


def top_n_by_support(trie: RuleTrie, n: int) -> list[Rule]:
    """The n node-rules with highest support.

    Best-first traversal: a node's subtree cannot beat the node's own support
    (anti-monotonicity), so only children of emitted nodes are ever pushed.
    Ties break by preorder enumeration position.
    """
    if n <= 0:
        return []
    heap: list[tuple[int, int, TrieNode]] = []
    for child in trie.root.children.values():
        heappush(heap, (-child._count(), child.order_index, child))
    out: list[Rule] = []
    while heap and len(out) < n:
        _, _, node = heappop(heap)
        out.append(node_rule(node))
        for child in node.children.values():
            heappush(heap, (-child._count(), child.order_index, child))
    return out


def top_n_by_confidence(trie: RuleTrie, n: int) -> list[Rule]:
    """The n node-rules with highest confidence, by full traversal.

    Confidence is not monotone along paths, so nothing can be pruned. Ties
    break by preorder enumeration position.
    """
    if n <= 0:
        return []
    ranked = sorted(
        trie.nodes(), key=lambda node: (-node.confidence, node.order_index)
    )
    return [node_rule(node) for node in ranked[:n]]


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(trie: RuleTrie) -> str:
    """Graphviz digraph of the trie; the root is labeled "null" and every other
    node carries its item name plus the three metrics at 4 decimal places."""
    lines = ["digraph ruletrie {", "  node [shape=box];", '  n0 [label="null"];']
    for node in trie.nodes():
        node_id = node.order_index + 1
        parent_id = 0 if node.parent.is_root else node.parent.order_index + 1
        name = _dot_escape(trie.dictionary.name_of(node.item))
        label = (
            f"{name}\\nsup={node.support:.4f} conf={node.confidence:.4f} "
            f"lift={node.lift:.4f}"
        )
        lines.append(f'  n{node_id} [label="{label}"];')
        lines.append(f"  n{parent_id} -> n{node_id};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_json(trie: RuleTrie) -> str:
    """Serialize the annotated trie: format version, item dictionary with
    frequency data, transaction count, and a node array with child indices."""
    if trie.node_count and not trie.annotated:
        raise RuntimeError("annotate the trie before exporting it")
    items = [
        {
            "id": item,
            "name": trie.dictionary.name_of(item),
            "count": trie.freq.count(item),
            "first_seen": trie.freq.first_seen(item),
        }
        for item in trie.dictionary
    ]
    index_of = {id(trie.root): 0}
    ordered = list(trie.nodes())
    for node in ordered:
        index_of[id(node)] = node.order_index + 1
    nodes = [
        {
            "item": None,
            "count": trie.root.support_count,
            "children": [index_of[id(c)] for c in trie.root.children.values()],
        }
    ]
    for node in ordered:
        nodes.append(
            {
                "item": node.item,
                "count": node.support_count,
                "children": [index_of[id(c)] for c in node.children.values()],
            }
        )
    doc = {
        "format_version": JSON_FORMAT_VERSION,
        "mode": trie.mode.value,
        "n_transactions": trie.n_transactions,
        "items": items,
        "nodes": nodes,
    }
    return json.dumps(doc, indent=2) + "\n"


def import_json(stream: str | IO[str]) -> RuleTrie:
    """Rebuild a trie from ``export_json`` output.

    Raises TrieFormatError on malformed or version-mismatched documents; never
    returns a partial trie.
    """
    text = stream if isinstance(stream, str) else stream.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TrieFormatError(f"not a valid trie document: {exc}") from exc
    if not isinstance(doc, dict):
        raise TrieFormatError("not a valid trie document: top level must be an object")
    version = doc.get("format_version")
    if version != JSON_FORMAT_VERSION:
        raise TrieFormatError(
            f"unsupported format version {version!r} (expected {JSON_FORMAT_VERSION})"
        )
    try:
        mode = Mode(doc["mode"])
        n_transactions = int(doc["n_transactions"])
        item_entries = doc["items"]
        node_entries = doc["nodes"]
    except (KeyError, ValueError, TypeError) as exc:
        raise TrieFormatError(f"missing or malformed field: {exc}") from exc
    if not isinstance(node_entries, list) or not node_entries:
        raise TrieFormatError("node array must be non-empty")

    dictionary = ItemDictionary()
    counts: dict[int, int] = {}
    first_seen: dict[int, int] = {}
    try:
        for expected_id, entry in enumerate(sorted(item_entries, key=lambda e: e["id"])):
            if entry["id"] != expected_id:
                raise TrieFormatError("item ids must be dense")
            if dictionary.add(entry["name"]) != expected_id:
                raise TrieFormatError("item names must be unique")
            counts[expected_id] = int(entry["count"])
            first_seen[expected_id] = int(entry["first_seen"])
    except (KeyError, TypeError) as exc:
        raise TrieFormatError(f"malformed item entry: {exc}") from exc
    freq = FrequencyTable(n_transactions, counts, first_seen)

    root_entry = node_entries[0]
    if root_entry.get("item") is not None:
        raise TrieFormatError("node 0 must be the root (item null)")
    root = TrieNode(None, None, 0)
    trie = RuleTrie(root, freq, dictionary, n_transactions, mode)
    root.trie = trie
    root.support_count = int(root_entry["count"])

    built: dict[int, TrieNode] = {0: root}
    claimed: set[int] = set()

    def attach(parent: TrieNode, entry_index: int) -> None:
        if not 0 < entry_index < len(node_entries):
            raise TrieFormatError(f"child index {entry_index} out of range")
        if entry_index in claimed:
            raise TrieFormatError(f"node {entry_index} has two parents")
        claimed.add(entry_index)
        entry = node_entries[entry_index]
        try:
            item = int(entry["item"])
            count = int(entry["count"])
            children = entry["children"]
        except (KeyError, TypeError) as exc:
            raise TrieFormatError(f"malformed node entry: {exc}") from exc
        if item not in freq:
            raise TrieFormatError(f"node {entry_index} references unknown item {item}")
        node = TrieNode(item, parent, parent.depth + 1)
        node.trie = trie
        node.support_count = count
        if item in parent.children:
            raise TrieFormatError("duplicate child item under one node")
        parent.children[item] = node
        built[entry_index] = node
        for child_index in children:
            attach(node, child_index)

    for child_index in root_entry.get("children", []):
        attach(root, child_index)
    if len(built) != len(node_entries):
        raise TrieFormatError("unreachable nodes in document")

    trie.node_count = len(node_entries) - 1
    _finalize_layout(trie)
    trie.annotated = True
    return trie
