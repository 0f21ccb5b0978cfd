"""Rule trie: construction, annotation, queries, exports, invariants."""

import random

import pytest

from conftest import ids_of, make_trie, names_of, random_database
from ruletrie.errors import (
    DictionaryMismatchError,
    NotRepresentableError,
    RuleNotFoundError,
    TrieFormatError,
)
from ruletrie.mining import MiningConfig, Mode, mine_frequent
from ruletrie.model import (
    FrequentItemset,
    ProbeCounter,
    item_frequencies,
    support,
)
from ruletrie.trie import (
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
)

APPROX = 1e-9


def node_by_path(trie, db, tokens: str):
    node = trie.root
    for item in ids_of(db, tokens):
        node = node.children[item]
    return node


def random_trie(rng, mode):
    db = random_database(rng)
    trie, itemsets = make_trie(db, rng.uniform(0.1, 0.5), mode)
    return db, trie, itemsets


class TestBuildTrie:
    def test_fix1_maximal_structure(self, fix1_db, fix1_maximal_trie):
        trie = fix1_maximal_trie
        assert trie.node_count == 8
        root_children = names_of(fix1_db, trie.root.children)
        assert root_children == ("f", "c")
        chain = node_by_path(trie, fix1_db, "f,c,a,m,p")
        assert chain.depth == 5
        assert names_of(fix1_db, node_by_path(trie, fix1_db, "f").children) == ("c", "b")
        assert names_of(fix1_db, node_by_path(trie, fix1_db, "c").children) == ("b",)

    def test_fix1_all_mode_node_count(self, fix1_db, fix1_all_trie):
        itemsets = mine_frequent(fix1_db, MiningConfig(0.3, Mode.ALL))
        assert fix1_all_trie.node_count == len(itemsets) == 34

    def test_empty_itemset_list(self, fix1_db, fix1_freq):
        trie = build_trie([], fix1_freq, fix1_db)
        assert trie.node_count == 0
        assert trie.root.children == {}

    def test_unknown_item_rejected(self, fix1_db, fix1_freq):
        bogus = FrequentItemset(items=(999,), count=1, n_transactions=5)
        with pytest.raises(DictionaryMismatchError):
            build_trie([bogus], fix1_freq, fix1_db)

    def test_depths_and_parents(self, fix1_maximal_trie):
        for node in fix1_maximal_trie.nodes():
            assert node.depth == node.parent.depth + 1


class TestAnnotateMetrics:
    def test_fix1_node_metric_table(self, fix1_db, fix1_maximal_trie):
        expected = {
            "f": (4 / 5, 4 / 5, 1.0),
            "f,c": (3 / 5, (3 / 5) / (4 / 5), ((3 / 5) / (4 / 5)) / (4 / 5)),
            "f,c,a": (3 / 5, 1.0, 1.0 / (3 / 5)),
            "f,c,a,m": (3 / 5, 1.0, 1.0 / (3 / 5)),
            "f,c,a,m,p": (2 / 5, (2 / 5) / (3 / 5), ((2 / 5) / (3 / 5)) / (3 / 5)),
            "f,b": (2 / 5, (2 / 5) / (4 / 5), ((2 / 5) / (4 / 5)) / (3 / 5)),
            "c": (4 / 5, 4 / 5, 1.0),
            "c,b": (2 / 5, (2 / 5) / (4 / 5), ((2 / 5) / (4 / 5)) / (3 / 5)),
        }
        for path, (sup, conf, lift) in expected.items():
            node = node_by_path(fix1_maximal_trie, fix1_db, path)
            assert node.support == pytest.approx(sup, abs=APPROX)
            assert node.confidence == pytest.approx(conf, abs=APPROX)
            assert node.lift == pytest.approx(lift, abs=APPROX)

    def test_named_spec_values(self, fix1_db, fix1_maximal_trie):
        a = node_by_path(fix1_maximal_trie, fix1_db, "f,c,a")
        assert (a.support, a.confidence) == (0.6, 1.0)
        assert a.lift == pytest.approx(1.6667, abs=5e-5)
        p = node_by_path(fix1_maximal_trie, fix1_db, "f,c,a,m,p")
        assert p.support == pytest.approx(0.4, abs=APPROX)
        assert p.confidence == pytest.approx(0.6667, abs=5e-5)
        assert p.lift == pytest.approx(1.1111, abs=5e-5)

    def test_depth_one_rule_has_unit_lift(self, fix1_db, fix1_maximal_trie):
        f = node_by_path(fix1_maximal_trie, fix1_db, "f")
        assert f.support == f.confidence == 0.8
        assert f.lift == 1.0

    def test_all_mode_missing_support_is_corrupt_input(self, fix1_db, fix1_freq):
        itemsets = mine_frequent(fix1_db, MiningConfig(0.3, Mode.ALL))
        trie = build_trie(itemsets, fix1_freq, fix1_db, Mode.ALL)
        with pytest.raises(ValueError, match="support"):
            annotate_metrics(trie, itemsets[:-1], fix1_db)

    def test_all_and_maximal_agree_on_shared_paths(self, fix1_db, fix1_all_trie, fix1_maximal_trie):
        for path in ("f", "f,c", "f,c,a,m,p", "c,b"):
            a = node_by_path(fix1_all_trie, fix1_db, path)
            b = node_by_path(fix1_maximal_trie, fix1_db, path)
            assert a.support_count == b.support_count


class TestNodeRule:
    def test_node_a(self, fix1_db, fix1_maximal_trie):
        rule = node_rule(node_by_path(fix1_maximal_trie, fix1_db, "f,c,a"))
        assert names_of(fix1_db, rule.antecedent) == ("f", "c")
        assert names_of(fix1_db, rule.consequent) == ("a",)
        assert rule.metrics.confidence == 1.0

    def test_b_under_c(self, fix1_db, fix1_maximal_trie):
        rule = node_rule(node_by_path(fix1_maximal_trie, fix1_db, "c,b"))
        assert rule.metrics.support == pytest.approx(0.4, abs=APPROX)
        assert rule.metrics.confidence == pytest.approx(0.5, abs=APPROX)
        assert rule.metrics.lift == pytest.approx(5 / 6, abs=APPROX)

    def test_root_rejected(self, fix1_maximal_trie):
        with pytest.raises(ValueError):
            node_rule(fix1_maximal_trie.root)


class TestLookupRule:
    def test_single_consequent_hit(self, fix1_db, fix1_maximal_trie):
        rule = lookup_rule(
            fix1_maximal_trie, ids_of(fix1_db, "f,c"), ids_of(fix1_db, "a")
        )
        assert rule.metrics.support == pytest.approx(0.6, abs=APPROX)
        assert rule.metrics.confidence == 1.0

    def test_compound_consequent_hit(self, fix1_db, fix1_maximal_trie):
        rule = lookup_rule(
            fix1_maximal_trie, ids_of(fix1_db, "f"), ids_of(fix1_db, "c,a")
        )
        assert rule.metrics.confidence == pytest.approx(0.75, abs=APPROX)
        assert rule.metrics.support == pytest.approx(0.6, abs=APPROX)
        # (c,a) is no root path in the maximal trie, so lift is unavailable.
        assert rule.metrics.lift is None

    def test_compound_lift_from_all_trie(self, fix1_db, fix1_all_trie):
        rule = lookup_rule(fix1_all_trie, ids_of(fix1_db, "f"), ids_of(fix1_db, "c,a"))
        assert rule.metrics.lift == pytest.approx(0.75 / 0.6, abs=APPROX)

    def test_not_representable(self, fix1_db, fix1_maximal_trie):
        with pytest.raises(NotRepresentableError) as err:
            lookup_rule(fix1_maximal_trie, ids_of(fix1_db, "a"), ids_of(fix1_db, "f"))
        assert err.value.item == ids_of(fix1_db, "f")[0]

    def test_unknown_item_is_not_found(self, fix1_db, fix1_maximal_trie):
        with pytest.raises(RuleNotFoundError):
            lookup_rule(fix1_maximal_trie, ids_of(fix1_db, "f"), (999,))

    def test_absent_path_is_not_found(self, fix1_db, fix1_all_trie):
        # {p, b} interleaves nothing (p, b canonical) but no path exists.
        with pytest.raises(RuleNotFoundError) as err:
            lookup_rule(fix1_all_trie, ids_of(fix1_db, "p"), ids_of(fix1_db, "b"))
        assert err.value.item in ids_of(fix1_db, "p,b")

    def test_empty_antecedent(self, fix1_db, fix1_maximal_trie):
        rule = lookup_rule(fix1_maximal_trie, (), ids_of(fix1_db, "f"))
        assert rule.metrics.support == pytest.approx(0.8, abs=APPROX)
        assert rule.metrics.lift == 1.0

    def test_empty_consequent_rejected(self, fix1_maximal_trie, fix1_db):
        with pytest.raises(ValueError):
            lookup_rule(fix1_maximal_trie, ids_of(fix1_db, "f"), ())

    def test_overlap_rejected(self, fix1_db, fix1_maximal_trie):
        f = ids_of(fix1_db, "f")
        with pytest.raises(ValueError):
            lookup_rule(fix1_maximal_trie, f, f)

    def test_probe_cost_node_rules(self, fix1_all_trie):
        for rule in enumerate_rules(fix1_all_trie):
            counter = ProbeCounter()
            lookup_rule(fix1_all_trie, set(rule.antecedent), list(rule.consequent), probes=counter)
            assert counter.count == len(rule.antecedent) + len(rule.consequent)

    def test_probe_cost_compound(self, fix1_db, fix1_maximal_trie, fix1_all_trie):
        for trie in (fix1_maximal_trie, fix1_all_trie):
            counter = ProbeCounter()
            lookup_rule(trie, ids_of(fix1_db, "f"), ids_of(fix1_db, "c,a"), probes=counter)
            # main walk |A|+|C|, lift walk at most |C| more
            assert counter.count <= 1 + 2 * 2

    def test_lookup_matches_node_rule_exactly(self, fix1_all_trie):
        for node in fix1_all_trie.nodes():
            expected = node_rule(node)
            got = lookup_rule(fix1_all_trie, set(expected.antecedent), expected.consequent)
            assert got == expected


class TestCompoundConfidence:
    def test_single_node_is_its_confidence(self, fix1_db, fix1_maximal_trie):
        node = node_by_path(fix1_maximal_trie, fix1_db, "f,c")
        assert compound_confidence(fix1_maximal_trie, [node]) == node.confidence

    def test_segment_below_f(self, fix1_db, fix1_maximal_trie):
        c = node_by_path(fix1_maximal_trie, fix1_db, "f,c")
        a = node_by_path(fix1_maximal_trie, fix1_db, "f,c,a")
        got = compound_confidence(fix1_maximal_trie, [c, a])
        assert got == pytest.approx(0.75, abs=APPROX)
        assert got == pytest.approx(
            support(ids_of(fix1_db, "f,c,a"), fix1_db) / support(ids_of(fix1_db, "f"), fix1_db),
            abs=APPROX,
        )

    def test_segment_from_root(self, fix1_db, fix1_maximal_trie):
        f = node_by_path(fix1_maximal_trie, fix1_db, "f")
        c = node_by_path(fix1_maximal_trie, fix1_db, "f,c")
        assert compound_confidence(fix1_maximal_trie, [f, c]) == pytest.approx(0.6, abs=APPROX)

    def test_non_contiguous_rejected(self, fix1_db, fix1_maximal_trie):
        f = node_by_path(fix1_maximal_trie, fix1_db, "f")
        a = node_by_path(fix1_maximal_trie, fix1_db, "f,c,a")
        with pytest.raises(ValueError):
            compound_confidence(fix1_maximal_trie, [f, a])

    def test_root_rejected(self, fix1_maximal_trie):
        with pytest.raises(ValueError):
            compound_confidence(fix1_maximal_trie, [fix1_maximal_trie.root])

    def test_empty_segment_rejected(self, fix1_maximal_trie):
        with pytest.raises(ValueError):
            compound_confidence(fix1_maximal_trie, [])

    def test_product_identity_everywhere(self, fix1_maximal_trie, fix1_db):
        self.check_product_identity(fix1_maximal_trie, fix1_db)
        rng = random.Random(33)
        for _ in range(10):
            for mode in Mode:
                db, trie, _ = random_trie(rng, mode)
                self.check_product_identity(trie, db)

    @staticmethod
    def check_product_identity(trie, db):
        for node in trie.nodes():
            segment = []
            walker = node
            while not walker.is_root:
                segment.insert(0, walker)
                product = compound_confidence(trie, segment)
                full = support(node.path_items(), db)
                above = support(segment[0].parent.path_items(), db)
                assert product == pytest.approx(full / above, abs=APPROX)
                walker = walker.parent


class TestEnumerateRules:
    def test_single_item_consequents(self, fix1_maximal_trie):
        assert len(list(enumerate_rules(fix1_maximal_trie, 1, 0))) == 8

    def test_two_item_consequents(self, fix1_maximal_trie):
        assert len(list(enumerate_rules(fix1_maximal_trie, 2, 0))) == 14

    def test_empty_trie(self, fix1_db, fix1_freq):
        trie = build_trie([], fix1_freq, fix1_db)
        assert list(enumerate_rules(trie)) == []

    def test_deterministic_order(self, fix1_db, fix1_maximal_trie):
        got = [
            (names_of(fix1_db, r.antecedent), names_of(fix1_db, r.consequent))
            for r in enumerate_rules(fix1_maximal_trie, 1, 0)
        ]
        assert got == [
            ((), ("f",)),
            (("f",), ("c",)),
            (("f", "c"), ("a",)),
            (("f", "c", "a"), ("m",)),
            (("f", "c", "a", "m"), ("p",)),
            (("f",), ("b",)),
            ((), ("c",)),
            (("c",), ("b",)),
        ]

    def test_min_antecedent_filter(self, fix1_maximal_trie):
        rules = list(enumerate_rules(fix1_maximal_trie, 1, 1))
        assert len(rules) == 6
        assert all(len(r.antecedent) >= 1 for r in rules)

    def test_bad_parameters(self, fix1_maximal_trie):
        with pytest.raises(ValueError):
            list(enumerate_rules(fix1_maximal_trie, 0, 0))
        with pytest.raises(ValueError):
            list(enumerate_rules(fix1_maximal_trie, 1, -1))


class TestTopN:
    def test_support_zero(self, fix1_maximal_trie):
        assert top_n_by_support(fix1_maximal_trie, 0) == []

    def test_support_top_two(self, fix1_db, fix1_maximal_trie):
        rules = top_n_by_support(fix1_maximal_trie, 2)
        assert [names_of(fix1_db, r.consequent) for r in rules] == [("f",), ("c",)]
        assert all(r.metrics.support == pytest.approx(0.8, abs=APPROX) for r in rules)

    def test_support_exhaustive_matches_full_sort(self, fix1_maximal_trie, fix1_all_trie):
        rng = random.Random(44)
        tries = [fix1_maximal_trie, fix1_all_trie]
        tries += [random_trie(rng, mode)[1] for mode in Mode for _ in range(3)]
        for trie in tries:
            ranked = sorted(
                trie.nodes(), key=lambda nd: (-nd.support_count, nd.order_index)
            )
            for n in range(trie.node_count + 2):
                got = top_n_by_support(trie, n)
                assert got == [node_rule(nd) for nd in ranked[:n]]

    def test_confidence_top_two(self, fix1_db, fix1_maximal_trie):
        rules = top_n_by_confidence(fix1_maximal_trie, 2)
        assert [names_of(fix1_db, r.consequent) for r in rules] == [("a",), ("m",)]
        assert all(r.metrics.confidence == 1.0 for r in rules)

    def test_confidence_zero_and_overflow(self, fix1_maximal_trie):
        assert top_n_by_confidence(fix1_maximal_trie, 0) == []
        everything = top_n_by_confidence(fix1_maximal_trie, 99)
        assert len(everything) == 8
        confs = [r.metrics.confidence for r in everything]
        assert confs == sorted(confs, reverse=True)


class TestExportDot:
    def test_empty_trie(self, fix1_db, fix1_freq):
        trie = build_trie([], fix1_freq, fix1_db)
        dot = export_dot(trie)
        assert dot.startswith("digraph")
        assert '"null"' in dot
        assert "->" not in dot

    def test_fix1_shape(self, fix1_maximal_trie):
        dot = export_dot(fix1_maximal_trie)
        assert dot.count("[label=") == 9
        assert dot.count(" -> ") == 8

    def test_labels_carry_three_metric_fields(self, fix1_maximal_trie):
        dot = export_dot(fix1_maximal_trie)
        labels = [line for line in dot.splitlines() if "[label=" in line and "null" not in line]
        assert len(labels) == 8
        for line in labels:
            assert line.count("sup=") == 1
            assert line.count("conf=") == 1
            assert line.count("lift=") == 1


class TestJsonRoundTrip:
    def test_empty_trie(self, fix1_db, fix1_freq):
        trie = build_trie([], fix1_freq, fix1_db)
        clone = import_json(export_json(trie))
        assert clone.structurally_equal(trie)

    def test_fix1_round_trips_with_metrics(self, fix1_maximal_trie, fix1_all_trie):
        for trie in (fix1_maximal_trie, fix1_all_trie):
            clone = import_json(export_json(trie))
            assert clone.structurally_equal(trie)
            originals = [node_rule(n).metrics for n in trie.nodes()]
            cloned = [node_rule(n).metrics for n in clone.nodes()]
            assert originals == cloned

    def test_imported_trie_answers_lookups(self, fix1_db, fix1_maximal_trie):
        clone = import_json(export_json(fix1_maximal_trie))
        rule = lookup_rule(clone, ids_of(fix1_db, "f,c"), ids_of(fix1_db, "a"))
        assert rule.metrics.confidence == 1.0

    def test_truncated_document(self, fix1_maximal_trie):
        text = export_json(fix1_maximal_trie)
        with pytest.raises(TrieFormatError):
            import_json(text[: len(text) // 2])

    def test_version_mismatch(self, fix1_maximal_trie):
        text = export_json(fix1_maximal_trie).replace(
            '"format_version": 1', '"format_version": 99'
        )
        with pytest.raises(TrieFormatError):
            import_json(text)

    def test_non_object_document(self):
        with pytest.raises(TrieFormatError):
            import_json("[1, 2, 3]")

    def test_out_of_range_child_index(self, fix1_db, fix1_freq):
        trie = build_trie(
            mine_frequent(fix1_db, MiningConfig(0.3)), fix1_freq, fix1_db
        )
        annotate_metrics(trie, mine_frequent(fix1_db, MiningConfig(0.3)), fix1_db)
        import json as jsonlib

        doc = jsonlib.loads(export_json(trie))
        doc["nodes"][1]["children"] = [9999]
        with pytest.raises(TrieFormatError):
            import_json(jsonlib.dumps(doc))


class TestStructuralInvariants:
    def test_anti_monotone_supports(self, fix1_maximal_trie, fix1_all_trie):
        rng = random.Random(55)
        tries = [fix1_maximal_trie, fix1_all_trie]
        tries += [random_trie(rng, mode)[1] for mode in Mode for _ in range(5)]
        for trie in tries:
            for node in trie.nodes():
                if not node.parent.is_root:
                    assert node.support_count <= node.parent.support_count

    def test_paths_are_canonical_sequences(self, fix1_maximal_trie, fix1_all_trie):
        rng = random.Random(56)
        tries = [fix1_maximal_trie, fix1_all_trie]
        tries += [random_trie(rng, mode)[1] for mode in Mode for _ in range(5)]
        for trie in tries:
            rank = trie.freq.rank
            for node in trie.nodes():
                if not node.parent.is_root:
                    assert rank(node.parent.item) < rank(node.item)

    def test_insertion_order_independence(self, fix1_db, fix1_freq):
        itemsets = mine_frequent(fix1_db, MiningConfig(0.3, Mode.ALL))
        reference = build_trie(itemsets, fix1_freq, fix1_db, Mode.ALL)
        annotate_metrics(reference, itemsets, fix1_db)
        rng = random.Random(66)
        for _ in range(5):
            shuffled = itemsets[:]
            rng.shuffle(shuffled)
            other = build_trie(shuffled, fix1_freq, fix1_db, Mode.ALL)
            annotate_metrics(other, shuffled, fix1_db)
            assert other.structurally_equal(reference)

    def test_all_mode_completeness(self):
        rng = random.Random(77)
        for _ in range(10):
            db = random_database(rng)
            trie, itemsets = make_trie(db, rng.uniform(0.1, 0.5), Mode.ALL)
            assert trie.node_count == len(itemsets)
            freq = item_frequencies(db)
            for fi in itemsets:
                node = trie.root
                for item in fi.items:
                    node = node.children[item]
                assert node.support_count == fi.count

    def test_node_metrics_match_oracle_formulas(self):
        rng = random.Random(88)
        for _ in range(8):
            for mode in Mode:
                db, trie, _ = random_trie(rng, mode)
                for node in trie.nodes():
                    path = node.path_items()
                    sup = support(path, db)
                    conf = sup / support(path[:-1], db)
                    lift = conf / support((node.item,), db)
                    assert node.support == pytest.approx(sup, abs=APPROX)
                    assert node.confidence == pytest.approx(conf, abs=APPROX)
                    assert node.lift == pytest.approx(lift, abs=APPROX)

    def test_mode_recorded(self, fix1_maximal_trie, fix1_all_trie):
        assert fix1_maximal_trie.mode is Mode.MAXIMAL
        assert fix1_all_trie.mode is Mode.ALL
        assert not fix1_all_trie.structurally_equal(fix1_maximal_trie)

    def test_support_never_exceeds_confidence(self, fix1_all_trie):
        rng = random.Random(91)
        tries = [fix1_all_trie] + [random_trie(rng, mode)[1] for mode in Mode for _ in range(4)]
        for trie in tries:
            for node in trie.nodes():
                assert node.support <= node.confidence + APPROX

    def test_node_count_equals_reachable_nodes(self, fix1_maximal_trie, fix1_all_trie):
        rng = random.Random(92)
        tries = [fix1_maximal_trie, fix1_all_trie]
        tries += [random_trie(rng, mode)[1] for mode in Mode for _ in range(4)]
        for trie in tries:
            assert trie.node_count == sum(1 for _ in trie.nodes())

    def test_concurrent_reads_agree(self, fix1_all_trie):
        from concurrent.futures import ThreadPoolExecutor

        rules = [node_rule(n) for n in fix1_all_trie.nodes()]

        def worker(_):
            return [
                lookup_rule(fix1_all_trie, set(r.antecedent), r.consequent)
                for r in rules
            ]

        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(worker, range(8)))
        assert all(batch == rules for batch in results)
