"""Shared fixtures: the 5-transaction walkthrough database and seeded
random-database helpers used by the property tests."""

from __future__ import annotations

import random

import pytest

from ruletrie.mining import MiningConfig, Mode, mine_frequent
from ruletrie.model import TransactionDatabase, item_frequencies, parse_basket_file
from ruletrie.trie import annotate_metrics, build_trie

# Five baskets over six items; mined at min_support 0.3 the maximal itemsets
# are (f,c,a,m,p), (f,b), (c,b), each with support 0.4.
FIX1_TEXT = "f,c,a,m,p\nf,c,a,b,m\nf,b\nc,b,p\nf,c,a,m,p\n"


@pytest.fixture(scope="session")
def fix1_db():
    return parse_basket_file(FIX1_TEXT)


@pytest.fixture(scope="session")
def fix1_freq(fix1_db):
    return item_frequencies(fix1_db)


def make_trie(db, min_support, mode):
    config = MiningConfig(min_support, mode)
    itemsets = mine_frequent(db, config)
    freq = item_frequencies(db)
    trie = build_trie(itemsets, freq, db, mode)
    annotate_metrics(trie, itemsets, db)
    return trie, itemsets


@pytest.fixture(scope="session")
def fix1_maximal_trie(fix1_db):
    trie, _ = make_trie(fix1_db, 0.3, Mode.MAXIMAL)
    return trie


@pytest.fixture(scope="session")
def fix1_all_trie(fix1_db):
    trie, _ = make_trie(fix1_db, 0.3, Mode.ALL)
    return trie


def ids_of(db, tokens: str) -> tuple[int, ...]:
    """Map a comma-joined token string to item ids."""
    return tuple(db.dictionary.id_of(tok) for tok in tokens.split(",") if tok)


def names_of(db, items) -> tuple[str, ...]:
    return tuple(db.dictionary.name_of(i) for i in items)


def random_database(rng: random.Random, max_items: int = 10, max_transactions: int = 40):
    """Small random database for oracle-equivalence and invariant tests."""
    n_items = rng.randint(2, max_items)
    tokens = [f"i{k}" for k in range(n_items)]
    rows = []
    for _ in range(rng.randint(1, max_transactions)):
        size = rng.randint(1, n_items)
        rows.append(rng.sample(tokens, size))
    return TransactionDatabase.from_transactions(rows)
