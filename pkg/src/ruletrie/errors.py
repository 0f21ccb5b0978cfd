"""Exception types shared across the package."""


class RuleTrieError(Exception):
    """Base class for domain errors raised by this package."""


class DictionaryMismatchError(RuleTrieError):
    """An item id or token is unknown to the dictionary / frequency table in use."""

    def __init__(self, item, message=None):
        super().__init__(message or f"item not covered by the dictionary: {item!r}")
        self.item = item


class RuleNotFoundError(RuleTrieError):
    """The requested rule is absent from the structure being searched."""

    def __init__(self, item=None, message=None):
        super().__init__(message or f"rule not found (missing item: {item!r})")
        self.item = item


class NotRepresentableError(RuleTrieError):
    """The rule cannot exist as a trie path: the canonical order interleaves
    antecedent and consequent items.

    Distinct from RuleNotFoundError so callers can fall back to direct
    counting instead of misreading absence as infrequency.
    """

    def __init__(self, item=None, message=None):
        super().__init__(
            message
            or f"rule not representable: item {item!r} sorts into the antecedent span"
        )
        self.item = item


class TrieFormatError(RuleTrieError):
    """A serialized trie document is malformed or has the wrong version."""
