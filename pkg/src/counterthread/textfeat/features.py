from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from .conllu import DepUnit
from .lexicon import Lexicon, count_matches
from .stemmer import stem

DEFAULT_K = 2000
WORD_RANGE = (1, 5)
DEP_RANGE = (1, 3)


def ngrams(items: Sequence[str], n_min: int, n_max: int) -> Counter:
    if n_min < 1 or n_min > n_max:
        raise ValueError(f"bad n-gram range {n_min}..{n_max}")
    out: Counter = Counter()
    for n in range(n_min, min(n_max, len(items)) + 1):
        for i in range(len(items) - n + 1):
            out[" ".join(items[i:i + n])] += 1
    return out


def word_ngrams(tokens: Sequence[str], n_min: int = 1, n_max: int = 5) -> Counter:
    return ngrams([stem(t) for t in tokens], n_min, n_max)


def dep_ngrams(units: Sequence[DepUnit], n_min: int = 1, n_max: int = 3) -> Counter:
    return ngrams([u.render() for u in units], n_min, n_max)


@dataclass(frozen=True)
class Vocabulary:
    entries: tuple[str, ...]
    index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {term: i for i, term in enumerate(self.entries)}
        if len(index) != len(self.entries):
            raise ValueError("vocabulary entries must be unique")
        object.__setattr__(self, "index", index)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, term) -> bool:
        return term in self.index


def build_vocabulary(multisets: Iterable[Mapping[str, int]], k: int = DEFAULT_K) -> Vocabulary:
    """Top-k terms by total frequency, ties broken by ascending term."""
    if k < 1:
        raise ValueError("k must be >= 1")
    totals: Counter = Counter()
    for ms in multisets:
        totals.update(ms)
    ranked = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary(tuple(term for term, _ in ranked[:k]))


def l1_normalize(counts: Mapping[int, float]) -> dict[int, float]:
    total = sum(counts.values())
    if total == 0:
        return {}
    return {col: c / total for col, c in counts.items()}


def restrict(ms: Mapping[str, int], vocab: Vocabulary) -> dict[int, int]:
    index = vocab.index
    return {index[t]: c for t, c in ms.items() if t in index and c}


@dataclass(frozen=True)
class ChannelSet:
    words: bool = True
    deps: bool = False
    lexicon: bool = False

    @classmethod
    def parse(cls, spec: str) -> "ChannelSet":
        """``words``, ``deps`` or ``both``, optionally suffixed ``+lexicon``."""
        base, plus, extra = spec.strip().lower().partition("+")
        if plus and extra != "lexicon":
            raise ValueError(f"unknown channel modifier {extra!r}")
        table = {"words": (True, False), "deps": (False, True), "both": (True, True)}
        if base not in table:
            raise ValueError(f"unknown channel set {base!r}")
        return cls(*table[base], lexicon=bool(plus))

    def __str__(self) -> str:
        base = {(True, False): "words", (False, True): "deps", (True, True): "both"}[(self.words, self.deps)]
        return base + ("+lexicon" if self.lexicon else "")

    def __post_init__(self):
        if not (self.words or self.deps):
            raise ValueError("at least one of words/deps must be enabled")


@dataclass(frozen=True)
class FeatureVector:
    """Sparse post representation; ``blocks`` lists (channel, offset, width)."""

    weights: Mapping[int, float]
    blocks: tuple[tuple[str, int, int], ...]

    @property
    def dim(self) -> int:
        return sum(width for _, _, width in self.blocks)

    def channel(self, name: str) -> dict[int, float]:
        for block, offset, width in self.blocks:
            if block == name:
                return {c - offset: w for c, w in self.weights.items() if offset <= c < offset + width}
        raise KeyError(name)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        for c, w in self.weights.items():
            out[c] = w
        return out


@dataclass(frozen=True)
class PostDoc:
    """Per-post raw material, n-grams computed once and reused across folds."""

    tokens: tuple[str, ...]
    word_counts: Counter
    dep_counts: Counter | None

    @classmethod
    def build(cls, tokens: Sequence[str], units: Sequence[DepUnit] | None,
              word_range=WORD_RANGE, dep_range=DEP_RANGE) -> "PostDoc":
        return cls(
            tuple(tokens),
            word_ngrams(tokens, *word_range),
            None if units is None else dep_ngrams(units, *dep_range),
        )


def vectorize(
    word_counts: Mapping[str, int] | None,
    dep_counts: Mapping[str, int] | None,
    word_vocab: Vocabulary | None,
    dep_vocab: Vocabulary | None,
    lexicon: Lexicon | None = None,
    tokens: Sequence[str] = (),
) -> FeatureVector:
    """Concatenate L1-normalized word and dep blocks and the lexicon rate column.

    Channels whose vocabulary is None are left out of the layout.
    """
    weights: dict[int, float] = {}
    blocks = []
    offset = 0
    for name, counts, vocab in (("words", word_counts, word_vocab), ("deps", dep_counts, dep_vocab)):
        if vocab is None:
            continue
        for col, w in l1_normalize(restrict(counts or {}, vocab)).items():
            weights[offset + col] = w
        blocks.append((name, offset, len(vocab)))
        offset += len(vocab)
    if lexicon is not None:
        hits = count_matches(tokens, lexicon)
        if hits:
            weights[offset] = hits / len(tokens)
        blocks.append(("lexicon", offset, 1))
    return FeatureVector(dict(sorted(weights.items())), tuple(blocks))


@dataclass(frozen=True)
class Featurizer:
    """Frozen vocabularies for one channel set; turns PostDocs into a CSR matrix."""

    channels: ChannelSet
    word_vocab: Vocabulary | None
    dep_vocab: Vocabulary | None
    lexicon: Lexicon | None

    @classmethod
    def fit(cls, docs: Sequence[PostDoc], channels: ChannelSet, k: int = DEFAULT_K,
            lexicon: Lexicon | None = None) -> "Featurizer":
        word_vocab = build_vocabulary((d.word_counts for d in docs), k) if channels.words else None
        dep_vocab = None
        if channels.deps:
            dep_vocab = build_vocabulary((d.dep_counts or {} for d in docs), k)
        if channels.lexicon and lexicon is None:
            lexicon = Lexicon(frozenset())
        return cls(channels, word_vocab, dep_vocab, lexicon if channels.lexicon else None)

    @property
    def dim(self) -> int:
        return (
            (len(self.word_vocab) if self.word_vocab is not None else 0)
            + (len(self.dep_vocab) if self.dep_vocab is not None else 0)
            + (1 if self.lexicon is not None else 0)
        )

    def vector(self, doc: PostDoc) -> FeatureVector:
        return vectorize(doc.word_counts, doc.dep_counts, self.word_vocab, self.dep_vocab,
                         self.lexicon, doc.tokens)

    def transform(self, docs: Sequence[PostDoc]) -> sparse.csr_matrix:
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for doc in docs:
            fv = self.vector(doc)
            indices.extend(fv.weights.keys())
            data.extend(fv.weights.values())
            indptr.append(len(indices))
        return sparse.csr_matrix(
            (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int32), np.asarray(indptr, dtype=np.int64)),
            shape=(len(docs), self.dim),
        )
