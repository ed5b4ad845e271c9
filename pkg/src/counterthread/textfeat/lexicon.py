from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ..errors import EmptyLexicon
from .tokenize import tokenize


@dataclass(frozen=True)
class Lexicon:
    terms: frozenset
    source: str = ""

    def phrases(self) -> list[tuple[str, ...]]:
        """Terms as token tuples, longest first, empty tokenizations dropped."""
        out = {tuple(tokenize(t)) for t in self.terms}
        out.discard(())
        return sorted(out, key=lambda p: (-len(p), p))

    def __len__(self) -> int:
        return len(self.terms)


def parse_lexicon(lines: Sequence[str], source: str = "") -> Lexicon:
    terms = set()
    for line in lines:
        term = " ".join(line.strip().lower().split())
        if not term or term.startswith("#"):
            continue
        terms.add(term)
    if not terms:
        warnings.warn(f"lexicon {source or '<memory>'} contains no terms", EmptyLexicon, stacklevel=2)
    return Lexicon(frozenset(terms), source)


def load_lexicon(path) -> Lexicon:
    path = Path(path)
    return parse_lexicon(path.read_text(encoding="utf-8").splitlines(), source=str(path))


def count_matches(tokens: Sequence[str], lexicon: Lexicon) -> int:
    """Occurrences of lexicon phrases as contiguous runs of raw tokens (overlaps counted)."""
    if not tokens or not lexicon.terms:
        return 0
    by_first: dict[str, list[tuple[str, ...]]] = {}
    for phrase in lexicon.phrases():
        by_first.setdefault(phrase[0], []).append(phrase)
    hits = 0
    n = len(tokens)
    for i, tok in enumerate(tokens):
        for phrase in by_first.get(tok, ()):
            if i + len(phrase) <= n and tuple(tokens[i:i + len(phrase)]) == phrase:
                hits += 1
    return hits


def lexicon_rate(tokens: Sequence[str], lexicon: Lexicon) -> float:
    return count_matches(tokens, lexicon) / len(tokens) if tokens else 0.0
