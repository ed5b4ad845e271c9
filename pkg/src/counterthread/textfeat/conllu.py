"""Reader for dependency parses in CoNLL-U, grouped by ``# post_id = ...`` comments."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..errors import HeadOutOfRange, MalformedLine

ROOT = "ROOT"
_N_COLUMNS = 10


@dataclass(frozen=True)
class DepUnit:
    relation: str
    governor: str
    dependent: str

    def __post_init__(self):
        if not self.relation:
            raise ValueError("DepUnit relation must be non-empty")

    def render(self) -> str:
        return f"{self.relation}({self.governor}, {self.dependent})"

    def __str__(self) -> str:
        return self.render()


def _sentence_units(rows: list[tuple[int, list[str]]]) -> list[DepUnit]:
    forms = {int(cols[0]): cols[1] for _, cols in rows}
    units = []
    for lineno, cols in rows:
        try:
            head = int(cols[6])
        except ValueError:
            raise MalformedLine(f"line {lineno}: HEAD {cols[6]!r} is not an integer") from None
        if head == 0:
            governor = ROOT
        elif head in forms:
            governor = forms[head].lower()
        else:
            raise HeadOutOfRange(f"line {lineno}: HEAD {head} outside sentence of {len(forms)} tokens")
        relation = cols[7].lower()
        if not relation or relation == "_":
            raise MalformedLine(f"line {lineno}: missing DEPREL")
        units.append(DepUnit(relation, governor, cols[1].lower()))
    return units


def iter_sentences(lines: Iterable[str]):
    """Yield (post_id or None, units) per sentence."""
    post_id = None
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            if rows:
                yield post_id, _sentence_units(rows)
                rows = []
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep and key.strip() == "post_id":
                post_id = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != _N_COLUMNS:
            raise MalformedLine(f"line {lineno}: expected {_N_COLUMNS} columns, got {len(cols)}")
        # multiword ranges (1-2) and empty nodes (1.1) carry no basic dependency
        if "-" in cols[0] or "." in cols[0]:
            continue
        try:
            int(cols[0])
        except ValueError:
            raise MalformedLine(f"line {lineno}: ID {cols[0]!r} is not an integer") from None
        rows.append((lineno, cols))
    if rows:
        yield post_id, _sentence_units(rows)


def parse_conllu_text(text: str) -> dict[str, list[DepUnit]]:
    """Map post_id to its units in token order, sentences concatenated.

    Sentences before any ``post_id`` comment are filed under ``""``.
    """
    out: dict[str, list[DepUnit]] = {}
    for post_id, units in iter_sentences(text.splitlines()):
        out.setdefault(post_id or "", []).extend(units)
    return out


def parse_conllu(source) -> dict[str, list[DepUnit]]:
    """Like :func:`parse_conllu_text`, reading from a path or open file."""
    if hasattr(source, "read"):
        return parse_conllu_text(source.read())
    with open(source, encoding="utf-8") as fh:
        return parse_conllu_text(fh.read())
