"""Collation of multi-annotator labels, per-label agreement and class conflation.

Agreement is measured per label: a code enters the consensus set when at
least ``threshold`` of the annotators assigned it. A post survives only if
its consensus set is non-empty and does not contain ``UNDECIDED``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import DuplicateAnnotation, EmptyCodeSet, MalformedCodes, UnknownCode
from .labels import ConflatedClass, LabelCode

DEFAULT_THRESHOLD = 0.75

# Conflict resolution when a post's codes fall into several classes.
CLASS_PRIORITY = (
    ConflatedClass.CYBER_HATE,
    ConflatedClass.DISAGREE_OR_INSULT,
    ConflatedClass.SUPPORT_HATE,
    ConflatedClass.GENERAL,
)

CODE_TO_CLASS = {
    LabelCode.HATE: ConflatedClass.CYBER_HATE,
    LabelCode.SUPPORT: ConflatedClass.SUPPORT_HATE,
    LabelCode.SUPPORT_EVIDENCE: ConflatedClass.SUPPORT_HATE,
    LabelCode.DISAGREE: ConflatedClass.DISAGREE_OR_INSULT,
    LabelCode.DISAGREE_EVIDENCE: ConflatedClass.DISAGREE_OR_INSULT,
    LabelCode.INSULT: ConflatedClass.DISAGREE_OR_INSULT,
    LabelCode.GENERAL: ConflatedClass.GENERAL,
}


@dataclass(frozen=True)
class AnnotationRecord:
    post_id: str
    annotator_id: str
    labels: frozenset

    def __post_init__(self):
        labels = frozenset(_as_code(c) for c in self.labels)
        if not labels:
            raise EmptyCodeSet(f"annotation of {self.post_id!r} by {self.annotator_id!r} has no codes")
        if LabelCode.UNDECIDED in labels and len(labels) > 1:
            raise MalformedCodes(
                f"UNDECIDED combined with other codes for {self.post_id!r} by {self.annotator_id!r}"
            )
        object.__setattr__(self, "labels", labels)


@dataclass(frozen=True)
class ConsensusResult:
    post_id: str
    consensus_labels: frozenset
    retained: bool
    agreement: Mapping[LabelCode, float] = field(default_factory=dict)


def _as_code(code) -> LabelCode:
    try:
        return code if isinstance(code, LabelCode) else LabelCode(code)
    except ValueError:
        raise UnknownCode(f"unknown annotation code {code!r}") from None


def collate(records: Iterable[AnnotationRecord], n_annotators: int) -> dict[str, Counter]:
    """Count, per post, how many annotators assigned each code."""
    if n_annotators < 1:
        raise ValueError("n_annotators must be >= 1")
    seen = set()
    tally: dict[str, Counter] = {}
    for rec in records:
        key = (rec.post_id, rec.annotator_id)
        if key in seen:
            raise DuplicateAnnotation(f"post {rec.post_id!r} annotated twice by {rec.annotator_id!r}")
        seen.add(key)
        counts = tally.setdefault(rec.post_id, Counter())
        for code in rec.labels:
            counts[_as_code(code)] += 1
    return tally


def consensus(
    tally: Mapping,
    n_annotators: int,
    threshold: float = DEFAULT_THRESHOLD,
    post_id: str = "",
) -> ConsensusResult:
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    agreement = {_as_code(code): count / n_annotators for code, count in tally.items()}
    labels = frozenset(code for code, frac in agreement.items() if frac >= threshold)
    retained = bool(labels) and LabelCode.UNDECIDED not in labels
    return ConsensusResult(post_id, labels, retained, agreement)


def consensus_all(
    tallies: Mapping[str, Mapping], n_annotators: int, threshold: float = DEFAULT_THRESHOLD
) -> dict[str, ConsensusResult]:
    return {
        pid: consensus(tally, n_annotators, threshold, post_id=pid)
        for pid, tally in sorted(tallies.items())
    }


def conflate(codes: Iterable) -> ConflatedClass:
    """Map a consensus code set onto one of the four analysis classes."""
    codes = {_as_code(c) for c in codes}
    if not codes:
        raise EmptyCodeSet("cannot conflate an empty code set")
    if LabelCode.UNDECIDED in codes:
        raise UnknownCode("UNDECIDED posts have no conflated class")
    classes = {CODE_TO_CLASS[c] for c in codes}
    for cls in CLASS_PRIORITY:
        if cls in classes:
            return cls
    raise AssertionError("unreachable")
