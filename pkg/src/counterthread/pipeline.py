"""Glue between the stores and the analysis modules, shared by the CLI and tests."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .annotation import AnnotationRecord, collate, conflate, consensus_all
from .errors import CounterthreadError, DuplicateAnnotation, MissingParses, UnknownPostId
from .io import ErrorLog
from .labels import ConflatedClass, LabelCode, Strand
from .regression import OlsFit, build_design, fit_ols
from .svm.evaluation import CvResult, cross_validate
from .svm.linear import DEFAULT_C, DEFAULT_TOL
from .svm.multiclass import MulticlassModel, predict, train_ovr
from .textfeat.conllu import DepUnit
from .textfeat.features import DEFAULT_K, DEP_RANGE, WORD_RANGE, ChannelSet, Featurizer, PostDoc
from .textfeat.lexicon import Lexicon
from .textfeat.tokenize import tokenize
from .thread_core import Thread, ThreadStats, compute_thread_stats, filter_thread


@dataclass(frozen=True)
class GoldLabel:
    post_id: str
    thread_id: str
    strand: Strand
    codes: frozenset
    label: ConflatedClass
    agreement: float

    def to_json(self) -> dict:
        return {
            "post_id": self.post_id,
            "thread_id": self.thread_id,
            "strand": self.strand.value,
            "codes": sorted(c.render() for c in self.codes),
            "class": int(self.label),
            "agreement": self.agreement,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GoldLabel":
        codes = frozenset(LabelCode.parse(c) for c in obj["codes"])
        return cls(obj["post_id"], obj["thread_id"], Strand.parse(obj["strand"]), codes,
                   ConflatedClass(obj["class"]), obj["agreement"])


def post_index(threads: Iterable[Thread]) -> dict[str, tuple[Thread, int]]:
    return {p.post_id: (t, i) for t in threads for i, p in enumerate(t.posts)}


def gold_labels(records: Sequence[AnnotationRecord], threads: Sequence[Thread], n_annotators: int,
                threshold: float, errors: ErrorLog) -> dict[str, GoldLabel]:
    """Consensus labels for annotated posts that survive the agreement filter."""
    index = post_index(threads)
    known = []
    seen = set()
    for rec in records:
        if rec.post_id not in index:
            errors.add(rec.post_id, UnknownPostId(f"annotation for unknown post {rec.post_id!r}"))
            continue
        key = (rec.post_id, rec.annotator_id)
        if key in seen:
            errors.add(rec.post_id, DuplicateAnnotation(
                f"post {rec.post_id!r} annotated twice by {rec.annotator_id!r}; later row ignored"))
            continue
        seen.add(key)
        known.append(rec)
    gold = {}
    for pid, res in consensus_all(collate(known, n_annotators), n_annotators, threshold).items():
        if not res.retained:
            continue
        thread, _ = index[pid]
        agreement = min(res.agreement[c] for c in res.consensus_labels)
        gold[pid] = GoldLabel(pid, thread.thread_id, thread.strand, res.consensus_labels,
                              conflate(res.consensus_labels), agreement)
    return gold


def distribution(gold: Mapping[str, GoldLabel]) -> dict[Strand, list[int]]:
    table = {s: [0] * len(ConflatedClass) for s in Strand}
    for g in gold.values():
        table[g.strand][g.label] += 1
    return table


def render_distribution(table: Mapping[Strand, Sequence[int]]) -> str:
    head = ["", *(c.title for c in ConflatedClass), "Total"]
    rows = [[s.title, *map(str, counts), str(sum(counts))] for s, counts in table.items()]
    widths = [max(len(r[i]) for r in [head, *rows]) for i in range(len(head))]
    fmt = lambda r: "  ".join(cell.ljust(w) if i == 0 else cell.rjust(w) for i, (cell, w) in enumerate(zip(r, widths)))
    return "\n".join([fmt(head), *(fmt(r) for r in rows)]) + "\n"


def strand_selection(strand: str) -> list[Strand]:
    return list(Strand) if strand == "all" else [Strand.parse(strand)]


def thread_stats(threads: Sequence[Thread], gold: Mapping[str, GoldLabel], errors: ErrorLog) -> list[ThreadStats]:
    """Stats per thread after dropping replies without a consensus label."""
    out = []
    for thread in threads:
        kept = filter_thread(thread, (p.post_id for p in thread.replies if p.post_id in gold))
        try:
            out.append(compute_thread_stats(kept, {pid: gold[pid].codes for pid in (p.post_id for p in kept.replies)}))
        except CounterthreadError as exc:
            errors.add(thread.thread_id, exc)
    return out


def regress(threads: Sequence[Thread], gold: Mapping[str, GoldLabel], strands: Sequence[Strand],
            errors: ErrorLog) -> dict[str, OlsFit]:
    fits = {}
    for strand in strands:
        stats = thread_stats([t for t in threads if t.strand is strand], gold, errors)
        fits[strand.title] = fit_ols(build_design(stats))
    return fits


# -- classification -----------------------------------------------------------

@dataclass(frozen=True)
class LabeledDocs:
    post_ids: tuple[str, ...]
    docs: tuple[PostDoc, ...]
    labels: np.ndarray


def make_docs(posts: Sequence[tuple[str, str]], parses: Mapping[str, Sequence[DepUnit]] | None,
              channels: ChannelSet, errors: ErrorLog, word_range=WORD_RANGE,
              dep_range=DEP_RANGE) -> tuple[list[str], list[PostDoc]]:
    """Featurization inputs for (post_id, text) pairs.

    With a deps channel, posts lacking a parse are skipped and logged.
    """
    ids, docs = [], []
    for pid, text in posts:
        units = None
        if channels.deps:
            if parses is None or pid not in parses:
                errors.add(pid, MissingParses(f"no dependency parse for post {pid!r}; skipped"))
                continue
            units = parses[pid]
        ids.append(pid)
        docs.append(PostDoc.build(tokenize(text), units, word_range, dep_range))
    return ids, docs


def labeled_docs(threads: Sequence[Thread], gold: Mapping[str, GoldLabel], strand: Strand,
                 parses, channels: ChannelSet, errors: ErrorLog, word_range=WORD_RANGE,
                 dep_range=DEP_RANGE) -> LabeledDocs:
    posts = [(p.post_id, p.text) for t in threads if t.strand is strand for p in t.posts if p.post_id in gold]
    ids, docs = make_docs(posts, parses, channels, errors, word_range, dep_range)
    labels = np.array([int(gold[pid].label) for pid in ids], dtype=np.int64)
    return LabeledDocs(tuple(ids), tuple(docs), labels)


@dataclass(frozen=True)
class TrainSettings:
    k: int = DEFAULT_K
    C: float = DEFAULT_C
    tol: float = DEFAULT_TOL
    max_iter: int = 1000
    seed: int = 42


def fit_model(docs: Sequence[PostDoc], labels, channels: ChannelSet, lexicon: Lexicon | None,
              settings: TrainSettings) -> tuple[Featurizer, MulticlassModel]:
    fz = Featurizer.fit(docs, channels, settings.k, lexicon)
    model = train_ovr(fz.transform(docs), labels, C=settings.C, tol=settings.tol,
                      max_iter=settings.max_iter, seed=settings.seed)
    return fz, model


def classify_docs(fz: Featurizer, model: MulticlassModel, docs: Sequence[PostDoc]) -> np.ndarray:
    if not docs:
        return np.zeros(0, dtype=np.int64)
    return predict(model, fz.transform(docs))


def cross_validate_docs(data: LabeledDocs, channels: ChannelSet, lexicon: Lexicon | None,
                        settings: TrainSettings, folds: int = 10) -> CvResult:
    """k-fold CV where vocabularies and scaling are refit on each training fold."""
    docs = data.docs

    def fit_predict(train, test):
        fz, model = fit_model([docs[i] for i in train], data.labels[train], channels, lexicon, settings)
        return classify_docs(fz, model, [docs[i] for i in test])

    return cross_validate(data.labels, fit_predict, k=folds, seed=settings.seed)


def class_counts(labels) -> Counter:
    return Counter(int(x) for x in labels)
