"""File formats: thread CSVs, annotation CSV, JSONL stores, error sidecars and model files."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .annotation import AnnotationRecord
from .errors import CounterthreadError, MalformedCodes, MalformedCsv, VersionMismatch
from .labels import LabelCode, Strand
from .svm.linear import LinearModel
from .svm.multiclass import MulticlassModel
from .svm.scaling import ScalingParams
from .textfeat.features import ChannelSet, Featurizer, Vocabulary
from .textfeat.lexicon import Lexicon
from .thread_core import Post, Thread, assemble_thread

THREAD_HEADER = ("post_id", "author", "reply_to", "text")
ANNOTATION_HEADER = ("post_id", "annotator_id", "codes")
MODEL_FORMAT_VERSION = 1


# -- JSONL --------------------------------------------------------------------

def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_jsonl(path, rows: Iterable) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(dumps(row) + "\n")
            n += 1
    return n


def read_jsonl(path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield json.loads(line)


@dataclass
class ErrorLog:
    """Per-record problems collected during a batch, written as a JSONL sidecar."""

    command: str
    entries: list[dict] = field(default_factory=list)

    def add(self, source: str, exc: BaseException | str, kind: str | None = None) -> None:
        if isinstance(exc, BaseException):
            kind = kind or type(exc).__name__
            message = str(exc)
        else:
            kind = kind or "Warning"
            message = exc
        self.entries.append({"command": self.command, "source": str(source), "error": kind, "message": message})

    def write(self, out_dir) -> Path:
        path = Path(out_dir) / f"{self.command}.errors.jsonl"
        write_jsonl(path, self.entries)
        return path

    def __len__(self) -> int:
        return len(self.entries)


# -- threads ------------------------------------------------------------------

def read_thread_csv(path) -> list[dict]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh, strict=True)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != THREAD_HEADER:
                raise MalformedCsv(f"{path}: header must be {','.join(THREAD_HEADER)}")
            rows = []
            for lineno, row in enumerate(reader, 2):
                if not row:
                    continue
                if len(row) != len(THREAD_HEADER):
                    raise MalformedCsv(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
                rows.append(dict(zip(THREAD_HEADER, row)))
            return rows
    except (csv.Error, UnicodeDecodeError) as exc:
        raise MalformedCsv(f"{path}: {exc}") from None


def thread_files(threads_dir) -> list[tuple[Strand | None, Path]]:
    """CSV files under per-strand subdirectories, in sorted order.

    Files whose parent directory is not a strand name come back with strand None.
    """
    root = Path(threads_dir)
    found = []
    for path in sorted(root.rglob("*.csv")):
        try:
            strand = Strand.parse(path.parent.name) if path.parent != root else None
        except ValueError:
            strand = None
        found.append((strand, path))
    return found


def ingest_dir(threads_dir, errors: ErrorLog) -> list[Thread]:
    threads = []
    seen: set[tuple[str, str]] = set()
    for strand, path in thread_files(threads_dir):
        if strand is None:
            errors.add(path, MalformedCsv(f"{path}: not inside a sexist/racist/homophobic directory"))
            continue
        key = (strand.value, path.stem)
        if key in seen:
            errors.add(path, MalformedCsv(f"{path}: duplicate thread id {path.stem!r}"))
            continue
        try:
            threads.append(assemble_thread(read_thread_csv(path), path.stem, strand))
            seen.add(key)
        except CounterthreadError as exc:
            errors.add(path, exc)
    threads.sort(key=lambda t: (t.strand.value, t.thread_id))
    return threads


def thread_to_json(thread: Thread) -> dict:
    return {
        "thread_id": thread.thread_id,
        "strand": thread.strand.value,
        "posts": [
            {"post_id": p.post_id, "author": p.author, "reply_to": p.reply_to or "", "text": p.text}
            for p in thread.posts
        ],
    }


def thread_from_json(obj: dict) -> Thread:
    return assemble_thread(obj["posts"], obj["thread_id"], obj["strand"])


def load_thread_store(path) -> list[Thread]:
    return [thread_from_json(obj) for obj in read_jsonl(path)]


# -- annotations --------------------------------------------------------------

def parse_codes(text: str) -> frozenset:
    parts = [p.strip() for p in text.split(";")]
    if not parts or any(not p for p in parts):
        raise MalformedCodes(f"empty code in {text!r}")
    try:
        return frozenset(LabelCode.parse(p) for p in parts)
    except ValueError:
        raise MalformedCodes(f"unrecognised code in {text!r}") from None


def read_annotations(path, errors: ErrorLog) -> list[AnnotationRecord]:
    records = []
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh, strict=True)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != ANNOTATION_HEADER:
                raise MalformedCsv(f"{path}: header must be {','.join(ANNOTATION_HEADER)}")
            for lineno, row in enumerate(reader, 2):
                if not row:
                    continue
                source = f"{path}:{lineno}"
                if len(row) != 3:
                    errors.add(source, MalformedCsv(f"{source}: expected 3 fields, got {len(row)}"))
                    continue
                try:
                    records.append(AnnotationRecord(row[0].strip(), row[1].strip(), parse_codes(row[2])))
                except CounterthreadError as exc:
                    errors.add(source, exc)
    except (csv.Error, UnicodeDecodeError) as exc:
        raise MalformedCsv(f"{path}: {exc}") from None
    return records


def read_posts_csv(path) -> list[tuple[str, str]]:
    """(post_id, text) pairs from a CSV with at least those two columns."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"post_id", "text"} <= set(reader.fieldnames):
            raise MalformedCsv(f"{path}: needs post_id and text columns")
        return [(row["post_id"], row["text"] or "") for row in reader]


# -- model files --------------------------------------------------------------

def _floats(a) -> list[float]:
    return [float(x) for x in np.asarray(a, dtype=np.float64)]


def _linear_to_json(m: LinearModel | None):
    if m is None:
        return None
    return {
        "weights": _floats(m.weights),
        "bias": float(m.bias),
        "C": float(m.C),
        "iterations": int(m.iterations),
        "dual_objective": float(m.dual_objective),
        "primal_objective": float(m.primal_objective),
        "converged": bool(m.converged),
    }


def _linear_from_json(obj) -> LinearModel | None:
    if obj is None:
        return None
    return LinearModel(
        np.array(obj["weights"], dtype=np.float64),
        obj["bias"],
        obj["C"],
        obj["iterations"],
        obj["dual_objective"],
        obj["primal_objective"],
        obj["converged"],
    )


@dataclass(frozen=True)
class ModelFile:
    strand: str
    featurizer: Featurizer
    model: MulticlassModel
    config: dict

    def to_json(self) -> dict:
        fz = self.featurizer
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "strand": self.strand,
            "channels": str(fz.channels),
            "vocabularies": {
                "words": None if fz.word_vocab is None else list(fz.word_vocab.entries),
                "deps": None if fz.dep_vocab is None else list(fz.dep_vocab.entries),
            },
            "lexicon": None if fz.lexicon is None else sorted(fz.lexicon.terms),
            "scaling": {"min": _floats(self.model.scaling.mins), "max": _floats(self.model.scaling.maxs)},
            "models": [_linear_to_json(m) for m in self.model.models],
            "config": self.config,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ModelFile":
        version = obj.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise VersionMismatch(f"model format_version {version!r}, this build reads {MODEL_FORMAT_VERSION}")
        vocabs = obj["vocabularies"]
        fz = Featurizer(
            ChannelSet.parse(obj["channels"]),
            None if vocabs["words"] is None else Vocabulary(tuple(vocabs["words"])),
            None if vocabs["deps"] is None else Vocabulary(tuple(vocabs["deps"])),
            None if obj["lexicon"] is None else Lexicon(frozenset(obj["lexicon"])),
        )
        scaling = ScalingParams(
            np.array(obj["scaling"]["min"], dtype=np.float64),
            np.array(obj["scaling"]["max"], dtype=np.float64),
        )
        model = MulticlassModel(tuple(_linear_from_json(m) for m in obj["models"]), scaling)
        return cls(obj["strand"], fz, model, obj["config"])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1, ensure_ascii=False) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ModelFile":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
