"""``counterthread`` command-line entry point."""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
import warnings
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import io
from .errors import CounterthreadError, TooFewSamples
from .labels import ConflatedClass, Strand
from .pipeline import (
    GoldLabel,
    TrainSettings,
    classify_docs,
    cross_validate_docs,
    distribution,
    fit_model,
    gold_labels,
    labeled_docs,
    make_docs,
    regress,
    render_distribution,
    strand_selection,
)
from .regression import render_table, tabulate_fits
from .textfeat.conllu import parse_conllu
from .textfeat.features import ChannelSet
from .textfeat.lexicon import load_lexicon

COMMANDS = ("ingest", "collate", "regress", "train", "cv", "classify", "report")


@dataclass(frozen=True)
class RunConfig:
    threads: str | None = None
    annotations: str | None = None
    parses: str | None = None
    lexicon: str | None = None
    model: str | None = None
    input: str | None = None
    strand: str = "all"
    k: int = 2000
    word_ngrams: tuple[int, int] = (1, 5)
    dep_ngrams: tuple[int, int] = (1, 3)
    C: float = 1.0
    folds: int = 10
    seed: int = 42
    threshold: float = 0.75
    annotators: int = 4
    channels: str = "words"
    out: str = "out"

    def validate(self) -> "RunConfig":
        for name in ("k", "C", "folds", "threshold", "annotators"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.threshold > 1:
            raise ValueError("threshold must be at most 1")
        if self.strand != "all":
            Strand.parse(self.strand)
        for lo, hi in (self.word_ngrams, self.dep_ngrams):
            if not 1 <= lo <= hi:
                raise ValueError("n-gram ranges need 1 <= min <= max")
        self.channel_sets()
        for name in ("threads", "annotations", "parses", "lexicon", "model", "input"):
            path = getattr(self, name)
            if path is not None and not Path(path).exists():
                raise FileNotFoundError(f"{name} path {path} does not exist")
        return self

    def channel_sets(self) -> list[ChannelSet]:
        return [ChannelSet.parse(s) for s in self.channels.split(",") if s.strip()]

    @classmethod
    def from_file(cls, path) -> dict:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key in ("word_ngrams", "dep_ngrams"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return raw

    def settings(self) -> TrainSettings:
        return TrainSettings(k=self.k, C=self.C, seed=self.seed)

    def snapshot(self) -> dict:
        snap = asdict(self)
        for key in ("word_ngrams", "dep_ngrams"):
            snap[key] = list(snap[key])
        for key in ("threads", "annotations", "parses", "lexicon", "model", "input", "out"):
            snap.pop(key)
        return snap


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="counterthread", description="Thread statistics and 4-class post classification.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--threads", help="directory with sexist/, racist/, homophobic/ thread CSVs")
    p.add_argument("--annotations", help="annotation CSV (post_id,annotator_id,codes)")
    p.add_argument("--parses", help="CoNLL-U file keyed by '# post_id = ...'")
    p.add_argument("--lexicon", help="newline-delimited hateful-term list")
    p.add_argument("--model", help="model file for classify (default: OUT/model-STRAND.json)")
    p.add_argument("--input", help="CSV with post_id,text columns for classify")
    p.add_argument("--strand", choices=["sexist", "racist", "homophobic", "all"])
    p.add_argument("--seed", type=int)
    p.add_argument("--k", type=int, help="vocabulary size per channel")
    p.add_argument("--folds", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--annotators", type=int, help="annotators per post")
    p.add_argument("--C", dest="C", type=float)
    p.add_argument("--channels", help="words|deps|both, optional +lexicon; comma list for cv")
    p.add_argument("--out", help="output directory")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = RunConfig.from_file(args.config) if args.config else {}
    for f in fields(RunConfig):
        given = getattr(args, f.name, None)
        if given is not None:
            values[f.name] = given
    return RunConfig(**values).validate()


# -- helpers ------------------------------------------------------------------

def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require(cfg: RunConfig, name: str) -> str:
    value = getattr(cfg, name)
    if value is None:
        raise CounterthreadError(f"--{name} is required for this command")
    return value


def _store(cfg: RunConfig, name: str) -> Path:
    path = Path(cfg.out) / name
    if not path.exists():
        hint = {"threads.jsonl": "ingest", "labels.jsonl": "collate"}[name]
        raise CounterthreadError(f"{path} missing; run '{hint}' first")
    return path


def _threads(cfg):
    return io.load_thread_store(_store(cfg, "threads.jsonl"))


def _gold(cfg):
    return {obj["post_id"]: GoldLabel.from_json(obj) for obj in io.read_jsonl(_store(cfg, "labels.jsonl"))}


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _load_lexicon(cfg, errors: io.ErrorLog):
    if cfg.lexicon is None:
        return None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lex = load_lexicon(cfg.lexicon)
    for w in caught:
        errors.add(cfg.lexicon, str(w.message), kind=w.category.__name__)
    return lex


def _parses(cfg, channel_sets):
    if any(cs.deps for cs in channel_sets) and cfg.parses is not None:
        return parse_conllu(cfg.parses)
    return None


# -- commands -----------------------------------------------------------------

def cmd_ingest(cfg: RunConfig) -> int:
    out = _out(cfg)
    errors = io.ErrorLog("ingest")
    threads = io.ingest_dir(_require(cfg, "threads"), errors)
    if not threads and not errors:
        errors.add(cfg.threads, "no thread files found", kind="EmptyInput")
    io.write_jsonl(out / "threads.jsonl", (io.thread_to_json(t) for t in threads))
    errors.write(out)
    print(f"ingested {len(threads)} threads, {len(errors)} errors")
    return 0


def cmd_collate(cfg: RunConfig) -> int:
    out = _out(cfg)
    errors = io.ErrorLog("collate")
    records = io.read_annotations(_require(cfg, "annotations"), errors)
    threads = _threads(cfg)
    gold = gold_labels(records, threads, cfg.annotators, cfg.threshold, errors)
    annotated = len({r.post_id for r in records})
    io.write_jsonl(out / "labels.jsonl", (gold[pid].to_json() for pid in sorted(gold)))
    table = distribution(gold)
    text = render_distribution({s: table[s] for s in strand_selection(cfg.strand)})
    _write(out / "distribution.txt", text)
    _write(out / "distribution.json", io.dumps({
        "threshold": cfg.threshold,
        "annotators": cfg.annotators,
        "annotated_posts": annotated,
        "retained_posts": len(gold),
        "classes": [c.title for c in ConflatedClass],
        "counts": {s.value: table[s] for s in Strand},
    }) + "\n")
    errors.write(out)
    print(text, end="")
    print(f"retained {len(gold)} of {annotated} annotated posts")
    return 0


def cmd_regress(cfg: RunConfig) -> int:
    out = _out(cfg)
    errors = io.ErrorLog("regress")
    fits = regress(_threads(cfg), _gold(cfg), strand_selection(cfg.strand), errors)
    text = render_table(fits)
    _write(out / "regression.txt", text)
    _write(out / "regression.json", io.dumps({"rows": tabulate_fits(fits)}) + "\n")
    errors.write(out)
    print(text, end="")
    return 0


def cmd_train(cfg: RunConfig) -> int:
    out = _out(cfg)
    errors = io.ErrorLog("train")
    channel_sets = cfg.channel_sets()
    if len(channel_sets) != 1:
        raise CounterthreadError("train takes exactly one channel set")
    channels = channel_sets[0]
    settings = cfg.settings()
    threads, gold = _threads(cfg), _gold(cfg)
    parses = _parses(cfg, channel_sets)
    lexicon = _load_lexicon(cfg, errors)
    for strand in strand_selection(cfg.strand):
        data = labeled_docs(threads, gold, strand, parses, channels, errors, cfg.word_ngrams, cfg.dep_ngrams)
        fz, model = fit_model(data.docs, data.labels, channels, lexicon, settings)
        snap = dict(cfg.snapshot(), strand=strand.value, channels=str(channels), gamma=0.1, n_train=len(data.docs))
        path = out / f"model-{strand.value}.json"
        io.ModelFile(strand.value, fz, model, snap).save(path)
        print(f"{strand.title}: trained on {len(data.docs)} posts, {fz.dim} features -> {path}")
    errors.write(out)
    return 0


def _format_cv(results: dict) -> str:
    lines = []
    for strand, per_channel in results.items():
        lines.append(f"== {strand} ==")
        lines.append(f"{'Features':<16}{'P':>8}{'R':>8}{'F':>8}")
        for name, rep in per_channel.items():
            lines.append(f"{name:<16}{rep.weighted_precision:>8.3f}{rep.weighted_recall:>8.3f}{rep.weighted_f1:>8.3f}")
        for name, rep in per_channel.items():
            lines.append("")
            lines.append(f"Confusion ({name}); rows annotated, columns predicted")
            titles = [c.title for c in ConflatedClass]
            width = max(len(t) for t in titles) + 2
            lines.append(" " * width + "".join(t.rjust(width) for t in titles))
            for title, row in zip(titles, rep.confusion):
                lines.append(title.ljust(width) + "".join(str(v).rjust(width) for v in row))
            lines.append(f"{'class':<{width}}" + "".join(f"{'P/R/F':>{width}}" for _ in titles))
            lines.append(" " * width + "".join(
                f"{p:.2f}/{r:.2f}/{f:.2f}".rjust(width) for p, r, f in zip(rep.precision, rep.recall, rep.f1)))
        lines.append("")
    return "\n".join(lines)


def cmd_cv(cfg: RunConfig) -> int:
    out = _out(cfg)
    errors = io.ErrorLog("cv")
    channel_sets = cfg.channel_sets()
    settings = cfg.settings()
    threads, gold = _threads(cfg), _gold(cfg)
    parses = _parses(cfg, channel_sets)
    lexicon = _load_lexicon(cfg, errors)
    results: dict = {}
    rows = []
    for strand in strand_selection(cfg.strand):
        results[strand.title] = {}
        for channels in channel_sets:
            data = labeled_docs(threads, gold, strand, parses, channels, errors, cfg.word_ngrams, cfg.dep_ngrams)
            if len(data.docs) < cfg.folds:
                raise TooFewSamples(f"{strand.value}/{channels}: {len(data.docs)} posts for {cfg.folds} folds")
            res = cross_validate_docs(data, channels, lexicon, settings, cfg.folds)
            results[strand.title][str(channels)] = res.report
            rows.append({"strand": strand.value, "channels": str(channels), "n": len(data.docs), **res.report.as_dict()})
    text = _format_cv(results)
    _write(out / "cv.txt", text)
    _write(out / "cv.json", io.dumps({"seed": cfg.seed, "folds": cfg.folds, "rows": rows}) + "\n")
    with open(out / "cv.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["strand", "channels", "n", "precision", "recall", "f1"])
        for r in rows:
            w.writerow([r["strand"], r["channels"], r["n"], repr(r["weighted_precision"]),
                        repr(r["weighted_recall"]), repr(r["weighted_f1"])])
    errors.write(out)
    print(text, end="")
    return 0


def cmd_classify(cfg: RunConfig) -> int:
    out = _out(cfg)
    errors = io.ErrorLog("classify")
    if cfg.model is not None:
        model_path = Path(cfg.model)
    elif cfg.strand != "all":
        model_path = out / f"model-{cfg.strand}.json"
    else:
        raise CounterthreadError("classify needs --model or a single --strand")
    mf = io.ModelFile.load(model_path)
    posts = io.read_posts_csv(_require(cfg, "input"))
    parses = parse_conllu(cfg.parses) if mf.featurizer.channels.deps and cfg.parses else None
    ids, docs = make_docs(posts, parses, mf.featurizer.channels, errors,
                          tuple(mf.config["word_ngrams"]), tuple(mf.config["dep_ngrams"]))
    preds = classify_docs(mf.featurizer, mf.model, docs)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["post_id", "class", "label"])
    for pid, c in zip(ids, preds):
        w.writerow([pid, int(c), ConflatedClass(int(c)).title])
    _write(out / "predictions.csv", buf.getvalue())
    errors.write(out)
    print(f"classified {len(ids)} posts, skipped {len(posts) - len(ids)}")
    return 0


def cmd_report(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    parts = []
    for title, name in (("Annotation distribution", "distribution.txt"),
                        ("Thread length model", "regression.txt"),
                        ("Cross-validation", "cv.txt")):
        path = out / name
        if path.exists():
            parts.append(f"# {title}\n\n{path.read_text(encoding='utf-8')}")
    if not parts:
        raise CounterthreadError(f"nothing to report in {out}")
    text = "\n".join(parts)
    _write(out / "report.txt", text)
    print(text, end="")
    return 0


HANDLERS = {
    "ingest": cmd_ingest,
    "collate": cmd_collate,
    "regress": cmd_regress,
    "train": cmd_train,
    "cv": cmd_cv,
    "classify": cmd_classify,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return HANDLERS[args.command](cfg)
    except (CounterthreadError, ValueError, FileNotFoundError) as exc:
        print(f"counterthread {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
