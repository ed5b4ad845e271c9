import csv
import json
from pathlib import Path

import numpy as np
import pytest

from counterthread import io
from counterthread.cli import main
from counterthread.errors import VersionMismatch
from counterthread.pipeline import TrainSettings, classify_docs, fit_model, make_docs
from counterthread.textfeat.conllu import parse_conllu
from counterthread.textfeat.features import ChannelSet

from synth import planted_distribution_annotations, write_cli_corpus


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    return write_cli_corpus(root)


@pytest.fixture(scope="module")
def collated(corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("out")
    assert main(["ingest", "--threads", str(corpus["threads"]), "--out", str(out)]) == 0
    assert main(["collate", "--annotations", str(corpus["annotations"]), "--out", str(out)]) == 0
    return out


def run(*args):
    return main([str(a) for a in args])


def sidecar(out, command):
    return list(io.read_jsonl(Path(out) / f"{command}.errors.jsonl"))


# -- ingest -------------------------------------------------------------------

def test_ingest_300_threads(collated):
    store = list(io.read_jsonl(collated / "threads.jsonl"))
    assert len(store) == 300
    assert sidecar(collated, "ingest") == []
    per_strand = {s: sum(1 for t in store if t["strand"] == s) for s in ("sexist", "racist", "homophobic")}
    assert per_strand == {"sexist": 100, "racist": 100, "homophobic": 100}


def test_ingest_post_recount(corpus, collated):
    store = list(io.read_jsonl(collated / "threads.jsonl"))
    assert sum(len(t["posts"]) for t in store) == len(corpus["gold"])


def test_ingest_empty_dir(tmp_path):
    (tmp_path / "threads").mkdir()
    assert run("ingest", "--threads", tmp_path / "threads", "--out", tmp_path / "o") == 0
    assert (tmp_path / "o" / "threads.jsonl").read_text() == ""
    assert [e["error"] for e in sidecar(tmp_path / "o", "ingest")] == ["EmptyInput"]


def test_ingest_collects_bad_files(tmp_path):
    d = tmp_path / "threads" / "racist"
    d.mkdir(parents=True)
    (d / "good.csv").write_text("post_id,author,reply_to,text\np1,a,,hello\np2,b,p1,hi\n")
    (d / "two_sources.csv").write_text("post_id,author,reply_to,text\np1,a,,x\np2,b,,y\n")
    (d / "bad_header.csv").write_text("id,who,text\n1,a,b\n")
    (d / "ragged.csv").write_text('post_id,author,reply_to,text\np1,a,,"unterminated\n')
    (tmp_path / "threads" / "loose.csv").write_text("post_id,author,reply_to,text\np1,a,,x\n")
    assert run("ingest", "--threads", tmp_path / "threads", "--out", tmp_path / "o") == 0
    store = list(io.read_jsonl(tmp_path / "o" / "threads.jsonl"))
    assert [t["thread_id"] for t in store] == ["good"]
    kinds = sorted(e["error"] for e in sidecar(tmp_path / "o", "ingest"))
    assert kinds == ["MalformedCsv", "MalformedCsv", "MalformedCsv", "MultipleSources"]


# -- collate ------------------------------------------------------------------

def test_collate_full_retention(corpus, collated):
    labels = {o["post_id"]: o["class"] for o in io.read_jsonl(collated / "labels.jsonl")}
    assert labels == corpus["gold"]
    dist = json.loads((collated / "distribution.json").read_text())
    assert dist["retained_posts"] == dist["annotated_posts"] == len(corpus["gold"])


def test_collate_two_two_split_dropped(tmp_path):
    d = tmp_path / "threads" / "sexist"
    d.mkdir(parents=True)
    (d / "t.csv").write_text("post_id,author,reply_to,text\np1,a,,x\np2,b,p1,y\np3,c,p1,z\n")
    ann = tmp_path / "a.csv"
    ann.write_text(
        "post_id,annotator_id,codes\n"
        + "".join(f"p1,a{i},0\n" for i in range(4))
        + "p2,a0,2\np2,a1,2\np2,a2,6\np2,a3,6\n"
        + "p3,a0,2;3\np3,a1,2\np3,a2,2\np3,a3,6\n"
    )
    out = tmp_path / "o"
    assert run("ingest", "--threads", tmp_path / "threads", "--out", out) == 0
    assert run("collate", "--annotations", ann, "--out", out) == 0
    labels = {o["post_id"]: o for o in io.read_jsonl(out / "labels.jsonl")}
    assert sorted(labels) == ["p1", "p3"]
    assert labels["p3"]["codes"] == ["2"] and labels["p3"]["agreement"] == 0.75


def test_collate_planted_distribution(corpus, collated, tmp_path, capsys):
    store = list(io.read_jsonl(collated / "threads.jsonl"))
    sexist_ids = [p["post_id"] for t in store if t["strand"] == "sexist" for p in t["posts"]]
    ann = tmp_path / "planted.csv"
    planted_distribution_annotations(ann, sexist_ids)
    out = tmp_path / "o"
    out.mkdir()
    (out / "threads.jsonl").write_bytes((collated / "threads.jsonl").read_bytes())
    capsys.readouterr()
    assert run("collate", "--annotations", ann, "--out", out, "--strand", "sexist") == 0
    printed = capsys.readouterr().out
    dist = json.loads((out / "distribution.json").read_text())
    assert dist["counts"]["sexist"] == [228, 58, 8, 165]
    assert "Sexist" in printed and "228" in printed and "Disagree&Insults" in printed


def test_collate_errors_to_sidecar(collated, tmp_path):
    ann = tmp_path / "a.csv"
    ann.write_text("post_id,annotator_id,codes\nnope,a0,1\nsex000_p0,a0,9\nsex000_p0,a1,x\n")
    out = tmp_path / "o"
    out.mkdir()
    (out / "threads.jsonl").write_bytes((collated / "threads.jsonl").read_bytes())
    assert run("collate", "--annotations", ann, "--out", out) == 0
    kinds = sorted(e["error"] for e in sidecar(out, "collate"))
    assert kinds == ["MalformedCodes", "MalformedCodes", "UnknownPostId"]


# -- regress ------------------------------------------------------------------

def test_regress_planted_relation(collated, capsys):
    capsys.readouterr()
    assert run("regress", "--strand", "sexist", "--out", collated) == 0
    text = capsys.readouterr().out
    rows = json.loads((collated / "regression.json").read_text())["rows"]
    disagree = next(r for r in rows if r["term"] == "disagree")
    assert abs(disagree["coef"] - 2) <= 0.05
    assert disagree["stars"] == "***"
    hate = next(r for r in rows if r["term"] == "hatecount")
    assert hate["omitted"]
    assert "0 (omitted)" in text


def test_regress_single_thread(tmp_path, capsys):
    d = tmp_path / "threads" / "sexist"
    d.mkdir(parents=True)
    (d / "t.csv").write_text("post_id,author,reply_to,text\np1,a,,x\np2,b,p1,y\n")
    ann = tmp_path / "a.csv"
    ann.write_text("post_id,annotator_id,codes\n" + "".join(f"p2,a{i},2\n" for i in range(4)))
    out = tmp_path / "o"
    run("ingest", "--threads", tmp_path / "threads", "--out", out)
    run("collate", "--annotations", ann, "--out", out)
    capsys.readouterr()
    assert run("regress", "--strand", "sexist", "--out", out) == 2
    assert "InsufficientRows" in capsys.readouterr().err


# -- train / classify ---------------------------------------------------------

def _posts_csv(path, corpus, strand):
    store_posts = []
    for f in sorted((corpus["threads"] / strand).glob("*.csv")):
        with open(f, encoding="utf-8", newline="") as fh:
            store_posts.extend((r["post_id"], r["text"]) for r in csv.DictReader(fh))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["post_id", "text"])
        w.writerows(store_posts)
    return store_posts


@pytest.mark.parametrize("channels", ["words", "both+lexicon"])
def test_train_classify_roundtrip(corpus, collated, tmp_path, channels):
    out = tmp_path / "o"
    out.mkdir()
    for name in ("threads.jsonl", "labels.jsonl"):
        (out / name).write_bytes((collated / name).read_bytes())
    lex = tmp_path / "lex.txt"
    lex.write_text("w0x1\nw2x3 common4\n")
    common = ["--out", out, "--strand", "racist", "--channels", channels, "--k", 500,
              "--parses", corpus["parses"], "--lexicon", lex]
    assert run("train", *common) == 0
    posts = _posts_csv(tmp_path / "posts.csv", corpus, "racist")
    assert run("classify", *common, "--input", tmp_path / "posts.csv") == 0
    with open(out / "predictions.csv", encoding="utf-8") as fh:
        got = [(r["post_id"], int(r["class"])) for r in csv.DictReader(fh)]

    # in-memory reference on the same inputs
    cs = ChannelSet.parse(channels)
    log = io.ErrorLog("t")
    parses = parse_conllu(corpus["parses"])
    train_posts = [(pid, text) for pid, text in posts]
    ids, docs = make_docs(train_posts, parses, cs, log)
    labels = np.array([corpus["gold"][pid] for pid in ids])
    from counterthread.textfeat.lexicon import load_lexicon
    fz, model = fit_model(docs, labels, cs, load_lexicon(lex) if cs.lexicon else None, TrainSettings(k=500))
    expected = list(zip(ids, (int(c) for c in classify_docs(fz, model, docs))))
    assert got == expected
    assert np.mean([c for _, c in got] == labels) >= 0.95


def test_model_file_byte_roundtrip(collated, tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    for name in ("threads.jsonl", "labels.jsonl"):
        (out / name).write_bytes((collated / name).read_bytes())
    assert run("train", "--out", out, "--strand", "homophobic", "--k", 300) == 0
    path = out / "model-homophobic.json"
    first = path.read_bytes()
    mf = io.ModelFile.load(path)
    mf.save(tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == first
    assert json.loads(first)["format_version"] == io.MODEL_FORMAT_VERSION


def test_classify_version_mismatch(collated, tmp_path, capsys):
    out = tmp_path / "o"
    out.mkdir()
    for name in ("threads.jsonl", "labels.jsonl"):
        (out / name).write_bytes((collated / name).read_bytes())
    run("train", "--out", out, "--strand", "sexist", "--k", 100)
    path = out / "model-sexist.json"
    obj = json.loads(path.read_text())
    obj["format_version"] = 999
    path.write_text(json.dumps(obj))
    with pytest.raises(VersionMismatch):
        io.ModelFile.load(path)
    (tmp_path / "p.csv").write_text("post_id,text\nx,hello\n")
    capsys.readouterr()
    assert run("classify", "--out", out, "--model", path, "--input", tmp_path / "p.csv") == 2
    assert "VersionMismatch" in capsys.readouterr().err


def test_classify_missing_parse_skipped(collated, corpus, tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    for name in ("threads.jsonl", "labels.jsonl"):
        (out / name).write_bytes((collated / name).read_bytes())
    run("train", "--out", out, "--strand", "sexist", "--channels", "deps", "--parses", corpus["parses"], "--k", 200)
    (tmp_path / "p.csv").write_text("post_id,text\nsex000_p0,w0x1\nunparsed,w1x1\n")
    assert run("classify", "--out", out, "--strand", "sexist", "--channels", "deps",
               "--parses", corpus["parses"], "--input", tmp_path / "p.csv") == 0
    rows = (out / "predictions.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].startswith("sex000_p0,")
    assert [e["error"] for e in sidecar(out, "classify")] == ["MissingParses"]


# -- cv / report / determinism ------------------------------------------------

def test_cv_outputs_and_determinism(collated, corpus, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        out.mkdir()
        for f in ("threads.jsonl", "labels.jsonl"):
            (out / f).write_bytes((collated / f).read_bytes())
        assert run("cv", "--out", out, "--strand", "sexist", "--channels", "words,both",
                   "--parses", corpus["parses"], "--k", 300, "--folds", 5) == 0
        outs.append(out)
    for f in ("cv.txt", "cv.json", "cv.csv"):
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    rows = json.loads((outs[0] / "cv.json").read_text())["rows"]
    assert [r["channels"] for r in rows] == ["words", "both"]
    assert all(r["weighted_f1"] >= 0.9 for r in rows)
    text = (outs[0] / "cv.txt").read_text()
    assert text.count("Confusion") == 2


def test_cv_too_few_samples(tmp_path, capsys):
    d = tmp_path / "threads" / "sexist"
    d.mkdir(parents=True)
    (d / "t.csv").write_text("post_id,author,reply_to,text\np1,a,,x\np2,b,p1,y\n")
    ann = tmp_path / "a.csv"
    ann.write_text("post_id,annotator_id,codes\n" + "".join(f"p{j},a{i},{j - 1}\n" for j in (1, 2) for i in range(4)))
    out = tmp_path / "o"
    run("ingest", "--threads", tmp_path / "threads", "--out", out)
    run("collate", "--annotations", ann, "--out", out)
    capsys.readouterr()
    assert run("cv", "--out", out, "--strand", "sexist", "--folds", 10) == 2
    assert "TooFewSamples" in capsys.readouterr().err


def test_commands_idempotent(corpus, tmp_path):
    def pipeline(out):
        run("ingest", "--threads", corpus["threads"], "--out", out)
        run("collate", "--annotations", corpus["annotations"], "--out", out)
        run("regress", "--out", out)
        run("train", "--out", out, "--strand", "racist", "--k", 200)
        run("report", "--out", out)
        return {p.name: p.read_bytes() for p in sorted(Path(out).iterdir())}

    a = pipeline(tmp_path / "a")
    b = pipeline(tmp_path / "a")
    c = pipeline(tmp_path / "c")
    assert a == b == c
    assert "report.txt" in a and b"Thread length model" in a["report.txt"]


def test_config_file_and_override(corpus, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"threads": str(corpus["threads"]), "out": str(tmp_path / "o"), "seed": 7}))
    assert run("ingest", "--config", cfg) == 0
    assert (tmp_path / "o" / "threads.jsonl").exists()
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run("ingest", "--config", cfg) == 2
