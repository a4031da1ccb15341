import json

import pytest

from conftest import make_synthetic_corpus
from vernqa.cli import main
from vernqa.corpus import save_corpus


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Full CLI workflow: corpus -> vocab -> train -> index."""
    d = tmp_path_factory.mktemp("cli")
    corpus_path = d / "corpus.jsonl"
    save_corpus(make_synthetic_corpus(16), corpus_path)
    assert main(["vocab-build", "--corpus", str(corpus_path),
                 "--min-freq", "1", "--out", str(d / "vocab.txt")]) == 0
    assert main(["train", "--corpus", str(corpus_path),
                 "--vocab", str(d / "vocab.txt"),
                 "--out", str(d / "model.ckpt"),
                 "--epochs", "2", "--d-model", "16", "--n-layers", "1",
                 "--n-heads", "2", "--d-ff", "32", "--d-embed", "8",
                 "--max-len", "32", "--json"]) == 0
    assert main(["index-build", "--corpus", str(corpus_path),
                 "--vocab", str(d / "vocab.txt"),
                 "--checkpoint", str(d / "model.ckpt"),
                 "--out", str(d / "index.bin")]) == 0
    return d


def test_unknown_subcommand_exit_1(capsys):
    assert main(["frobnicate"]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_flag_exit_1(capsys):
    assert main(["corpus-dedupe", "--nope"]) == 1
    assert "usage" in capsys.readouterr().err


def test_missing_file_exit_2(tmp_path, capsys):
    assert main(["corpus-dedupe", "--corpus", str(tmp_path / "missing.jsonl"),
                 "--out", str(tmp_path / "o.jsonl")]) == 2


def test_corpus_dedupe_and_split(tmp_path, capsys):
    corpus_path = tmp_path / "c.jsonl"
    save_corpus(make_synthetic_corpus(10), corpus_path)
    assert main(["corpus-dedupe", "--corpus", str(corpus_path),
                 "--out", str(tmp_path / "d.jsonl"), "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["kept_pairs"] == 10
    assert main(["corpus-split", "--corpus", str(corpus_path),
                 "--fraction", "0.2", "--seed", "3",
                 "--train-out", str(tmp_path / "tr.jsonl"),
                 "--test-out", str(tmp_path / "te.jsonl"), "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["train_pairs"] == 8 and out["test_pairs"] == 2


def test_ask_happy_path(workdir, capsys):
    assert main(["ask", "--q", "what about fever in my chest",
                 "--vocab", str(workdir / "vocab.txt"),
                 "--checkpoint", str(workdir / "model.ckpt"),
                 "--index", str(workdir / "index.bin")]) == 0
    assert capsys.readouterr().out.strip()


def test_ask_json_schema(workdir, capsys):
    assert main(["ask", "--q", "fever", "--json",
                 "--vocab", str(workdir / "vocab.txt"),
                 "--checkpoint", str(workdir / "model.ckpt"),
                 "--index", str(workdir / "index.bin")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["answer"]
    assert all({"answer_id", "score", "rank"} <= set(h) for h in out["hits"])


def test_eval_recall1_equals_strict(workdir, capsys):
    assert main(["eval", "--corpus", str(workdir / "corpus.jsonl"),
                 "--vocab", str(workdir / "vocab.txt"),
                 "--checkpoint", str(workdir / "model.ckpt"),
                 "--index", str(workdir / "index.bin"),
                 "--k", "1,5", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["recall"]["1"] == report["strict_accuracy"]


def test_index_quantize(workdir, capsys):
    assert main(["index-quantize", "--index", str(workdir / "index.bin"),
                 "--out", str(workdir / "index.q.bin"), "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["entries"] == 16


def test_summarize(workdir, capsys):
    assert main(["summarize", "--text", "Fever noted. Gave rest. Pain gone.",
                 "--vocab", str(workdir / "vocab.txt"),
                 "--checkpoint", str(workdir / "model.ckpt"), "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert 1 <= len(out["summary_sentences"]) <= 3
