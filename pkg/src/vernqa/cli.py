"""Single command-line entry point for every pipeline stage.

Exit codes: 0 success, 1 usage error, 2 runtime error.  Data-producing
subcommands accept --json for machine-readable output.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .corpus import dedupe, load_corpus, save_corpus, split
from .encoder import ANSWER_HEAD, EncoderConfig, forward_batch, init_params, seq_batch
from .evalkit import run_eval
from .langbridge import DictionaryTranslator, TranslatorRegistry
from .pipeline import Pipeline, PipelineError
from .simindex import IndexEntry, build_index, load_index, quantize, save_index
from .summarizer import SummaryConfig, split_sentences, summarize
from .textpipe import (
    DEFAULT_MIN_FREQ,
    DEFAULT_VOCAB_SIZE,
    build_vocab,
    encode_text,
    load_vocab,
    save_vocab,
)
from .trainer import AdamState, TrainConfig, load_checkpoint, save_checkpoint, train_epoch


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _emit(args, data: dict, human: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(data, ensure_ascii=False, indent=2))
    else:
        print(human)


def _registry_from_args(args) -> TranslatorRegistry:
    registry = TranslatorRegistry()
    for spec in getattr(args, "dict", None) or []:
        src, tgt, path = spec.split(":", 2)
        registry.register(src, tgt, DictionaryTranslator.from_tsv(path))
    return registry


def _load_pipeline_args(args) -> Pipeline:
    vocab = load_vocab(args.vocab)
    params, _, _, _ = load_checkpoint(args.checkpoint)
    index = load_index(args.index)
    return Pipeline(vocab=vocab, params=params, index=index,
                    registry=_registry_from_args(args),
                    composer_mode=getattr(args, "mode", "stitch"))


def cmd_corpus_dedupe(args) -> int:
    c = load_corpus(args.corpus)
    out = dedupe(c)
    save_corpus(out, args.out)
    _emit(args, {"input_pairs": len(c), "kept_pairs": len(out), "out": args.out},
          f"kept {len(out)}/{len(c)} pairs -> {args.out}")
    return 0


def cmd_corpus_split(args) -> int:
    c = load_corpus(args.corpus)
    train, test = split(c, args.fraction, args.seed)
    save_corpus(train, args.train_out)
    save_corpus(test, args.test_out)
    _emit(args, {"train_pairs": len(train), "test_pairs": len(test),
                 "train_out": args.train_out, "test_out": args.test_out},
          f"train {len(train)} -> {args.train_out}; test {len(test)} -> {args.test_out}")
    return 0


def cmd_vocab_build(args) -> int:
    c = load_corpus(args.corpus)
    vocab = build_vocab(c, max_size=args.max_size, min_freq=args.min_freq)
    save_vocab(vocab, args.out)
    _emit(args, {"vocab_size": vocab.size, "out": args.out},
          f"vocabulary of {vocab.size} tokens -> {args.out}")
    return 0


def cmd_train(args) -> int:
    c = load_corpus(args.corpus)
    vocab = load_vocab(args.vocab)
    enc_cfg = EncoderConfig(
        vocab_size=vocab.size, d_model=args.d_model, n_layers=args.n_layers,
        n_heads=args.n_heads, d_ff=args.d_ff, max_len=args.max_len,
        d_embed=args.d_embed, seed=args.seed)
    params = init_params(enc_cfg)
    tcfg = TrainConfig(batch_size=args.batch_size, epochs=args.epochs,
                       learning_rate=args.lr, shuffle_seed=args.seed,
                       checkpoint_path=args.out)
    state = AdamState()
    reports = []
    for epoch in range(args.epochs):
        report = train_epoch(params, state, c, vocab, tcfg, epoch=epoch)
        reports.append({"epoch": epoch, "mean_loss": report.mean_loss,
                        "diag_accuracy": report.diag_accuracy})
        if not args.json:
            print(f"epoch {epoch:4d}  loss {report.mean_loss:.6f}  "
                  f"diag-acc {report.diag_accuracy:.3f}")
        if args.stop_at_full_accuracy and report.diag_accuracy >= 1.0:
            break
    save_checkpoint(params, state, tcfg, vocab, args.out)
    _emit(args, {"epochs": reports, "checkpoint": args.out},
          f"checkpoint -> {args.out}")
    return 0


def cmd_index_build(args) -> int:
    c = load_corpus(args.corpus)
    vocab = load_vocab(args.vocab)
    params, _, _, _ = load_checkpoint(args.checkpoint)
    seqs = [encode_text(vocab, p.answer, params.config.max_len) for p in c]
    ids, lens = seq_batch(seqs)
    entries = []
    for start in range(0, len(c), 64):
        emb, _ = forward_batch(params, ids[start:start + 64],
                               lens[start:start + 64], ANSWER_HEAD)
        for j, pair in enumerate(c.pairs[start:start + 64]):
            entries.append(IndexEntry(answer_id=pair.id,
                                      vector=emb[j].astype(np.float32),
                                      payload=pair.answer))
    index = build_index(entries)
    save_index(index, args.out)
    _emit(args, {"entries": len(index), "dimension": index.dim, "out": args.out},
          f"index of {len(index)} vectors (dim {index.dim}) -> {args.out}")
    return 0


def cmd_index_quantize(args) -> int:
    index = load_index(args.index)
    qindex = quantize(index)
    save_index(qindex, args.out)
    _emit(args, {"entries": len(qindex), "out": args.out},
          f"quantized index of {len(qindex)} vectors -> {args.out}")
    return 0


def cmd_ask(args) -> int:
    pipeline = _load_pipeline_args(args)
    bundle = pipeline.ask(args.q, lang=args.lang, top_k=args.k)
    _emit(args, {
        "answer": bundle.final_text, "lang": bundle.query_lang,
        "english_query": bundle.english_query,
        "hits": [{"answer_id": h.hit.answer_id, "score": h.hit.score,
                  "rank": h.hit.rank} for h in bundle.hits],
    }, bundle.final_text)
    return 0


def cmd_summarize(args) -> int:
    if args.file:
        with open(args.file, "r", encoding="utf-8") as f:
            text = f.read()
    else:
        text = args.text or ""
    vocab = load_vocab(args.vocab)
    params, _, _, _ = load_checkpoint(args.checkpoint)
    pipeline = Pipeline(vocab=vocab, params=params, index=None)  # embedder only
    sentences = split_sentences(text)
    if len(sentences) == 0:
        print("no sentences to summarize", file=sys.stderr)
        return 2
    cfg = SummaryConfig(kmeans_seed=args.seed, max_sentences=args.max_sentences)
    chosen = summarize(sentences, pipeline.embed_sentence, cfg)
    _emit(args, {"summary_sentences": [s.text for s in chosen],
                 "k_used": cfg.resolve_k(len(sentences))},
          "\n".join(s.text for s in chosen))
    return 0


def cmd_eval(args) -> int:
    pipeline = _load_pipeline_args(args)
    c = load_corpus(args.corpus)
    k_list = [int(k) for k in args.k.split(",")]
    report = run_eval(pipeline, c, k_list)
    if args.json:
        print(report.to_json())
    else:
        print(report.to_table())
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app_from_config

    app, cfg = app_from_config(args.config)
    uvicorn.run(app, host=cfg.host, port=cfg.port)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="vernqa", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("--json", action="store_true",
                       help="machine-readable JSON output")
        return p

    p = add("corpus-dedupe", cmd_corpus_dedupe, help="drop duplicate QA pairs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)

    p = add("corpus-split", cmd_corpus_split, help="seeded train/test split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)

    p = add("vocab-build", cmd_vocab_build, help="build a vocabulary file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--max-size", type=int, default=DEFAULT_VOCAB_SIZE)
    p.add_argument("--min-freq", type=int, default=DEFAULT_MIN_FREQ)
    p.add_argument("--out", required=True)

    p = add("train", cmd_train, help="train the dual encoder")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d-model", type=int, default=64)
    p.add_argument("--n-layers", type=int, default=2)
    p.add_argument("--n-heads", type=int, default=4)
    p.add_argument("--d-ff", type=int, default=128)
    p.add_argument("--d-embed", type=int, default=32)
    p.add_argument("--max-len", type=int, default=128)
    p.add_argument("--stop-at-full-accuracy", action="store_true")

    p = add("index-build", cmd_index_build, help="embed answers into an index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)

    p = add("index-quantize", cmd_index_quantize, help="int8-quantize an index")
    p.add_argument("--index", required=True)
    p.add_argument("--out", required=True)

    p = add("ask", cmd_ask, help="ask a question")
    p.add_argument("--q", required=True)
    p.add_argument("--lang", default="en")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--mode", default="stitch", choices=["top1", "stitch"])
    p.add_argument("--vocab", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--dict", action="append", metavar="SRC:TGT:TSV")

    p = add("summarize", cmd_summarize, help="extractive summary of a note")
    p.add_argument("--text")
    p.add_argument("--file")
    p.add_argument("--vocab", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-sentences", type=int, default=8)

    p = add("eval", cmd_eval, help="retrieval metrics over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--k", default="1,5")
    p.add_argument("--dict", action="append", metavar="SRC:TGT:TSV")

    p = add("serve", cmd_serve, help="run the HTTP service")
    p.add_argument("--config", required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    try:
        return args.fn(args)
    except (OSError, ValueError, PipelineError) as e:
        print(f"vernqa: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
