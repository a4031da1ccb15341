import numpy as np
import pytest

from vernqa.corpus import Corpus, QAPair
from vernqa.encoder import (
    ANSWER_HEAD,
    EncoderConfig,
    forward_batch,
    init_params,
    seq_batch,
)
from vernqa.simindex import IndexEntry, build_index
from vernqa.textpipe import build_vocab, encode_text
from vernqa.trainer import AdamState, TrainConfig, train_epoch

SYMPTOMS = ["fever", "cough", "rash", "headache",
            "nausea", "fatigue", "dizziness", "cramp"]
BODY_PARTS = ["chest", "head", "skin", "stomach",
              "back", "knee", "throat", "ear"]


def make_synthetic_corpus(n: int = 64) -> Corpus:
    """Templated QA pairs with distinct (symptom, body part) combinations."""
    pairs = []
    for i in range(n):
        s = SYMPTOMS[i % len(SYMPTOMS)]
        p = BODY_PARTS[(i // len(SYMPTOMS)) % len(BODY_PARTS)]
        pairs.append(QAPair(
            id=f"p{i:03d}",
            question=f"what should i do about {s} in my {p} area",
            answer=f"for {s} affecting the {p} rest and monitor the {p} {s} closely",
        ))
    return Corpus(pairs=pairs, name="synthetic")


def make_padded_seq(rng, vocab_size, max_len, true_len):
    """Random well-formed token id row: CLS body EOS PAD*."""
    ids = np.zeros(max_len, dtype=np.int64)
    ids[1:true_len - 1] = rng.integers(4, vocab_size, size=true_len - 2)
    ids[0], ids[true_len - 1] = 2, 3
    return ids


def build_answer_index(corpus, vocab, params):
    seqs = [encode_text(vocab, p.answer, params.config.max_len) for p in corpus]
    ids, lens = seq_batch(seqs)
    emb, _ = forward_batch(params, ids, lens, ANSWER_HEAD)
    entries = [IndexEntry(answer_id=p.id, vector=emb[j].astype(np.float32),
                          payload=p.answer)
               for j, p in enumerate(corpus)]
    return build_index(entries)


def train_to_overfit(corpus, vocab, enc_cfg, max_epochs=500,
                     check_every=5, seed=7):
    """Train until in-batch diag accuracy and full-index strict accuracy
    both reach 1.0; returns (params, state, epochs_used, loss_history).
    """
    from vernqa.simindex import search_topk

    params = init_params(enc_cfg)
    tcfg = TrainConfig(batch_size=16, learning_rate=1e-3, shuffle_seed=seed)
    state = AdamState()
    losses = []

    def strict(params):
        index = build_answer_index(corpus, vocab, params)
        qs = [encode_text(vocab, p.question, enc_cfg.max_len) for p in corpus]
        qi, ql = seq_batch(qs)
        qe, _ = forward_batch(params, qi, ql, "question")
        hits = sum(1 for j, p in enumerate(corpus)
                   if search_topk(index, qe[j], 1)[0].answer_id == p.id)
        return hits / len(corpus)

    for epoch in range(max_epochs):
        report = train_epoch(params, state, corpus, vocab, tcfg, epoch=epoch)
        losses.append(report.mean_loss)
        if (report.diag_accuracy >= 1.0 and epoch % check_every == 0
                and strict(params) >= 1.0):
            return params, state, epoch + 1, losses
    return params, state, max_epochs, losses


@pytest.fixture(scope="session")
def overfit_artifacts():
    """64-pair corpus trained to strict accuracy 1.0 (shared, read-only)."""
    corpus = make_synthetic_corpus(64)
    vocab = build_vocab(corpus, max_size=512, min_freq=1)
    enc_cfg = EncoderConfig(vocab_size=vocab.size, seed=7)
    params, state, epochs, losses = train_to_overfit(corpus, vocab, enc_cfg)
    index = build_answer_index(corpus, vocab, params)
    return {
        "corpus": corpus, "vocab": vocab, "enc_cfg": enc_cfg,
        "params": params, "opt_state": state, "index": index,
        "epochs": epochs, "losses": losses,
    }


@pytest.fixture
def tiny_setup():
    """Small untrained encoder over a 12-pair corpus, for contract tests."""
    corpus = make_synthetic_corpus(12)
    vocab = build_vocab(corpus, max_size=256, min_freq=1)
    enc_cfg = EncoderConfig(vocab_size=vocab.size, d_model=16, n_layers=1,
                            n_heads=2, d_ff=32, max_len=32, d_embed=8, seed=5)
    params = init_params(enc_cfg)
    index = build_answer_index(corpus, vocab, params)
    return {"corpus": corpus, "vocab": vocab, "enc_cfg": enc_cfg,
            "params": params, "index": index}
