"""Dual-encoder training: in-batch dot-product softmax cross-entropy.

For a batch of B question/answer embedding pairs the logits are
S = Q A^T; every other answer in the batch acts as a negative for each
question, the target being the diagonal.  Gradients flow through both
projection heads and the shared trunk; updates are Adam.  Checkpoints
are a binary format with a JSON header and trailing CRC32.
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .encoder import (
    ANSWER_HEAD,
    QUESTION_HEAD,
    EncoderConfig,
    EncoderParams,
    backward_batch,
    forward_batch,
    seq_batch,
)
from .textpipe import Vocabulary, encode_text

CHECKPOINT_MAGIC = b"VQACKPT1"
CHECKPOINT_VERSION = (1, 0)


class CheckpointError(IOError):
    """Corrupt, truncated, or unsupported checkpoint file."""


@dataclass
class TrainConfig:
    batch_size: int = 16
    epochs: int = 1
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    shuffle_seed: int = 0
    checkpoint_path: str | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0 and self.learning_rate != 0.0:
            raise ValueError("learning_rate must be >= 0")


@dataclass
class BatchLossReport:
    loss: float
    logits: np.ndarray
    diag_rank_hits: int


@dataclass
class EpochReport:
    mean_loss: float
    diag_accuracy: float
    n_batches: int


def batch_loss(Q: np.ndarray, A: np.ndarray) -> BatchLossReport:
    """Cross-entropy of row-softmaxed Q A^T against the diagonal."""
    Q = np.asarray(Q, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    if Q.shape != A.shape or Q.ndim != 2 or Q.shape[0] < 1:
        raise ValueError(f"Q and A must share shape (B, d), got {Q.shape} vs {A.shape}")
    if not (np.isfinite(Q).all() and np.isfinite(A).all()):
        raise ValueError("non-finite embedding input")
    B = Q.shape[0]
    S = Q @ A.T
    m = S.max(axis=1, keepdims=True)
    logZ = m + np.log(np.exp(S - m).sum(axis=1, keepdims=True))
    log_p_diag = np.diag(S) - logZ[:, 0]
    loss = float(-log_p_diag.mean())
    hits = int((S.argmax(axis=1) == np.arange(B)).sum())
    return BatchLossReport(loss=loss, logits=S, diag_rank_hits=hits)


def batch_loss_grads(Q: np.ndarray, A: np.ndarray):
    """(report, dQ, dA); dS = (P - I)/B with P the row softmax."""
    report = batch_loss(Q, A)
    S = report.logits
    B = S.shape[0]
    P = np.exp(S - S.max(axis=1, keepdims=True))
    P /= P.sum(axis=1, keepdims=True)
    dS = (P - np.eye(B)) / B
    return report, dS @ A, dS.T @ Q


@dataclass
class AdamState:
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: EncoderParams, grads: dict[str, np.ndarray],
              state: AdamState, cfg: TrainConfig) -> None:
    if not state.m:
        for name, arr in params.tensors.items():
            state.m[name] = np.zeros_like(arr)
            state.v[name] = np.zeros_like(arr)
    state.step += 1
    b1, b2, eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
    bc1 = 1.0 - b1 ** state.step
    bc2 = 1.0 - b2 ** state.step
    for name, g in grads.items():
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        params.tensors[name] -= cfg.learning_rate * (m / bc1) / (
            np.sqrt(v / bc2) + eps)


def _encode_corpus(corpus: Corpus, vocab: Vocabulary, max_len: int):
    qs, qlens = seq_batch([encode_text(vocab, p.question, max_len) for p in corpus])
    ans, alens = seq_batch([encode_text(vocab, p.answer, max_len) for p in corpus])
    return qs, qlens, ans, alens


def train_epoch(params: EncoderParams, state: AdamState, train: Corpus,
                vocab: Vocabulary, cfg: TrainConfig, epoch: int = 0) -> EpochReport:
    """One pass over the corpus: seeded shuffle, batched updates.

    The last short batch is trained, not dropped.  Deterministic for a
    given (corpus, seed, epoch).
    """
    if len(train) == 0:
        raise ValueError("training corpus is empty")
    max_len = params.config.max_len
    qs, qlens, ans, alens = _encode_corpus(train, vocab, max_len)
    rng = np.random.default_rng((cfg.shuffle_seed, epoch))
    order = rng.permutation(len(train))

    losses = []
    hits = 0
    for start in range(0, len(order), cfg.batch_size):
        idx = order[start:start + cfg.batch_size]
        q_emb, q_cache = forward_batch(params, qs[idx], qlens[idx],
                                       QUESTION_HEAD, want_cache=True)
        a_emb, a_cache = forward_batch(params, ans[idx], alens[idx],
                                       ANSWER_HEAD, want_cache=True)
        report, dQ, dA = batch_loss_grads(q_emb, a_emb)
        if not np.isfinite(report.loss):
            raise FloatingPointError(
                f"non-finite loss {report.loss} at epoch {epoch}, "
                f"batch starting {start}")
        grads = backward_batch(params, q_cache, dQ)
        for name, g in backward_batch(params, a_cache, dA).items():
            grads[name] += g
        adam_step(params, grads, state, cfg)
        losses.append(report.loss * len(idx))
        hits += report.diag_rank_hits
    return EpochReport(
        mean_loss=sum(losses) / len(train),
        diag_accuracy=hits / len(train),
        n_batches=-(-len(train) // cfg.batch_size),
    )


def vocab_hash(vocab: Vocabulary) -> str:
    payload = "\n".join(vocab.id_to_token).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def _pack_tensor(name: str, arr: np.ndarray) -> bytes:
    if not arr.flags["C_CONTIGUOUS"]:
        arr = np.ascontiguousarray(arr)
    name_b = name.encode("utf-8")
    dtype_b = arr.dtype.str.encode("ascii")  # e.g. "<f8"
    parts = [struct.pack("<I", len(name_b)), name_b,
             struct.pack("<I", len(dtype_b)), dtype_b,
             struct.pack("<I", arr.ndim),
             struct.pack(f"<{arr.ndim}q", *arr.shape),
             arr.astype(arr.dtype.newbyteorder("<")).tobytes()]
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes, offset: int = 0):
        self.data = data
        self.pos = offset

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError("truncated file")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def _unpack_tensor(r: _Reader) -> tuple[str, np.ndarray]:
    name = r.take(r.u32()).decode("utf-8")
    dtype = np.dtype(r.take(r.u32()).decode("ascii"))
    ndim = r.u32()
    shape = struct.unpack(f"<{ndim}q", r.take(8 * ndim))
    size = int(np.prod(shape)) if ndim else 1
    arr = np.frombuffer(r.take(size * dtype.itemsize), dtype=dtype).reshape(shape)
    return name, arr.copy()


def save_checkpoint(params: EncoderParams, state: AdamState, cfg: TrainConfig,
                    vocab: Vocabulary, path) -> None:
    header = {
        "version": list(CHECKPOINT_VERSION),
        "encoder_config": params.config.to_dict(),
        "vocab_sha256": vocab_hash(vocab),
        "optimizer": {
            "learning_rate": cfg.learning_rate,
            "adam_beta1": cfg.adam_beta1,
            "adam_beta2": cfg.adam_beta2,
            "adam_eps": cfg.adam_eps,
            "step": state.step,
        },
    }
    header_b = json.dumps(header, sort_keys=True).encode("utf-8")
    body = [CHECKPOINT_MAGIC, struct.pack("<I", len(header_b)), header_b]
    names = params.names()
    body.append(struct.pack("<I", len(names)))
    for name in names:
        body.append(_pack_tensor(name, params.tensors[name]))
    opt_names = sorted(state.m) if state.m else []
    body.append(struct.pack("<I", len(opt_names)))
    for name in opt_names:
        body.append(_pack_tensor("m." + name, state.m[name]))
        body.append(_pack_tensor("v." + name, state.v[name]))
    blob = b"".join(body)
    blob += struct.pack("<I", zlib.crc32(blob) & 0xFFFFFFFF)
    with open(path, "wb") as f:
        f.write(blob)


def load_checkpoint(path) -> tuple[EncoderParams, AdamState, TrainConfig, str]:
    """Returns (params, optimizer state, train config, vocab sha256)."""
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < len(CHECKPOINT_MAGIC) + 8:
        raise CheckpointError("truncated file")
    if blob[:len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CheckpointError("bad magic; not a checkpoint file")
    stored_crc = struct.unpack("<I", blob[-4:])[0]
    if zlib.crc32(blob[:-4]) & 0xFFFFFFFF != stored_crc:
        raise CheckpointError("checksum mismatch; file corrupted")
    r = _Reader(blob[:-4], offset=len(CHECKPOINT_MAGIC))
    header = json.loads(r.take(r.u32()).decode("utf-8"))
    major = header["version"][0]
    if major > CHECKPOINT_VERSION[0]:
        raise CheckpointError(
            f"unsupported version {header['version']} "
            f"(supported major {CHECKPOINT_VERSION[0]})")
    enc_cfg = EncoderConfig.from_dict(header["encoder_config"])
    tensors = {}
    for _ in range(r.u32()):
        name, arr = _unpack_tensor(r)
        tensors[name] = arr
    params = EncoderParams(config=enc_cfg, tensors=tensors)
    state = AdamState(step=header["optimizer"]["step"])
    for _ in range(r.u32()):
        name, m_arr = _unpack_tensor(r)
        name2, v_arr = _unpack_tensor(r)
        if not (name.startswith("m.") and name2.startswith("v.")):
            raise CheckpointError("malformed optimizer block")
        state.m[name[2:]] = m_arr
        state.v[name2[2:]] = v_arr
    opt = header["optimizer"]
    cfg = TrainConfig(
        learning_rate=opt["learning_rate"], adam_beta1=opt["adam_beta1"],
        adam_beta2=opt["adam_beta2"], adam_eps=opt["adam_eps"])
    return params, state, cfg, header["vocab_sha256"]
