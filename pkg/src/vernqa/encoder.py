"""Toy-scale bidirectional transformer dual encoder.

Shared trunk (token + positional embeddings, pre-norm multi-head
self-attention and GELU feed-forward blocks with residuals, masked
mean-pooling) plus two separate dense projection heads, one for
questions and one for answers.  Forward and backward passes are written
explicitly in numpy so gradients can be checked against finite
differences; all training math is double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .textpipe import TokenSeq

LN_EPS = 1e-6
_MASK_NEG = -1e30

QUESTION_HEAD = "question"
ANSWER_HEAD = "answer"


@dataclass(frozen=True)
class EncoderConfig:
    vocab_size: int
    d_model: int = 64
    n_layers: int = 2
    n_heads: int = 4
    d_ff: int = 128
    max_len: int = 128
    d_embed: int = 32
    seed: int = 0

    def __post_init__(self):
        for name in ("vocab_size", "d_model", "n_layers", "n_heads", "d_ff",
                     "max_len", "d_embed"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.d_model % self.n_heads != 0:
            raise ValueError(
                f"d_model ({self.d_model}) not divisible by n_heads ({self.n_heads})"
            )

    def to_dict(self) -> dict:
        return {
            "vocab_size": self.vocab_size, "d_model": self.d_model,
            "n_layers": self.n_layers, "n_heads": self.n_heads,
            "d_ff": self.d_ff, "max_len": self.max_len,
            "d_embed": self.d_embed, "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EncoderConfig":
        return cls(**d)


@dataclass
class EncoderParams:
    """All weight tensors, keyed by canonical name.

    The trunk tensors are shared by both heads structurally: question and
    answer paths read the same arrays, only ``q_head.*`` / ``a_head.*``
    differ.
    """

    config: EncoderConfig
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def names(self) -> list[str]:
        return sorted(self.tensors)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def trunk_names(self) -> list[str]:
        return [n for n in self.names() if not n.startswith(("q_head.", "a_head."))]


def param_shapes(cfg: EncoderConfig) -> dict[str, tuple[int, ...]]:
    shapes: dict[str, tuple[int, ...]] = {
        "tok_emb": (cfg.vocab_size, cfg.d_model),
        "pos_emb": (cfg.max_len, cfg.d_model),
    }
    for i in range(cfg.n_layers):
        p = f"layers.{i}."
        shapes[p + "ln1.g"] = (cfg.d_model,)
        shapes[p + "ln1.b"] = (cfg.d_model,)
        for w in ("wq", "wk", "wv", "wo"):
            shapes[p + "attn." + w] = (cfg.d_model, cfg.d_model)
        shapes[p + "ln2.g"] = (cfg.d_model,)
        shapes[p + "ln2.b"] = (cfg.d_model,)
        shapes[p + "ff.w1"] = (cfg.d_model, cfg.d_ff)
        shapes[p + "ff.b1"] = (cfg.d_ff,)
        shapes[p + "ff.w2"] = (cfg.d_ff, cfg.d_model)
        shapes[p + "ff.b2"] = (cfg.d_model,)
    for head in ("q_head", "a_head"):
        shapes[head + ".w"] = (cfg.d_model, cfg.d_embed)
        shapes[head + ".b"] = (cfg.d_embed,)
    return shapes


def init_params(cfg: EncoderConfig) -> EncoderParams:
    """Seeded uniform init with std 1/sqrt(fan_in); LN gains 1, biases 0."""
    rng = np.random.default_rng(cfg.seed)
    tensors: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(cfg).items():
        leaf = name.rsplit(".", 1)[-1]
        if leaf == "g":
            tensors[name] = np.ones(shape, dtype=np.float64)
        elif leaf in ("b", "b1", "b2"):
            tensors[name] = np.zeros(shape, dtype=np.float64)
        else:
            fan_in = shape[0] if len(shape) > 1 else shape[0]
            if name in ("tok_emb", "pos_emb"):
                fan_in = cfg.d_model
            limit = math.sqrt(3.0 / fan_in)
            tensors[name] = rng.uniform(-limit, limit, size=shape)
    return EncoderParams(config=cfg, tensors=tensors)


def _gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


def _gelu_grad(x: np.ndarray) -> np.ndarray:
    return (0.5 * (1.0 + erf(x / math.sqrt(2.0)))
            + x * np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi))


def _layernorm(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv
    return g * xhat + b, (xhat, inv)


def _layernorm_back(dy, g, cache):
    xhat, inv = cache
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * g
    dx = inv * (dxhat
                - dxhat.mean(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
    return dx, dg, db


def _softmax_last(x):
    m = x.max(axis=-1, keepdims=True)
    e = np.exp(x - m)
    return e / e.sum(axis=-1, keepdims=True)


def _split_heads(x, n_heads):
    b, l, d = x.shape
    return x.reshape(b, l, n_heads, d // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, h, l, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, l, h * dh)


def seq_batch(seqs: list[TokenSeq]) -> tuple[np.ndarray, np.ndarray]:
    """Stack sequences into (ids, true_lens) integer arrays."""
    ids = np.array([s.ids for s in seqs], dtype=np.int64)
    lens = np.array([s.true_len for s in seqs], dtype=np.int64)
    return ids, lens


def forward_batch(params: EncoderParams, ids: np.ndarray, true_lens: np.ndarray,
                  head: str, want_cache: bool = False):
    """Encode a batch; returns (embeddings (B, d_embed), cache or pooled).

    The compute window is sliced to the longest true length in the batch;
    PAD positions beyond it cannot affect the output (they are masked as
    attention keys and excluded from pooling), so the slice is exact.
    """
    cfg = params.config
    t = params.tensors
    if head not in (QUESTION_HEAD, ANSWER_HEAD):
        raise ValueError(f"unknown head {head!r}")
    ids = np.asarray(ids, dtype=np.int64)
    true_lens = np.asarray(true_lens, dtype=np.int64)
    if ids.ndim != 2 or ids.shape[1] != cfg.max_len:
        raise ValueError(f"ids must be (B, {cfg.max_len}), got {ids.shape}")
    if ids.min() < 0 or ids.max() >= cfg.vocab_size:
        raise ValueError("token id out of vocabulary range")

    l_eff = int(true_lens.max())
    ids_w = ids[:, :l_eff]
    valid = (np.arange(l_eff)[None, :] < true_lens[:, None])  # (B, L)
    n_heads, dh = cfg.n_heads, cfg.d_model // cfg.n_heads
    scale = 1.0 / math.sqrt(dh)

    x = t["tok_emb"][ids_w] + t["pos_emb"][None, :l_eff]
    layer_caches = []
    for i in range(cfg.n_layers):
        p = f"layers.{i}."
        h, ln1c = _layernorm(x, t[p + "ln1.g"], t[p + "ln1.b"])
        q = _split_heads(h @ t[p + "attn.wq"], n_heads)
        k = _split_heads(h @ t[p + "attn.wk"], n_heads)
        v = _split_heads(h @ t[p + "attn.wv"], n_heads)
        scores = (q @ k.transpose(0, 1, 3, 2)) * scale
        scores = scores + np.where(valid, 0.0, _MASK_NEG)[:, None, None, :]
        attn = _softmax_last(scores)
        ctx = _merge_heads(attn @ v)
        ao = ctx @ t[p + "attn.wo"]
        x1 = x + ao
        h2, ln2c = _layernorm(x1, t[p + "ln2.g"], t[p + "ln2.b"])
        u = h2 @ t[p + "ff.w1"] + t[p + "ff.b1"]
        a = _gelu(u)
        f = a @ t[p + "ff.w2"] + t[p + "ff.b2"]
        x2 = x1 + f
        layer_caches.append((x, h, ln1c, q, k, v, attn, ctx, x1, h2, ln2c, u, a))
        x = x2

    wsum = valid.astype(np.float64)
    pooled = (x * wsum[:, :, None]).sum(axis=1) / true_lens[:, None]
    prefix = "q_head." if head == QUESTION_HEAD else "a_head."
    emb = pooled @ t[prefix + "w"] + t[prefix + "b"]

    if not want_cache:
        return emb, pooled
    cache = {
        "ids_w": ids_w, "true_lens": true_lens, "valid": valid, "l_eff": l_eff,
        "layers": layer_caches, "trunk_out": x, "pooled": pooled,
        "head": head, "prefix": prefix,
    }
    return emb, cache


def backward_batch(params: EncoderParams, cache: dict,
                   d_emb: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of sum(d_emb * emb) w.r.t. every parameter tensor."""
    cfg = params.config
    t = params.tensors
    n_heads, dh = cfg.n_heads, cfg.d_model // cfg.n_heads
    scale = 1.0 / math.sqrt(dh)
    l_eff = cache["l_eff"]
    true_lens = cache["true_lens"]
    valid = cache["valid"]

    grads = {name: np.zeros_like(arr) for name, arr in params.tensors.items()}

    prefix = cache["prefix"]
    pooled = cache["pooled"]
    grads[prefix + "w"] += pooled.T @ d_emb
    grads[prefix + "b"] += d_emb.sum(axis=0)
    d_pooled = d_emb @ t[prefix + "w"].T

    dx = (d_pooled[:, None, :] / true_lens[:, None, None]) * valid[:, :, None]

    for i in reversed(range(cfg.n_layers)):
        p = f"layers.{i}."
        x, h, ln1c, q, k, v, attn, ctx, x1, h2, ln2c, u, a = cache["layers"][i]
        b, l, d = x.shape

        # feed-forward block: x2 = x1 + (gelu(h2 w1 + b1) w2 + b2)
        df = dx
        grads[p + "ff.w2"] += a.reshape(-1, cfg.d_ff).T @ df.reshape(-1, d)
        grads[p + "ff.b2"] += df.sum(axis=(0, 1))
        da = df @ t[p + "ff.w2"].T
        du = da * _gelu_grad(u)
        grads[p + "ff.w1"] += h2.reshape(-1, d).T @ du.reshape(-1, cfg.d_ff)
        grads[p + "ff.b1"] += du.sum(axis=(0, 1))
        dh2 = du @ t[p + "ff.w1"].T
        dx1_ln, dg2, db2 = _layernorm_back(dh2, t[p + "ln2.g"], ln2c)
        grads[p + "ln2.g"] += dg2
        grads[p + "ln2.b"] += db2
        dx1 = dx + dx1_ln

        # attention block: x1 = x + (merge(attn @ v) wo)
        dao = dx1
        grads[p + "attn.wo"] += ctx.reshape(-1, d).T @ dao.reshape(-1, d)
        dctx = _split_heads(dao @ t[p + "attn.wo"].T, n_heads)
        dattn = dctx @ v.transpose(0, 1, 3, 2)
        dv = attn.transpose(0, 1, 3, 2) @ dctx
        dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
        dq = (dscores @ k) * scale
        dk = (dscores.transpose(0, 1, 3, 2) @ q) * scale
        dqf = _merge_heads(dq)
        dkf = _merge_heads(dk)
        dvf = _merge_heads(dv)
        h2d = h.reshape(-1, d)
        grads[p + "attn.wq"] += h2d.T @ dqf.reshape(-1, d)
        grads[p + "attn.wk"] += h2d.T @ dkf.reshape(-1, d)
        grads[p + "attn.wv"] += h2d.T @ dvf.reshape(-1, d)
        dh_ = (dqf @ t[p + "attn.wq"].T
               + dkf @ t[p + "attn.wk"].T
               + dvf @ t[p + "attn.wv"].T)
        dx_ln, dg1, db1 = _layernorm_back(dh_, t[p + "ln1.g"], ln1c)
        grads[p + "ln1.g"] += dg1
        grads[p + "ln1.b"] += db1
        dx = dx1 + dx_ln

    np.add.at(grads["tok_emb"], cache["ids_w"], dx)
    grads["pos_emb"][:l_eff] += dx.sum(axis=0)
    return grads


def encode(params: EncoderParams, seq: TokenSeq, head: str) -> np.ndarray:
    """Embed a single sequence with the selected head; returns (d_embed,)."""
    ids, lens = seq_batch([seq])
    emb, _ = forward_batch(params, ids, lens, head)
    return emb[0]


def encode_pooled(params: EncoderParams, seq: TokenSeq) -> np.ndarray:
    """Pooled trunk output before either head (exposed for tests)."""
    ids, lens = seq_batch([seq])
    _, pooled = forward_batch(params, ids, lens, QUESTION_HEAD)
    return pooled[0]
