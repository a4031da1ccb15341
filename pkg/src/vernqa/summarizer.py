"""Extractive summarization: sentence split, embed, k-means cluster,
pick the sentence nearest each cluster center, emit in original order.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

# Split after . ? ! when followed by whitespace or end of text.  This
# also splits after abbreviations like "Dr." -- a known, pinned limitation.
_SENT_RE = re.compile(r"(?<=[.?!])\s+")


@dataclass(frozen=True)
class Sentence:
    text: str
    position: int


@dataclass
class SentenceSet:
    sentences: list[Sentence]

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass
class SummaryConfig:
    k_rule: str = "sqrt"        # "sqrt" | "fixed" | "ratio"
    k_value: float = 0.0        # k for "fixed", r for "ratio"
    max_sentences: int = 8
    kmeans_seed: int = 0
    kmeans_max_iters: int = 100

    def resolve_k(self, n: int) -> int:
        if self.k_rule == "sqrt":
            k = max(1, round(math.sqrt(n)))
        elif self.k_rule == "fixed":
            k = int(self.k_value)
        elif self.k_rule == "ratio":
            k = max(1, round(self.k_value * n))
        else:
            raise ValueError(f"unknown k_rule {self.k_rule!r}")
        return max(1, min(k, n, self.max_sentences))


def split_sentences(text: str) -> SentenceSet:
    segments = _SENT_RE.split(text)
    sentences = []
    pos = 0
    for seg in segments:
        seg = seg.strip()
        if seg:
            sentences.append(Sentence(text=seg, position=pos))
            pos += 1
    return SentenceSet(sentences=sentences)


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    for _ in range(1, k):
        d2 = np.min(
            ((X[:, None, :] - np.stack(centers)[None, :, :]) ** 2).sum(-1), axis=1)
        total = d2.sum()
        if total <= 0:
            centers.append(X[rng.integers(n)])
            continue
        centers.append(X[rng.choice(n, p=d2 / total)])
    return np.stack(centers)


def kmeans(X: np.ndarray, k: int, seed: int,
           max_iters: int = 100) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Seeded k-means++ then Lloyd iterations to assignment fixpoint.

    Returns (labels, centers, per-iteration objective values).  Empty
    clusters are re-seeded with the point farthest from its assigned
    center.  The objective (sum of squared distances) is non-increasing.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(X, k, rng)
    labels = np.zeros(n, dtype=np.int64)
    objectives: list[float] = []
    for _ in range(max_iters):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(-1)  # (n, k)
        new_labels = d2.argmin(axis=1)
        objectives.append(float(d2[np.arange(n), new_labels].sum()))
        for c in range(k):
            members = new_labels == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
            else:
                farthest = d2[np.arange(n), new_labels].argmax()
                centers[c] = X[farthest]
                new_labels[farthest] = c
        if (new_labels == labels).all() and len(objectives) > 1:
            labels = new_labels
            break
        labels = new_labels
    return labels, centers, objectives


def summarize(sentences: SentenceSet,
              embed: Callable[[str], np.ndarray],
              cfg: SummaryConfig | None = None) -> list[Sentence]:
    """One representative sentence per cluster, in original order."""
    cfg = cfg or SummaryConfig()
    n = len(sentences)
    if n == 0:
        raise ValueError("cannot summarize an empty sentence set")
    if n == 1:
        return list(sentences.sentences)
    X = np.stack([np.asarray(embed(s.text), dtype=np.float64)
                  for s in sentences.sentences])
    k = cfg.resolve_k(n)
    labels, centers, _ = kmeans(X, k, cfg.kmeans_seed, cfg.kmeans_max_iters)
    chosen: list[Sentence] = []
    for c in range(k):
        members = np.flatnonzero(labels == c)
        if members.size == 0:
            continue
        d2 = ((X[members] - centers[c]) ** 2).sum(-1)
        # ties resolved toward the earlier position: argmin takes the
        # first minimum and members are in position order
        chosen.append(sentences.sentences[members[d2.argmin()]])
    chosen.sort(key=lambda s: s.position)
    return chosen
