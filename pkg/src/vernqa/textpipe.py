"""Vocabulary construction and fixed-length integer encoding.

Word-level tokenizer: casefolded text split on whitespace, with each
maximal run of ASCII punctuation emitted as its own token.  Special
tokens occupy ids 0-3 so every real token id is a positive integer.
"""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass, field

from .corpus import Corpus

PAD_ID, UNK_ID, CLS_ID, EOS_ID = 0, 1, 2, 3
SPECIAL_TOKENS = ("<pad>", "<unk>", "<cls>", "<eos>")

DEFAULT_MAX_LEN = 128
DEFAULT_VOCAB_SIZE = 8192
DEFAULT_MIN_FREQ = 2

_PUNCT = re.escape(string.punctuation)
_CHUNK_RE = re.compile(f"[{_PUNCT}]+|[^{_PUNCT}]+")


def tokenize(text: str) -> list[str]:
    """Casefold, split on whitespace, isolate ASCII punctuation runs."""
    tokens: list[str] = []
    for chunk in text.casefold().split():
        tokens.extend(_CHUNK_RE.findall(chunk))
    return tokens


@dataclass
class Vocabulary:
    id_to_token: list[str]
    token_to_id: dict[str, int] = field(init=False)

    def __post_init__(self):
        if tuple(self.id_to_token[:4]) != SPECIAL_TOKENS:
            raise ValueError("ids 0-3 must be the special tokens")
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate token in vocabulary")

    @property
    def size(self) -> int:
        return len(self.id_to_token)

    def lookup(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def token(self, token_id: int) -> str:
        return self.id_to_token[token_id]


def build_vocab(
    corpus: Corpus,
    max_size: int = DEFAULT_VOCAB_SIZE,
    min_freq: int = DEFAULT_MIN_FREQ,
) -> Vocabulary:
    """Most frequent tokens over all questions and answers.

    Ties broken lexicographically; ids assigned from 4 in
    (descending frequency, lexicographic) order.
    """
    if max_size < 5:
        raise ValueError("max_size must be at least 5 (4 specials + 1 token)")
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    counts: Counter[str] = Counter()
    for pair in corpus:
        counts.update(tokenize(pair.question))
        counts.update(tokenize(pair.answer))
    candidates = [(tok, n) for tok, n in counts.items() if n >= min_freq]
    candidates.sort(key=lambda item: (-item[1], item[0]))
    kept = [tok for tok, _ in candidates[: max_size - len(SPECIAL_TOKENS)]]
    return Vocabulary(id_to_token=list(SPECIAL_TOKENS) + kept)


@dataclass
class TokenSeq:
    """Fixed-length encoded sequence: [CLS] body [EOS] PAD*."""

    ids: list[int]
    true_len: int
    truncated: bool

    def __post_init__(self):
        if not 2 <= self.true_len <= len(self.ids):
            raise ValueError("true_len out of range")
        if self.ids[0] != CLS_ID or self.ids[self.true_len - 1] != EOS_ID:
            raise ValueError("sequence must start with CLS and end with EOS")


def encode_text(vocab: Vocabulary, text: str, max_len: int = DEFAULT_MAX_LEN) -> TokenSeq:
    """Encode to exactly max_len ids, truncating while keeping CLS and EOS."""
    if max_len < 2:
        raise ValueError("max_len must be >= 2")
    tokens = tokenize(text)
    capacity = max_len - 2
    truncated = len(tokens) > capacity
    body = [vocab.lookup(t) for t in tokens[:capacity]]
    ids = [CLS_ID] + body + [EOS_ID]
    true_len = len(ids)
    ids = ids + [PAD_ID] * (max_len - true_len)
    return TokenSeq(ids=ids, true_len=true_len, truncated=truncated)


def decode(vocab: Vocabulary, seq: TokenSeq) -> list[str]:
    """Token strings between CLS and EOS (for round-trip checks)."""
    return [vocab.token(i) for i in seq.ids[1 : seq.true_len - 1]]


def save_vocab(vocab: Vocabulary, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for token in vocab.id_to_token:
            f.write(token + "\n")


def load_vocab(path) -> Vocabulary:
    with open(path, "r", encoding="utf-8") as f:
        tokens = [line.rstrip("\n") for line in f if line.rstrip("\n")]
    return Vocabulary(id_to_token=tokens)
