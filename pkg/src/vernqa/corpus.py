"""QA-pair corpus: load, validate, deduplicate, split.

Corpus files are UTF-8 JSONL, one object per line with required keys
``id``, ``question``, ``answer`` and optional ``lang`` (default "en") and
``source`` (default "unknown").  A ``#`` at column 0 marks a comment line.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

MAX_LINE_BYTES = 64 * 1024


class CorpusError(ValueError):
    """Raised for malformed corpus files or invalid records."""


@dataclass(frozen=True)
class QAPair:
    id: str
    question: str
    answer: str
    lang: str = "en"
    source: str = "unknown"

    def __post_init__(self):
        if not self.id:
            raise CorpusError("pair id must be nonempty")
        if not self.question.strip():
            raise CorpusError(f"pair {self.id!r}: question empty after trimming")
        if not self.answer.strip():
            raise CorpusError(f"pair {self.id!r}: answer empty after trimming")


@dataclass
class Corpus:
    pairs: list[QAPair] = field(default_factory=list)
    name: str = "corpus"

    def __post_init__(self):
        seen: dict[str, int] = {}
        for i, p in enumerate(self.pairs):
            if p.id in seen:
                raise CorpusError(
                    f"duplicate id {p.id!r} at positions {seen[p.id]} and {i}"
                )
            seen[p.id] = i

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def by_id(self, pair_id: str) -> QAPair:
        for p in self.pairs:
            if p.id == pair_id:
                return p
        raise KeyError(pair_id)


def normalize_text(text: str) -> str:
    """Trim, collapse internal whitespace, casefold.  The duplicate key."""
    return " ".join(text.split()).casefold()


def _parse_line(line: str, lineno: int) -> QAPair:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise CorpusError(f"line {lineno}: invalid JSON ({e.msg})") from e
    if not isinstance(obj, dict):
        raise CorpusError(f"line {lineno}: record must be a JSON object")
    for key in ("id", "question", "answer"):
        if key not in obj:
            raise CorpusError(f"line {lineno}: missing required key {key!r}")
        if not isinstance(obj[key], str):
            raise CorpusError(f"line {lineno}: key {key!r} must be a string")
    try:
        return QAPair(
            id=obj["id"],
            question=obj["question"],
            answer=obj["answer"],
            lang=obj.get("lang", "en"),
            source=obj.get("source", "unknown"),
        )
    except CorpusError as e:
        raise CorpusError(f"line {lineno}: {e}") from e


def load_corpus(path, name: str | None = None) -> Corpus:
    """Load a JSONL corpus file, preserving file order.

    Raises CorpusError naming the offending line number(s) for malformed
    lines, oversized lines, and duplicate ids.
    """
    pairs: list[QAPair] = []
    line_of_id: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if line.startswith("#"):
                continue
            if not line.strip():
                continue
            if len(line.encode("utf-8")) > MAX_LINE_BYTES:
                raise CorpusError(
                    f"line {lineno}: record exceeds {MAX_LINE_BYTES} bytes"
                )
            pair = _parse_line(line, lineno)
            if pair.id in line_of_id:
                raise CorpusError(
                    f"duplicate id {pair.id!r} on lines "
                    f"{line_of_id[pair.id]} and {lineno}"
                )
            line_of_id[pair.id] = lineno
            pairs.append(pair)
    return Corpus(pairs=pairs, name=name or str(path))


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for p in corpus:
            rec = {
                "id": p.id,
                "question": p.question,
                "answer": p.answer,
                "lang": p.lang,
                "source": p.source,
            }
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


def dedupe(corpus: Corpus) -> Corpus:
    """Drop pairs whose normalized (question, answer) was already seen.

    First occurrence wins; survivor order is preserved.
    """
    seen: set[tuple[str, str]] = set()
    kept: list[QAPair] = []
    for p in corpus:
        key = (normalize_text(p.question), normalize_text(p.answer))
        if key in seen:
            continue
        seen.add(key)
        kept.append(p)
    return Corpus(pairs=kept, name=corpus.name)


def split(corpus: Corpus, test_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Deterministic seeded train/test partition.

    |test| = round(test_fraction * |corpus|).  Within each side the
    original corpus order is kept.
    """
    if not 0.0 <= test_fraction <= 1.0:
        raise ValueError(f"test_fraction must be in [0,1], got {test_fraction}")
    n = len(corpus)
    n_test = int(test_fraction * n + 0.5)
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    test_idx = set(indices[:n_test])
    train = [p for i, p in enumerate(corpus) if i not in test_idx]
    test = [p for i, p in enumerate(corpus) if i in test_idx]
    return (
        Corpus(pairs=train, name=f"{corpus.name}/train"),
        Corpus(pairs=test, name=f"{corpus.name}/test"),
    )
