"""Retrieval metrics: strict accuracy (rank-1 correct), recall@k, MRR,
and an evaluation runner producing JSON and human-readable reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .corpus import Corpus
from .pipeline import Pipeline


@dataclass(frozen=True)
class EvalRecord:
    question_id: str
    gold_answer_id: str
    ranked_ids: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.ranked_ids)) != len(self.ranked_ids):
            raise ValueError("ranked_ids contains duplicates")


def strict_accuracy(records: list[EvalRecord]) -> float:
    """Fraction of questions whose rank-1 result is the gold answer.

    Records with empty ranked_ids count as misses.
    """
    if not records:
        raise ValueError("empty record set")
    hits = sum(1 for r in records
               if r.ranked_ids and r.ranked_ids[0] == r.gold_answer_id)
    return hits / len(records)


def recall_at_k(records: list[EvalRecord], k: int) -> float:
    if not records:
        raise ValueError("empty record set")
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for r in records if r.gold_answer_id in r.ranked_ids[:k])
    return hits / len(records)


def mrr(records: list[EvalRecord]) -> float:
    """Mean reciprocal rank of the gold answer; 0 when absent."""
    if not records:
        raise ValueError("empty record set")
    total = 0.0
    for r in records:
        if r.gold_answer_id in r.ranked_ids:
            total += 1.0 / (r.ranked_ids.index(r.gold_answer_id) + 1)
    return total / len(records)


@dataclass
class EvalReport:
    n_queries: int
    strict_accuracy: float
    mrr: float
    recall: dict[int, float]
    per_query: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_queries": self.n_queries,
            "strict_accuracy": self.strict_accuracy,
            "mrr": self.mrr,
            "recall": {str(k): v for k, v in self.recall.items()},
            "per_query": self.per_query,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            n_queries=d["n_queries"],
            strict_accuracy=d["strict_accuracy"],
            mrr=d["mrr"],
            recall={int(k): v for k, v in d["recall"].items()},
            per_query=d.get("per_query", []),
        )

    def to_table(self) -> str:
        lines = [f"queries          {self.n_queries}",
                 f"strict accuracy  {self.strict_accuracy:.4f}",
                 f"MRR              {self.mrr:.4f}"]
        for k in sorted(self.recall):
            lines.append(f"recall@{k:<9} {self.recall[k]:.4f}")
        return "\n".join(lines)


def run_eval(pipeline: Pipeline, eval_corpus: Corpus,
             k_list: list[int] | None = None) -> EvalReport:
    """Query the pipeline with every question; gold is the pair's own id."""
    if len(eval_corpus) == 0:
        raise ValueError("empty evaluation corpus")
    k_list = sorted(set(k_list or [1, 5]))
    max_k = max(k_list)
    records: list[EvalRecord] = []
    per_query: list[dict] = []
    for pair in eval_corpus:
        hits = pipeline.retrieve(pair.question, max_k)
        ranked = tuple(h.hit.answer_id for h in hits)
        records.append(EvalRecord(question_id=pair.id, gold_answer_id=pair.id,
                                  ranked_ids=ranked))
        per_query.append({"question_id": pair.id, "gold": pair.id,
                          "ranked": list(ranked)})
    return EvalReport(
        n_queries=len(records),
        strict_accuracy=strict_accuracy(records),
        mrr=mrr(records),
        recall={k: recall_at_k(records, k) for k in k_list},
        per_query=per_query,
    )
