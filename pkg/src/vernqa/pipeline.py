"""End-to-end ask path: inbound translation, question embedding,
similarity lookup, answer composition, outbound translation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .corpus import normalize_text
from .encoder import ANSWER_HEAD, QUESTION_HEAD, EncoderParams, encode
from .langbridge import TranslatorRegistry
from .simindex import Index, QuantizedIndex, SearchHit, search_topk, search_topk_quantized
from .summarizer import split_sentences
from .textpipe import Vocabulary, encode_text


class PipelineError(RuntimeError):
    pass


class EmptyQuestionError(PipelineError):
    pass


class NoAnswerAvailable(PipelineError):
    """The index is empty; distinct from an internal failure."""


class Generator(Protocol):
    """Plug-in contract for a learned answer generator.

    Implementations must be deterministic given identical inputs or
    declare a seed; output must be nonempty when retrieved_texts is.
    """

    def generate(self, prompt_text: str, retrieved_texts: list[str]) -> str: ...


@dataclass
class HitWithText:
    hit: SearchHit
    text: str


@dataclass
class AnswerBundle:
    final_text: str
    hits: list[HitWithText]
    query_lang: str
    english_query: str
    composer_mode: str


DEFAULT_STITCH_CAP = 8


def compose_answer(hits: list[HitWithText], mode: str = "stitch",
                   max_sentences: int = DEFAULT_STITCH_CAP,
                   generator: Generator | None = None,
                   question: str = "") -> str:
    """top1: best answer verbatim.  stitch: sentences of the top answers,
    deduplicated by normalized sentence, rank-then-position order, capped.
    generator: delegate to the plug-in.
    """
    if not hits:
        raise PipelineError("compose_answer requires at least one hit")
    if mode == "top1":
        return hits[0].text
    if mode == "stitch":
        seen: set[str] = set()
        out: list[str] = []
        for h in hits:
            for s in split_sentences(h.text).sentences:
                key = normalize_text(s.text)
                if key in seen:
                    continue
                seen.add(key)
                out.append(s.text)
                if len(out) >= max_sentences:
                    return " ".join(out)
        return " ".join(out)
    if mode == "generator":
        if generator is None:
            raise PipelineError("generator mode requires a generator instance")
        return generator.generate(question, [h.text for h in hits])
    raise PipelineError(f"unknown composer mode {mode!r}")


@dataclass
class Pipeline:
    vocab: Vocabulary
    params: EncoderParams
    index: Index | QuantizedIndex
    registry: TranslatorRegistry = field(default_factory=TranslatorRegistry)
    composer_mode: str = "stitch"
    stitch_cap: int = DEFAULT_STITCH_CAP
    generator: Generator | None = None

    def embed_question(self, english_text: str) -> np.ndarray:
        seq = encode_text(self.vocab, english_text, self.params.config.max_len)
        return encode(self.params, seq, QUESTION_HEAD)

    def embed_sentence(self, text: str) -> np.ndarray:
        """Answer-head embedding; the summarizer's sentence embedder."""
        seq = encode_text(self.vocab, text, self.params.config.max_len)
        return encode(self.params, seq, ANSWER_HEAD)

    def retrieve(self, english_text: str, top_k: int) -> list[HitWithText]:
        q = self.embed_question(english_text)
        if isinstance(self.index, QuantizedIndex):
            raw = search_topk_quantized(self.index, q, top_k)
        else:
            raw = search_topk(self.index, q, top_k)
        return [HitWithText(hit=h, text=self.index.payload_for(h.answer_id))
                for h in raw]

    def ask(self, question_text: str, lang: str = "en", top_k: int = 5) -> AnswerBundle:
        if not question_text.strip():
            raise EmptyQuestionError("question is empty")
        if len(self.index) == 0:
            raise NoAnswerAvailable("no answer available: index is empty")
        english = self.registry.translate(question_text, lang, "en")
        hits = self.retrieve(english, top_k)
        if not hits:
            raise NoAnswerAvailable("no answer available: retrieval empty")
        composed = compose_answer(hits, self.composer_mode,
                                  max_sentences=self.stitch_cap,
                                  generator=self.generator, question=english)
        final = self.registry.translate(composed, "en", lang)
        return AnswerBundle(final_text=final, hits=hits, query_lang=lang,
                            english_query=english, composer_mode=self.composer_mode)
