"""HTTP JSON API: ask, summarize, sessions, EHR document storage.

Persistence is file-backed append-only JSONL per store (sessions, EHR),
replayed at startup; no external database.  Artifact paths come from a
single JSON config file and the service refuses to start if any is
missing.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .langbridge import (
    DictionaryTranslator,
    TranslatorRegistry,
    UnsupportedLanguagePair,
)
from .pipeline import EmptyQuestionError, NoAnswerAvailable, Pipeline
from .simindex import load_index
from .summarizer import SummaryConfig, split_sentences, summarize
from .textpipe import load_vocab
from .trainer import load_checkpoint

DEFAULT_DISCLAIMER = (
    "This is preliminary information, not a medical diagnosis. "
    "Consult a qualified medical practitioner."
)


@dataclass
class ServiceConfig:
    vocab_path: str
    checkpoint_path: str
    index_path: str
    data_dir: str
    host: str = "127.0.0.1"
    port: int = 8080
    default_lang: str = "en"
    top_k_default: int = 5
    disclaimer_text: str = DEFAULT_DISCLAIMER
    composer_mode: str = "stitch"
    dictionary_adapters: list[dict] = field(default_factory=list)
    # each adapter entry: {"src": ..., "tgt": ..., "path": tsv path}

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        cfg = cls(**raw)
        cfg.host = os.environ.get("VERNQA_HOST", cfg.host)
        cfg.port = int(os.environ.get("VERNQA_PORT", cfg.port))
        return cfg


class _JsonlStore:
    """Append-only JSONL event log replayed into memory at startup."""

    def __init__(self, path: Path):
        self.path = path
        self.lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        self._apply(json.loads(line))

    def _append(self, event: dict) -> None:
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(event, ensure_ascii=False) + "\n")

    def _apply(self, event: dict) -> None:
        raise NotImplementedError


class SessionStore(_JsonlStore):
    def __init__(self, path: Path):
        self.sessions: dict[str, dict] = {}
        super().__init__(path)

    def _apply(self, event: dict) -> None:
        if event["type"] == "session_created":
            self.sessions[event["session_id"]] = {
                "session_id": event["session_id"],
                "created_at": event["created_at"],
                "turns": [],
            }
        elif event["type"] == "turn":
            self.sessions[event["session_id"]]["turns"].append({
                "timestamp": event["timestamp"],
                "role": event["role"],
                "text": event["text"],
                "lang": event["lang"],
            })

    def create(self) -> str:
        with self.lock:
            session_id = uuid.uuid4().hex
            event = {"type": "session_created", "session_id": session_id,
                     "created_at": time.time()}
            self._apply(event)
            self._append(event)
            return session_id

    def append_turn(self, session_id: str, role: str, text: str, lang: str) -> bool:
        with self.lock:
            if session_id not in self.sessions:
                return False
            event = {"type": "turn", "session_id": session_id,
                     "timestamp": time.time(), "role": role,
                     "text": text, "lang": lang}
            self._apply(event)
            self._append(event)
            return True

    def get(self, session_id: str) -> dict | None:
        return self.sessions.get(session_id)


class EhrStore(_JsonlStore):
    def __init__(self, path: Path):
        self.docs: dict[str, list[dict]] = {}
        self.doc_ids: set[tuple[str, str]] = set()
        super().__init__(path)

    def _apply(self, event: dict) -> None:
        self.docs.setdefault(event["patient_id"], []).append({
            "doc_id": event["doc_id"],
            "text": event["text"],
            "created_at": event["created_at"],
        })
        self.doc_ids.add((event["patient_id"], event["doc_id"]))

    def store(self, patient_id: str, text: str, doc_id: str | None = None) -> str:
        with self.lock:
            doc_id = doc_id or uuid.uuid4().hex
            if (patient_id, doc_id) in self.doc_ids:
                raise KeyError(doc_id)
            event = {"patient_id": patient_id, "doc_id": doc_id,
                     "text": text, "created_at": time.time()}
            self._apply(event)
            self._append(event)
            return doc_id

    def get(self, patient_id: str) -> list[dict] | None:
        return self.docs.get(patient_id)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error_code": code, "message": message})


async def _body(request: Request) -> dict | None:
    try:
        data = await request.json()
    except Exception:
        return None
    return data if isinstance(data, dict) else None


def create_app(pipeline: Pipeline | None, data_dir,
               disclaimer: str = DEFAULT_DISCLAIMER,
               default_lang: str = "en", top_k_default: int = 5,
               sentence_embedder: Callable | None = None,
               summary_config: SummaryConfig | None = None) -> FastAPI:
    """Assemble the service around a loaded pipeline snapshot.

    ``sentence_embedder`` overrides the summarizer's embedding function
    (default: the pipeline's answer-head encoder).
    """
    data_dir = Path(data_dir)
    sessions = SessionStore(data_dir / "sessions.jsonl")
    ehr = EhrStore(data_dir / "ehr.jsonl")
    app = FastAPI(title="vernqa", version=__version__)
    app.state.pipeline = pipeline
    app.state.sessions = sessions
    app.state.ehr = ehr
    embedder = sentence_embedder or (
        pipeline.embed_sentence if pipeline is not None else None)
    sum_cfg = summary_config or SummaryConfig()

    @app.get("/health")
    async def health():
        size = len(pipeline.index) if pipeline is not None else 0
        return {"status": "ok", "version": __version__, "index_size": size}

    @app.post("/v1/sessions")
    async def create_session():
        return {"session_id": sessions.create()}

    @app.get("/v1/sessions/{session_id}")
    async def get_session(session_id: str):
        record = sessions.get(session_id)
        if record is None:
            return _error(404, "not_found", f"unknown session {session_id}")
        return record

    @app.post("/v1/ask")
    async def ask(request: Request):
        body = await _body(request)
        if body is None or "question" not in body:
            return _error(400, "bad_request",
                          "body must be a JSON object with a 'question' key")
        if not isinstance(body["question"], str):
            return _error(400, "bad_request", "'question' must be a string")
        if pipeline is None:
            return _error(503, "artifacts_not_loaded", "service has no artifacts")
        lang = body.get("lang", default_lang)
        top_k = body.get("top_k", top_k_default)
        session_id = body.get("session_id")
        try:
            bundle = pipeline.ask(body["question"], lang=lang, top_k=top_k)
        except EmptyQuestionError:
            return _error(422, "empty_question", "question is empty")
        except UnsupportedLanguagePair as e:
            return _error(422, "unsupported_language", str(e))
        except NoAnswerAvailable as e:
            return _error(503, "no_answer_available", str(e))
        if session_id is not None:
            if not sessions.append_turn(session_id, "user", body["question"], lang):
                return _error(404, "not_found", f"unknown session {session_id}")
            sessions.append_turn(session_id, "assistant", bundle.final_text, lang)
        return {
            "answer": bundle.final_text,
            "lang": lang,
            "hits": [{"answer_id": h.hit.answer_id, "score": h.hit.score,
                      "text": h.text} for h in bundle.hits],
            "disclaimer": disclaimer,
        }

    @app.post("/v1/summarize")
    async def summarize_endpoint(request: Request):
        body = await _body(request)
        if body is None or ("patient_id" not in body and "text" not in body):
            return _error(400, "bad_request",
                          "body must contain 'patient_id' or 'text'")
        if "patient_id" in body:
            docs = ehr.get(body["patient_id"])
            if docs is None:
                return _error(404, "not_found",
                              f"unknown patient {body['patient_id']}")
            text = " ".join(d["text"] for d in docs)
        else:
            text = body["text"]
        if not isinstance(text, str) or not text.strip():
            return _error(422, "empty_text", "nothing to summarize")
        if embedder is None:
            return _error(503, "artifacts_not_loaded", "no sentence embedder")
        sentences = split_sentences(text)
        if len(sentences) == 0:
            return _error(422, "empty_text", "no sentences found")
        chosen = summarize(sentences, embedder, sum_cfg)
        return {"summary_sentences": [s.text for s in chosen],
                "k_used": sum_cfg.resolve_k(len(sentences))}

    @app.post("/v1/ehr/{patient_id}")
    async def store_ehr(patient_id: str, request: Request):
        body = await _body(request)
        if body is None or "text" not in body or not isinstance(body["text"], str):
            return _error(400, "bad_request", "body must contain string 'text'")
        if not body["text"].strip():
            return _error(422, "empty_text", "document text is empty")
        try:
            doc_id = ehr.store(patient_id, body["text"], body.get("doc_id"))
        except KeyError:
            return _error(409, "duplicate_doc_id",
                          f"doc_id {body.get('doc_id')!r} already exists")
        return {"doc_id": doc_id}

    return app


def load_pipeline(cfg: ServiceConfig) -> Pipeline:
    """Load all artifacts; raises FileNotFoundError on any missing path."""
    for p in (cfg.vocab_path, cfg.checkpoint_path, cfg.index_path):
        if not Path(p).exists():
            raise FileNotFoundError(f"missing artifact: {p}")
    vocab = load_vocab(cfg.vocab_path)
    params, _, _, _ = load_checkpoint(cfg.checkpoint_path)
    index = load_index(cfg.index_path)
    registry = TranslatorRegistry()
    for entry in cfg.dictionary_adapters:
        registry.register(entry["src"], entry["tgt"],
                          DictionaryTranslator.from_tsv(entry["path"]))
    return Pipeline(vocab=vocab, params=params, index=index,
                    registry=registry, composer_mode=cfg.composer_mode)


def app_from_config(path) -> tuple[FastAPI, ServiceConfig]:
    cfg = ServiceConfig.from_file(path)
    pipeline = load_pipeline(cfg)
    app = create_app(pipeline, cfg.data_dir, disclaimer=cfg.disclaimer_text,
                     default_lang=cfg.default_lang,
                     top_k_default=cfg.top_k_default)
    return app, cfg
