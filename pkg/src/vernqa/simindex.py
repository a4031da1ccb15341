"""Dense answer-embedding store: exact top-k dot-product search,
symmetric per-vector int8 quantization, binary persistence.

Search is a linear scan with double-precision accumulation; ties are
broken by ascending answer id so results are order-independent.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

INDEX_MAGIC = b"VQAIDX1"
INDEX_VERSION = (1, 0)


class IndexError_(ValueError):
    """Build or search contract violation."""


class IndexIOError(IOError):
    """Corrupt, truncated, or unsupported index file."""


@dataclass(frozen=True)
class IndexEntry:
    answer_id: str
    vector: np.ndarray  # stored single precision
    payload: str = ""


@dataclass(frozen=True)
class SearchHit:
    answer_id: str
    score: float
    rank: int


@dataclass
class Index:
    ids: list[str]
    vectors: np.ndarray  # (N, d) float32
    payloads: list[str]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def vector_for(self, answer_id: str) -> np.ndarray:
        return self.vectors[self.ids.index(answer_id)]

    def payload_for(self, answer_id: str) -> str:
        return self.payloads[self.ids.index(answer_id)]


@dataclass
class QuantizedIndex:
    ids: list[str]
    codes: np.ndarray   # (N, d) int8
    scales: np.ndarray  # (N,) float32; scale = max|component| / 127
    payloads: list[str]

    @property
    def dim(self) -> int:
        return self.codes.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def dequantize(self) -> np.ndarray:
        return self.codes.astype(np.float32) * self.scales[:, None]

    def payload_for(self, answer_id: str) -> str:
        return self.payloads[self.ids.index(answer_id)]


def build_index(entries: list[IndexEntry]) -> Index:
    if not entries:
        return Index(ids=[], vectors=np.zeros((0, 0), dtype=np.float32), payloads=[])
    dim = len(np.asarray(entries[0].vector).ravel())
    ids: list[str] = []
    seen: set[str] = set()
    rows = []
    payloads = []
    for e in entries:
        vec = np.asarray(e.vector, dtype=np.float32).ravel()
        if len(vec) != dim:
            raise IndexError_(
                f"dimension mismatch for {e.answer_id!r}: {len(vec)} != {dim}")
        if e.answer_id in seen:
            raise IndexError_(f"duplicate answer_id {e.answer_id!r}")
        seen.add(e.answer_id)
        ids.append(e.answer_id)
        rows.append(vec)
        payloads.append(e.payload)
    return Index(ids=ids, vectors=np.stack(rows), payloads=payloads)


def _topk(ids: list[str], scores: np.ndarray, k: int) -> list[SearchHit]:
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i]))[:k]
    return [SearchHit(answer_id=ids[i], score=float(scores[i]), rank=r + 1)
            for r, i in enumerate(order)]


def search_topk(index: Index, query: np.ndarray, k: int) -> list[SearchHit]:
    """min(k, size) entries with largest dot product; id-based tie-break."""
    if k < 1:
        raise IndexError_("k must be >= 1")
    if len(index) == 0:
        return []
    q = np.asarray(query, dtype=np.float64).ravel()
    if len(q) != index.dim:
        raise IndexError_(f"query dimension {len(q)} != index dimension {index.dim}")
    scores = index.vectors.astype(np.float64) @ q
    return _topk(index.ids, scores, k)


def quantize(index: Index) -> QuantizedIndex:
    """Symmetric per-vector int8: code = round(v/scale), scale = max|v|/127."""
    n = len(index)
    dim = index.dim if n else 0
    codes = np.zeros((n, dim), dtype=np.int8)
    scales = np.zeros(n, dtype=np.float32)
    for i in range(n):
        v = index.vectors[i].astype(np.float64)
        peak = np.abs(v).max() if dim else 0.0
        if peak == 0.0:
            continue
        scale = peak / 127.0
        codes[i] = np.clip(np.round(v / scale), -127, 127).astype(np.int8)
        scales[i] = scale
    return QuantizedIndex(ids=list(index.ids), codes=codes, scales=scales,
                          payloads=list(index.payloads))


def search_topk_quantized(qindex: QuantizedIndex, query: np.ndarray,
                          k: int) -> list[SearchHit]:
    if k < 1:
        raise IndexError_("k must be >= 1")
    if len(qindex) == 0:
        return []
    q = np.asarray(query, dtype=np.float64).ravel()
    if len(q) != qindex.dim:
        raise IndexError_(f"query dimension {len(q)} != index dimension {qindex.dim}")
    deq = qindex.codes.astype(np.float64) * qindex.scales.astype(np.float64)[:, None]
    scores = deq @ q
    return _topk(qindex.ids, scores, k)


def save_index(index: Index | QuantizedIndex, path) -> None:
    quantized = isinstance(index, QuantizedIndex)
    header = {
        "version": list(INDEX_VERSION),
        "dimension": index.dim,
        "count": len(index),
        "quantized": quantized,
    }
    header_b = json.dumps(header, sort_keys=True).encode("utf-8")
    table_b = json.dumps(
        {"ids": index.ids, "payloads": index.payloads},
        ensure_ascii=False).encode("utf-8")
    parts = [INDEX_MAGIC,
             struct.pack("<I", len(header_b)), header_b,
             struct.pack("<I", len(table_b)), table_b]
    if quantized:
        parts.append(index.codes.astype("<i1").tobytes())
        parts.append(index.scales.astype("<f4").tobytes())
    else:
        parts.append(index.vectors.astype("<f4").tobytes())
    blob = b"".join(parts)
    blob += struct.pack("<I", zlib.crc32(blob) & 0xFFFFFFFF)
    with open(path, "wb") as f:
        f.write(blob)


def load_index(path) -> Index | QuantizedIndex:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < len(INDEX_MAGIC) + 8:
        raise IndexIOError("truncated file")
    if blob[:len(INDEX_MAGIC)] != INDEX_MAGIC:
        raise IndexIOError("bad magic; not an index file")
    stored_crc = struct.unpack("<I", blob[-4:])[0]
    if zlib.crc32(blob[:-4]) & 0xFFFFFFFF != stored_crc:
        raise IndexIOError("checksum mismatch; file corrupted")
    pos = len(INDEX_MAGIC)

    def take(n):
        nonlocal pos
        if pos + n > len(blob) - 4:
            raise IndexIOError("truncated file")
        out = blob[pos:pos + n]
        pos += n
        return out

    header = json.loads(take(struct.unpack("<I", take(4))[0]).decode("utf-8"))
    if header["version"][0] > INDEX_VERSION[0]:
        raise IndexIOError(f"unsupported version {header['version']}")
    table = json.loads(take(struct.unpack("<I", take(4))[0]).decode("utf-8"))
    n, dim = header["count"], header["dimension"]
    if header["quantized"]:
        codes = np.frombuffer(take(n * dim), dtype="<i1").reshape(n, dim)
        scales = np.frombuffer(take(4 * n), dtype="<f4")
        return QuantizedIndex(ids=table["ids"], codes=codes.copy(),
                              scales=scales.copy(), payloads=table["payloads"])
    vectors = np.frombuffer(take(4 * n * dim), dtype="<f4").reshape(n, dim)
    return Index(ids=table["ids"], vectors=vectors.copy(),
                 payloads=table["payloads"])
