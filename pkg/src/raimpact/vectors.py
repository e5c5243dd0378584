"""Fixed-dimension vector store: similarity, top-match, percentile cutoffs.

Vectors are L2-normalized once at load so cosine similarity reduces to a dot
product in every downstream scan.  Two interchangeable file formats exist:

* binary: header ``RVEC`` magic, u16 version, u32 dim, u64 count, u16
  model-id length + UTF-8 bytes; then per row a u16 key length, the UTF-8
  key, and ``dim`` little-endian float32 components;
* text (for fixtures): a JSON header line ``{"dim":..,"count":..,"model_id":..}``
  followed by ``key<TAB>c0 c1 ...`` rows.
"""

from __future__ import annotations

import json
import math
import re
import struct
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAGIC = b"RVEC"
FORMAT_VERSION = 1

# Row vectors are accepted if their stored norm is within this tolerance of 1
# and renormalized on the way in; the in-store invariant is 1 +/- 1e-6.
LOAD_NORM_TOL = 1e-3
STORE_NORM_TOL = 1e-6


class VectorFileError(ValueError):
    """Unreadable vector file or a header/body inconsistency."""


class VectorStore:
    """Unit vectors of one shared dimension, keyed by document/keyword id."""

    def __init__(self, dim: int, model_id: str):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.model_id = model_id
        self._entries: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def keys(self):
        return self._entries.keys()

    def get(self, key: str) -> np.ndarray:
        try:
            return self._entries[key]
        except KeyError:
            raise KeyError(f"no vector for key {key!r} (model {self.model_id})") from None

    def add(self, key: str, vector: np.ndarray | Sequence[float]) -> None:
        if key in self._entries:
            raise VectorFileError(f"duplicate key {key!r}")
        arr = np.asarray(vector, dtype=np.float32)
        if arr.shape != (self.dim,):
            raise VectorFileError(f"key {key!r}: expected dim {self.dim}, got shape {arr.shape}")
        norm = float(np.linalg.norm(arr.astype(np.float64)))
        if abs(norm - 1.0) > LOAD_NORM_TOL:
            raise VectorFileError(f"key {key!r}: norm {norm:.6f} outside 1 +/- {LOAD_NORM_TOL}")
        if abs(norm - 1.0) > STORE_NORM_TOL:
            arr = (arr.astype(np.float64) / norm).astype(np.float32)
        self._entries[key] = arr

    def matrix(self, keys: Sequence[str]) -> np.ndarray:
        """Stack the vectors for ``keys`` into a (len(keys), dim) array."""
        return np.stack([self.get(k) for k in keys]) if keys else np.empty((0, self.dim), np.float32)


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine similarity is undefined for zero vectors")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    return 1.0 - cosine_similarity(u, v)


def top_match(store: VectorStore, query: str, candidates: Iterable[str]) -> tuple[str, float]:
    """Best-scoring candidate for ``query``; ties go to the smallest key.

    The tie rule makes the argmax independent of candidate scan order, so
    parallel or chunked scans must agree with this result.
    """
    keys = sorted(set(candidates))
    if not keys:
        raise ValueError("candidates must be non-empty")
    q = store.get(query).astype(np.float64)
    scores = store.matrix(keys).astype(np.float64) @ q
    best = int(np.argmax(scores))  # first index wins ties; keys are sorted
    return keys[best], float(np.clip(scores[best], -1.0, 1.0))


def percentile_threshold(scores: Iterable[float], p: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * N)-th smallest score."""
    values = sorted(scores)
    if not values:
        raise ValueError("scores must be non-empty")
    if not 0.0 < p < 100.0:
        raise ValueError("p must be strictly between 0 and 100")
    rank = math.ceil(Fraction(p) * len(values) / 100)
    return values[rank - 1]


# ---------------------------------------------------------------------------
# File I/O


def save_vectors(store: VectorStore, path: str | Path, text: bool = False) -> None:
    if text:
        _save_text(store, path)
    else:
        _save_binary(store, path)


def _save_binary(store: VectorStore, path: str | Path) -> None:
    model_bytes = store.model_id.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HIQH", FORMAT_VERSION, store.dim, len(store), len(model_bytes)))
        fh.write(model_bytes)
        for key in store.keys():
            key_bytes = key.encode("utf-8")
            fh.write(struct.pack("<H", len(key_bytes)))
            fh.write(key_bytes)
            fh.write(store.get(key).astype("<f4").tobytes())


def _save_text(store: VectorStore, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {"dim": store.dim, "count": len(store), "model_id": store.model_id}
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
        for key in store.keys():
            comps = " ".join(repr(float(c)) for c in store.get(key))
            fh.write(f"{key}\t{comps}\n")


def load_vectors(path: str | Path, strict: bool = False) -> VectorStore:
    """Load a vector file (binary or text, detected by magic).

    Rows whose norm is outside 1 +/- 1e-3 are rejected and counted on the
    returned store's ``rejected_rows`` attribute (strict mode aborts instead);
    a dimension mismatch or duplicate key always aborts.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return _load_binary(path, strict)
    return _load_text(path, strict)


def _add_row(store: VectorStore, key: str, values: np.ndarray, strict: bool, rejected: list[int]) -> None:
    try:
        store.add(key, values)
    except VectorFileError as exc:
        if "norm" in str(exc) and not strict:
            rejected.append(1)
            return
        raise


def _load_binary(path: Path, strict: bool) -> VectorStore:
    rejected: list[int] = []
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise VectorFileError("bad magic")
        version, dim, count, model_len = struct.unpack("<HIQH", fh.read(16))
        if version != FORMAT_VERSION:
            raise VectorFileError(f"unsupported format version {version}")
        model_id = fh.read(model_len).decode("utf-8")
        store = VectorStore(dim=dim, model_id=model_id)
        row_bytes = 4 * dim
        for _ in range(count):
            raw_len = fh.read(2)
            if len(raw_len) < 2:
                raise VectorFileError("truncated file: missing key length")
            (key_len,) = struct.unpack("<H", raw_len)
            key = fh.read(key_len).decode("utf-8")
            payload = fh.read(row_bytes)
            if len(payload) < row_bytes:
                raise VectorFileError(f"truncated vector for key {key!r}")
            values = np.frombuffer(payload, dtype="<f4")
            _add_row(store, key, values, strict, rejected)
        if fh.read(1):
            raise VectorFileError("trailing bytes after declared row count")
    store.rejected_rows = len(rejected)  # type: ignore[attr-defined]
    return store


def _load_text(path: Path, strict: bool) -> VectorStore:
    rejected: list[int] = []
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
            dim = int(header["dim"])
            count = int(header["count"])
            model_id = str(header["model_id"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise VectorFileError(f"bad text header: {exc}") from exc
        store = VectorStore(dim=dim, model_id=model_id)
        rows = 0
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            key, _, comp_str = line.partition("\t")
            if not comp_str:
                raise VectorFileError(f"row for {key!r} has no components")
            values = np.array([float(c) for c in comp_str.split()], dtype=np.float32)
            if values.shape != (dim,):
                raise VectorFileError(f"key {key!r}: expected dim {dim}, got {values.shape[0]}")
            _add_row(store, key, values, strict, rejected)
            rows += 1
        if rows != count:
            raise VectorFileError(f"header declared {count} rows, found {rows}")
    store.rejected_rows = len(rejected)  # type: ignore[attr-defined]
    return store


# ---------------------------------------------------------------------------
# Deterministic mock embedder

_TOKEN_RE = re.compile(r"[a-z0-9]+")

_FNV_OFFSET = 0x811C9DC5
_FNV_PRIME = 0x01000193


def _fnv1a32(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFF
    return h


class MockTextEmbedder:
    """Seeded hashing embedder: token n-grams feature-hashed into a unit vector.

    Components accumulate integer-valued contributions, so the (pre-norm)
    vector is exact and the output is bit-reproducible across runs, platforms,
    and reimplementations that follow the same recipe.  This stands in for the
    sentence-encoder sidecar in the primary test suite.
    """

    def __init__(self, dim: int = 256, seed: int = 0):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.seed = seed
        self.model_id = f"hash-ngram-v1:d{dim}:s{seed}"
        self._prefix = f"{seed}\x1f".encode("utf-8")

    def embed(self, text: str) -> np.ndarray:
        acc = np.zeros(self.dim, dtype=np.float64)
        tokens = _TOKEN_RE.findall(text.lower())
        for n in (1, 2, 3):
            for i in range(len(tokens) - n + 1):
                gram = " ".join(tokens[i : i + n])
                h = _fnv1a32(self._prefix + gram.encode("utf-8"))
                sign = 1.0 if (h >> 16) & 1 == 0 else -1.0
                acc[h % self.dim] += sign
        norm = math.sqrt(float(np.dot(acc, acc)))
        if norm == 0.0:
            raise ValueError("cannot embed empty or fully-cancelling text")
        return (acc / norm).astype(np.float32)

    def build_store(self, items: Iterable[tuple[str, str]]) -> VectorStore:
        store = VectorStore(dim=self.dim, model_id=self.model_id)
        for key, text in items:
            store.add(key, self.embed(text))
        return store
