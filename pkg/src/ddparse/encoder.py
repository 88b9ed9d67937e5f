"""Level-specific contextual EDU vectors.

Two sources are supported: a built-in deterministic encoder that makes
the whole pipeline runnable and testable without any pretrained model,
and a loader for embedding files produced externally.

The built-in encoder derives a unit-norm pseudo-random vector per token
(64-bit FNV-1a over the UTF-8 bytes, mixed with the seed, driving a
splitmix64 stream), averages token vectors into a raw EDU vector, and
adds half of the mean raw vector of the EDU's context window: the
enclosing sentence at the intra level, the sentence-root pseudo
sentence at the inter level.  Identical text, seed and dimension give
byte-identical vectors on every platform.

Embedding files are NDJSON with a header line {"dim": d} followed by
    {"doc_id": str, "level": "intra"|"inter"|"pair",
     "edu": int | [int, int], "vector": [float, ...]}
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .corpus import Document

log = logging.getLogger("ddparse")

LEVELS = ("intra", "inter", "pair")

_MASK = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_GOLDEN = 0x9E3779B97F4A7C15


class EmbeddingError(ValueError):
    """Raised for malformed embedding files or missing entries."""


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK
    return h


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + _GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def _mix64(value: int) -> int:
    _, mixed = _splitmix64(value & _MASK)
    return mixed


def token_vector(token: str, dim: int, seed: int) -> np.ndarray:
    """Unit-norm pseudo-random vector, a pure function of (token, dim, seed)."""
    state = _fnv1a64(token.encode("utf-8")) ^ _mix64(seed)
    components = np.empty(dim, dtype=np.float64)
    for j in range(dim):
        state, value = _splitmix64(state)
        components[j] = 2.0 * (value / 2.0 ** 64) - 1.0
    norm = float(np.linalg.norm(components))
    if norm < 1e-12:
        components[0] = 1.0
        norm = 1.0
    return components / norm


def _raw_edu_vector(tokens: tuple[str, ...], dim: int, seed: int) -> np.ndarray:
    return np.mean([token_vector(t, dim, seed) for t in tokens], axis=0)


def encode_intra_builtin(doc: Document, dim: int = 64, seed: int = 42) -> dict[int, np.ndarray]:
    """Intra-level vectors: raw EDU vector plus half the sentence mean."""
    if dim < 8:
        raise EmbeddingError(f"builtin encoder needs dim >= 8, got {dim}")
    raw = {edu.id: _raw_edu_vector(edu.tokens, dim, seed) for edu in doc.edus}
    vectors = {}
    for first, last in doc.sentence_spans:
        context = np.mean([raw[i] for i in range(first, last + 1)], axis=0)
        for i in range(first, last + 1):
            vectors[i] = raw[i] + 0.5 * context
    return vectors


def encode_inter_builtin(doc: Document, roots: list[int], dim: int = 64,
                         seed: int = 42) -> dict[int, np.ndarray]:
    """Inter-level vectors for sentence roots; the context window is the
    pseudo sentence formed by all roots."""
    if not roots:
        raise EmbeddingError("inter encoding needs at least one root")
    if dim < 8:
        raise EmbeddingError(f"builtin encoder needs dim >= 8, got {dim}")
    raw = {i: _raw_edu_vector(doc.edu(i).tokens, dim, seed) for i in roots}
    context = np.mean([raw[i] for i in roots], axis=0)
    return {i: raw[i] + 0.5 * context for i in roots}


def encode_pair_builtin(doc: Document, pairs: list[tuple[int, int]], dim: int = 64,
                        seed: int = 42) -> dict[tuple[int, int], np.ndarray]:
    """Pair vectors: the mean of the two members' intra vectors, in document
    order; a root pair (e, 0) reuses e's intra vector unchanged."""
    intra = encode_intra_builtin(doc, dim, seed)
    vectors = {}
    for e, h in pairs:
        if h == 0:
            vectors[(e, h)] = intra[e]
        else:
            a, b = sorted((e, h))
            vectors[(e, h)] = 0.5 * (intra[a] + intra[b])
    return vectors


@dataclass
class EmbeddingTable:
    """Vectors keyed by (doc_id, level, key); key is an EDU id for the
    intra/inter levels and an (edu, head) pair for the pair level."""

    dim: int
    entries: dict[tuple, np.ndarray] = field(default_factory=dict)

    def put(self, doc_id: str, level: str, key, vector: np.ndarray) -> None:
        if level not in LEVELS:
            raise EmbeddingError(f"unknown level {level!r}")
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.dim,):
            raise EmbeddingError(
                f"vector for ({doc_id}, {level}, {key}) has length {vector.shape[0]}, "
                f"expected {self.dim}"
            )
        if not np.all(np.isfinite(vector)):
            raise EmbeddingError(f"vector for ({doc_id}, {level}, {key}) is not finite")
        full_key = (doc_id, level, key)
        if full_key in self.entries:
            raise EmbeddingError(f"duplicate embedding key {full_key}")
        self.entries[full_key] = vector

    def get(self, doc_id: str, level: str, key) -> np.ndarray | None:
        return self.entries.get((doc_id, level, key))

    def __len__(self) -> int:
        return len(self.entries)


def load_embeddings(path) -> EmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
            dim = int(header["dim"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            raise EmbeddingError(f"{path}: first line must be a {{\"dim\": int}} header") from None
        table = EmbeddingTable(dim)
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                doc_id = record["doc_id"]
                level = record["level"]
                key = record["edu"]
                vector = record["vector"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise EmbeddingError(f"{path}:{line_no}: bad record: {exc}") from None
            if isinstance(key, list):
                key = tuple(int(k) for k in key)
            else:
                key = int(key)
            if len(vector) != dim:
                raise EmbeddingError(
                    f"{path}:{line_no}: vector length {len(vector)} != header dim {dim}"
                )
            try:
                table.put(doc_id, level, key, np.asarray(vector, dtype=np.float64))
            except EmbeddingError as exc:
                raise EmbeddingError(f"{path}:{line_no}: {exc}") from None
    return table


def save_embeddings(table: EmbeddingTable, path) -> None:
    """Write the table back out; floats keep full round-trip precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": table.dim}) + "\n")
        for (doc_id, level, key), vector in table.entries.items():
            record = {
                "doc_id": doc_id,
                "level": level,
                "edu": list(key) if isinstance(key, tuple) else key,
                "vector": [float(x) for x in vector],
            }
            fh.write(json.dumps(record) + "\n")


class BuiltinEncoder:
    """On-the-fly deterministic encoder exposing the three levels."""

    def __init__(self, dim: int = 64, seed: int = 42):
        self.dim = dim
        self.seed = seed

    def intra(self, doc: Document) -> dict[int, np.ndarray]:
        return encode_intra_builtin(doc, self.dim, self.seed)

    def inter(self, doc: Document, roots: list[int]) -> dict[int, np.ndarray]:
        return encode_inter_builtin(doc, roots, self.dim, self.seed)

    def pair(self, doc: Document, pairs: list[tuple[int, int]]) -> dict[tuple[int, int], np.ndarray]:
        return encode_pair_builtin(doc, pairs, self.dim, self.seed)


class TableEncoder:
    """Encoder backed by a loaded EmbeddingTable.

    Missing intra/inter vectors are an error naming the EDU; missing pair
    vectors fall back to the built-in pair recipe with a logged warning,
    since predicted heads can produce pairs absent from an exported file.
    """

    def __init__(self, table: EmbeddingTable, seed: int = 42):
        self.table = table
        self.dim = table.dim
        self.seed = seed

    def _lookup(self, doc_id: str, level: str, key):
        vector = self.table.get(doc_id, level, key)
        if vector is None:
            raise EmbeddingError(f"no {level} embedding for EDU {key} of {doc_id}")
        return vector

    def intra(self, doc: Document) -> dict[int, np.ndarray]:
        return {edu.id: self._lookup(doc.doc_id, "intra", edu.id) for edu in doc.edus}

    def inter(self, doc: Document, roots: list[int]) -> dict[int, np.ndarray]:
        return {i: self._lookup(doc.doc_id, "inter", i) for i in roots}

    def pair(self, doc: Document, pairs: list[tuple[int, int]]) -> dict[tuple[int, int], np.ndarray]:
        vectors = {}
        missing = []
        for pair in pairs:
            found = self.table.get(doc.doc_id, "pair", pair)
            if found is None:
                missing.append(pair)
            else:
                vectors[pair] = found
        if missing:
            log.warning("event=pair_fallback doc=%s missing=%d", doc.doc_id, len(missing))
            vectors.update(encode_pair_builtin(doc, missing, self.dim, self.seed))
        return vectors
