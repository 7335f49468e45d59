"""Temporal + content attention pooling over per-post embeddings.

Aggregation has four steps: a fixed sparse content vector scores each
post, softmax turns the scores into probabilities, a chronological linear
ramp reweights them, and the renormalized weights form the convex
combination of post embeddings. Embeddings travel in the ERKV1 binary
format defined at the bottom of this module.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import BadMagic, DimMismatch, DuplicatePost, TruncatedFile, ZeroPosts

__all__ = [
    "EmbeddingMatrix",
    "AttentionConfig",
    "read_embeddings",
    "write_embeddings",
    "temporal_weights",
    "content_scores",
    "aggregate_user",
]

MAGIC = b"ERKV1\n"

DEFAULT_CONTENT_INDICES = (15, 42, 127, 256, 512)
DEFAULT_CONTENT_WEIGHTS = (0.9, 0.7, 0.8, 0.6, 0.7)


@dataclass
class EmbeddingMatrix:
    """Ordered post_id -> f32 vector map with a fixed dimension."""

    dim: int
    records: dict[str, np.ndarray] = field(default_factory=dict)

    def add(self, post_id: str, vector: np.ndarray) -> None:
        if post_id in self.records:
            raise DuplicatePost(f"duplicate embedding id {post_id!r}")
        vec = np.asarray(vector, dtype=np.float32)
        if vec.shape != (self.dim,):
            raise DimMismatch(f"vector for {post_id!r} has shape {vec.shape}, want ({self.dim},)")
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"non-finite values in embedding {post_id!r}")
        self.records[post_id] = vec

    def __len__(self) -> int:
        return len(self.records)

    def matrix(self, post_ids=None) -> np.ndarray:
        """Stack vectors (all records, or the given ids in order) into (n, dim)."""
        if post_ids is None:
            vecs = list(self.records.values())
        else:
            vecs = [self.records[p] for p in post_ids]
        if not vecs:
            return np.empty((0, self.dim), dtype=np.float32)
        return np.stack(vecs)


@dataclass(frozen=True)
class AttentionConfig:
    """Fixed attention constants; defaults follow the shipped configuration."""

    dim: int = 768
    content_indices: tuple[int, ...] = DEFAULT_CONTENT_INDICES
    content_weights: tuple[float, ...] = DEFAULT_CONTENT_WEIGHTS
    ramp_low: float = 0.1
    ramp_high: float = 1.0
    window: int | None = None

    def __post_init__(self):
        if len(self.content_indices) != len(self.content_weights):
            raise ValueError("content_indices and content_weights must align")
        if any(b <= a for a, b in zip(self.content_indices, self.content_indices[1:])):
            raise ValueError("content_indices must be strictly increasing")
        if self.content_indices and self.content_indices[-1] >= self.dim:
            raise ValueError("content index exceeds dimension")
        if self.content_indices and self.content_indices[0] < 0:
            raise ValueError("content index negative")
        if not (0.0 < self.ramp_low <= self.ramp_high):
            raise ValueError("require 0 < ramp_low <= ramp_high")
        if self.window is not None and self.window < 1:
            raise ValueError("window must be >= 1 when set")


def read_embeddings(data: bytes) -> EmbeddingMatrix:
    """Parse an ERKV1 blob; vectors round-trip bit-exactly as f32."""
    if not data.startswith(MAGIC):
        raise BadMagic(f"expected {MAGIC!r} prefix")
    header_end = data.find(b"\n", len(MAGIC))
    if header_end < 0:
        raise TruncatedFile("missing header line")
    try:
        header = json.loads(data[len(MAGIC):header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TruncatedFile(f"unreadable header: {exc}") from exc
    dim = header.get("dim")
    count = header.get("count")
    if not isinstance(dim, int) or dim < 1 or not isinstance(count, int) or count < 0:
        raise DimMismatch(f"bad header dim/count: {header!r}")
    if header.get("dtype") != "f32le":
        raise DimMismatch(f"unsupported dtype {header.get('dtype')!r}")

    matrix = EmbeddingMatrix(dim=dim)
    offset = header_end + 1
    vec_bytes = 4 * dim
    for i in range(count):
        if offset + 4 > len(data):
            raise TruncatedFile(f"record {i}: missing id length")
        (id_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        if offset + id_len > len(data):
            raise TruncatedFile(f"record {i}: missing id bytes")
        post_id = data[offset:offset + id_len].decode("utf-8")
        offset += id_len
        if offset + vec_bytes > len(data):
            raise TruncatedFile(f"record {i} ({post_id!r}): expected {dim} f32 values")
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += vec_bytes
        matrix.add(post_id, vec)
    return matrix


def write_embeddings(matrix: EmbeddingMatrix) -> bytes:
    """Serialize to ERKV1: magic, JSON header line, then length-prefixed records."""
    parts = [MAGIC]
    header = {"dim": matrix.dim, "count": len(matrix), "dtype": "f32le"}
    parts.append(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
    for post_id, vec in matrix.records.items():
        id_bytes = post_id.encode("utf-8")
        parts.append(struct.pack("<I", len(id_bytes)))
        parts.append(id_bytes)
        parts.append(np.asarray(vec, dtype="<f4").tobytes())
    return b"".join(parts)


def temporal_weights(n: int, cfg: AttentionConfig = AttentionConfig()) -> np.ndarray:
    """Linear ramp over chronological positions, ramp_low..ramp_high."""
    if n < 1:
        raise ZeroPosts("temporal_weights requires n >= 1")
    if n == 1:
        return np.array([cfg.ramp_high], dtype=np.float64)
    i = np.arange(n, dtype=np.float64)
    return cfg.ramp_low + (cfg.ramp_high - cfg.ramp_low) * i / (n - 1)


def content_scores(embeddings: np.ndarray, cfg: AttentionConfig = AttentionConfig()) -> np.ndarray:
    """Dot product of each post embedding with the sparse content vector."""
    emb = np.asarray(embeddings, dtype=np.float64)
    if emb.ndim != 2 or emb.shape[1] != cfg.dim:
        raise DimMismatch(f"embeddings shape {emb.shape}, want (n, {cfg.dim})")
    idx = np.asarray(cfg.content_indices, dtype=np.intp)
    w = np.asarray(cfg.content_weights, dtype=np.float64)
    if idx.size == 0:
        return np.zeros(emb.shape[0], dtype=np.float64)
    return emb[:, idx] @ w


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max()
    e = np.exp(shifted)
    return e / e.sum()


def aggregate_user(
    embeddings: np.ndarray, cfg: AttentionConfig = AttentionConfig()
) -> tuple[np.ndarray, np.ndarray]:
    """Pool chronologically ordered post embeddings into one user vector.

    Content scores are softmax-normalized into probabilities, multiplied by
    the temporal ramp, and renormalized; the result is the convex weights
    alpha. Returns (user_embedding, alpha). Accumulation is float64 even
    though storage is f32.
    """
    emb = np.asarray(embeddings, dtype=np.float64)
    if emb.ndim != 2:
        raise DimMismatch(f"expected a 2-D array, got shape {emb.shape}")
    if emb.shape[0] < 1:
        raise ZeroPosts("aggregate_user requires at least one post")
    if emb.shape[1] != cfg.dim:
        raise DimMismatch(f"embeddings dim {emb.shape[1]}, config dim {cfg.dim}")
    if cfg.window is not None and emb.shape[0] > cfg.window:
        emb = emb[-cfg.window:]

    p = _softmax(content_scores(emb, cfg))
    w = temporal_weights(emb.shape[0], cfg)
    combined = p * w
    alpha = combined / combined.sum()
    # Anchored sum: with sum(alpha) == 1 this equals alpha @ emb, but the
    # single-post and identical-post identities hold exactly in floats.
    base = emb[0]
    return base + alpha @ (emb - base), alpha
