"""Temporal + content attention pooling of post embeddings, plus the
ERKV1 embedding file format.

Run: python demos/03_temporal_attention.py
"""

import numpy as np

from riskbench.attention import (
    AttentionConfig,
    EmbeddingMatrix,
    aggregate_user,
    content_scores,
    read_embeddings,
    temporal_weights,
    write_embeddings,
)

cfg = AttentionConfig()  # dim 768, indices (15, 42, 127, 256, 512)
print("content indices:", cfg.content_indices)
print("content weights:", cfg.content_weights)

print("\ntemporal ramp for 1, 2, 4 posts:")
for n in (1, 2, 4):
    print(f"  n={n}: {np.round(temporal_weights(n, cfg), 3)}")

# Three posts: an early neutral one, then two that light up the
# highest-weighted content coordinate more strongly over time.
rng = np.random.default_rng(0)
emb = rng.normal(scale=0.05, size=(3, 768)).astype(np.float32)
emb[1, 15] += 1.0
emb[2, 15] += 2.0

print("\ncontent scores:", np.round(content_scores(emb, cfg), 3))
pooled, alpha = aggregate_user(emb, cfg)
print("attention alpha:", np.round(alpha, 3), "(sums to", round(float(alpha.sum()), 9), ")")
print("pooled[15] between per-post min/max:",
      float(emb[:, 15].min()) <= float(pooled[15]) <= float(emb[:, 15].max()))

print("\nsingle post is returned unchanged:")
one, alpha_one = aggregate_user(emb[:1], cfg)
print("  alpha:", alpha_one, " identical:", bool(np.array_equal(one, emb[0].astype(np.float64))))

print("\nERKV1 round trip:")
matrix = EmbeddingMatrix(dim=768)
for i, row in enumerate(emb):
    matrix.add(f"post-{i}", row)
blob = write_embeddings(matrix)
again = read_embeddings(blob)
print(f"  {len(blob)} bytes, dim {again.dim}, count {len(again)}, "
      f"bit-exact: {all(np.array_equal(again.records[k], matrix.records[k]) for k in matrix.records)}")
