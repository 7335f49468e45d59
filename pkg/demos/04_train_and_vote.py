"""Class-weighted SGD logistic training, probability prediction, and
soft voting over member score files.

Run: python demos/04_train_and_vote.py
"""

import numpy as np

from riskbench.model import (
    TrainConfig,
    auc_score,
    class_weights,
    decide,
    load_member_scores,
    predict_proba,
    soft_vote,
    train_sgd,
)

rng = np.random.default_rng(1)

# Imbalanced two-class blob data, 8:1 like the task collection.
n_neg, n_pos = 400, 50
X = np.vstack([
    rng.normal(loc=(-1.0, -1.0), scale=0.8, size=(n_neg, 2)),
    rng.normal(loc=(1.5, 1.5), scale=0.8, size=(n_pos, 2)),
])
y = np.array([0] * n_neg + [1] * n_pos)

w0, w1 = class_weights(y)
print(f"balanced class weights: w0={w0:.3f} w1={w1:.3f} (ratio {w1 / w0:.2f})")

cfg = TrainConfig(learning_rate=0.05, epochs=120, l2_lambda=1e-4,
                  seed=42, validation_fraction=0.2, patience=10)
model = train_sgd(X, y, cfg)
scores = [predict_proba(model, x) for x in X]
print(f"training AUC: {auc_score(scores, y):.3f}")
print(f"weights: {np.round(model.weights, 3)}, bias {model.bias:.3f}")

print("\ndeterminism: same seed, same parameters:",
      bool(np.array_equal(train_sgd(X, y, cfg).weights, model.weights)))

print("\nsoft voting over three members:")
member_files = [
    b'{"user_id": "u1", "proba": 0.20}\n{"user_id": "u2", "proba": 0.90}',
    b'{"user_id": "u1", "proba": 0.40}\n{"user_id": "u2", "proba": 0.70}',
    b'{"user_id": "u1", "proba": 0.30}\n{"user_id": "u2", "proba": 0.95}',
]
members = [load_member_scores(data) for data in member_files]
users = sorted(members[0])
combined = soft_vote([[m[u] for u in users] for m in members])
for user, p in zip(users, combined):
    print(f"  {user}: mean proba {p:.3f} -> decision {decide(p)}")
