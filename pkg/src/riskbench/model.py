"""Class-weighted logistic model trained by SGD, soft voting, decisions.

Tree ensembles are out of scope; probability files produced elsewhere can
be combined with :func:`soft_vote`. Shuffling and validation splits use
the xoshiro PRNG so a seed reproduces runs bit-identically anywhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSplit,
    DimMismatch,
    LengthMismatch,
    MalformedInput,
    OutOfRange,
    SingleClass,
)
from .rng import Xoshiro256StarStar

__all__ = [
    "LinearModel",
    "TrainConfig",
    "class_weights",
    "loss_and_grad",
    "train_sgd",
    "predict_proba",
    "soft_vote",
    "decide",
    "auc_score",
    "save_model",
    "load_model",
    "load_member_scores",
]


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    l2_lambda: float = 0.0

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 500
    l2_lambda: float = 1e-4
    class_weight_mode: str = "balanced"  # balanced | none | explicit
    explicit_weights: tuple[float, float] | None = None
    seed: int = 0
    validation_fraction: float = 0.0
    patience: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be >= 0")
        if self.class_weight_mode not in ("balanced", "none", "explicit"):
            raise ValueError(f"unknown class_weight_mode {self.class_weight_mode!r}")
        if self.class_weight_mode == "explicit" and self.explicit_weights is None:
            raise ValueError("explicit mode needs explicit_weights")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in [0, 1)")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "l2_lambda": self.l2_lambda,
            "class_weight_mode": self.class_weight_mode,
            "explicit_weights": list(self.explicit_weights) if self.explicit_weights else None,
            "seed": self.seed,
            "validation_fraction": self.validation_fraction,
            "patience": self.patience,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TrainConfig":
        ew = obj.get("explicit_weights")
        return cls(
            learning_rate=float(obj.get("learning_rate", 0.01)),
            epochs=int(obj.get("epochs", 500)),
            l2_lambda=float(obj.get("l2_lambda", 1e-4)),
            class_weight_mode=obj.get("class_weight_mode", "balanced"),
            explicit_weights=tuple(ew) if ew else None,
            seed=int(obj.get("seed", 0)),
            validation_fraction=float(obj.get("validation_fraction", 0.0)),
            patience=int(obj.get("patience", 0)),
        )


def class_weights(labels) -> tuple[float, float]:
    """Balanced weights w_c = N / (2 * N_c) for classes 0 and 1."""
    y = np.asarray(labels)
    n = y.size
    n_pos = int(np.count_nonzero(y))
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("both classes must be present")
    return n / (2.0 * n_neg), n / (2.0 * n_pos)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_grad(model: LinearModel, X, y, sample_weights=None) -> tuple[float, np.ndarray]:
    """Weighted-mean cross-entropy plus (lambda/2)*||w||^2 and its gradient.

    The gradient vector stacks d/dw (dim entries) followed by d/db. The
    weighted mean divides by the sum of sample weights; the bias is not
    regularized.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if sample_weights is None:
        s = np.ones_like(y)
    else:
        s = np.asarray(sample_weights, dtype=np.float64)
    z = X @ model.weights + model.bias
    p = _sigmoid(z)
    # -[y log p + (1-y) log(1-p)] written as logaddexp(0, z) - y*z for stability.
    ce = np.logaddexp(0.0, z) - y * z
    s_total = s.sum()
    loss = float((s * ce).sum() / s_total + 0.5 * model.l2_lambda * model.weights @ model.weights)
    resid = s * (p - y) / s_total
    grad_w = X.T @ resid + model.l2_lambda * model.weights
    grad_b = resid.sum()
    return loss, np.concatenate([grad_w, [grad_b]])


def _sigmoid_scalar(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-min(z, 500.0)))
    ez = math.exp(max(z, -500.0))
    return ez / (1.0 + ez)


def _sample_weights(y: np.ndarray, cfg: TrainConfig) -> np.ndarray:
    if cfg.class_weight_mode == "none":
        return np.ones(y.size, dtype=np.float64)
    if cfg.class_weight_mode == "balanced":
        w0, w1 = class_weights(y)
    else:
        w0, w1 = cfg.explicit_weights
    return np.where(y > 0, w1, w0).astype(np.float64)


def auc_score(scores, labels) -> float:
    """Rank-statistic AUC; tied scores receive 0.5 credit."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    n_pos = int(np.count_nonzero(y))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both classes")
    order = np.argsort(s, kind="stable")
    ranks = np.empty(y.size, dtype=np.float64)
    sorted_s = s[order]
    i = 0
    while i < y.size:
        j = i
        while j + 1 < y.size and sorted_s[j + 1] == sorted_s[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum_pos = float(ranks[np.asarray(y) > 0].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def train_sgd(X, y, cfg: TrainConfig = TrainConfig()) -> LinearModel:
    """Per-sample SGD on weighted log loss with L2; deterministic per seed.

    With validation_fraction > 0 the run keeps the parameters with the
    best validation AUC, starting from the untrained model as baseline,
    and stops after `patience` consecutive non-improving epochs.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise LengthMismatch(f"X shape {X.shape} does not align with {y.size} labels")
    if X.shape[0] < 2:
        raise DegenerateSplit("need at least 2 samples")

    rng = Xoshiro256StarStar(cfg.seed)
    indices = list(range(X.shape[0]))
    if cfg.validation_fraction > 0.0:
        rng.shuffle(indices)
        n_val = int(round(X.shape[0] * cfg.validation_fraction))
        if n_val < 1 or X.shape[0] - n_val < 2:
            raise DegenerateSplit("validation split leaves too few samples")
        val_idx = np.array(indices[:n_val])
        train_idx = np.array(indices[n_val:])
        if len(set(y[val_idx])) < 2:
            raise DegenerateSplit("validation split lacks a class")
    else:
        val_idx = None
        train_idx = np.array(indices)

    y_train = y[train_idx]
    if len(set(y_train)) < 2:
        raise SingleClass("training split has a single class")
    X_train = X[train_idx]
    sw = _sample_weights(y_train.astype(int), cfg)

    w = np.zeros(X.shape[1], dtype=np.float64)
    b = 0.0
    best_w, best_b = w.copy(), b
    if val_idx is not None:
        best_auc = auc_score(X[val_idx] @ w + b, y[val_idx])
        bad_epochs = 0

    order = list(range(X_train.shape[0]))
    for _ in range(cfg.epochs):
        rng.shuffle(order)
        for i in order:
            p = _sigmoid_scalar(float(X_train[i] @ w + b))
            g = sw[i] * (p - y_train[i])
            w -= cfg.learning_rate * (g * X_train[i] + cfg.l2_lambda * w)
            b -= cfg.learning_rate * g
        if val_idx is not None:
            auc = auc_score(X[val_idx] @ w + b, y[val_idx])
            if auc > best_auc:
                best_auc = auc
                best_w, best_b = w.copy(), b
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs > cfg.patience:
                    break
        else:
            best_w, best_b = w, b
    return LinearModel(weights=best_w.copy(), bias=float(best_b), l2_lambda=cfg.l2_lambda)


def predict_proba(model: LinearModel, x) -> float:
    """Sigmoid of the linear score for one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.weights.shape:
        raise DimMismatch(f"x shape {x.shape}, model dim {model.weights.shape}")
    return _sigmoid_scalar(float(x @ model.weights + model.bias))


def soft_vote(prob_lists) -> list[float]:
    """Elementwise arithmetic mean of aligned probability vectors."""
    members = [list(p) for p in prob_lists]
    if not members:
        raise LengthMismatch("no members to vote")
    length = len(members[0])
    for m in members:
        if len(m) != length:
            raise LengthMismatch("probability vectors differ in length")
        for p in m:
            if not 0.0 <= p <= 1.0:
                raise OutOfRange(f"probability {p} outside [0, 1]")
    return [math.fsum(m[i] for m in members) / len(members) for i in range(length)]


def decide(p: float, threshold: float = 0.5) -> int:
    """1 when p >= threshold, else 0."""
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"probability {p} outside [0, 1]")
    if not 0.0 <= threshold <= 1.0:
        raise OutOfRange(f"threshold {threshold} outside [0, 1]")
    return 1 if p >= threshold else 0


def save_model(model: LinearModel, trained_with: TrainConfig | None = None) -> bytes:
    obj = {
        "dim": model.dim,
        "weights": [float(v) for v in model.weights],
        "bias": float(model.bias),
        "lambda": float(model.l2_lambda),
        "trained_with": trained_with.to_dict() if trained_with else None,
    }
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8")


def load_model(data: bytes | str) -> LinearModel:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
        weights = np.asarray(obj["weights"], dtype=np.float64)
        model = LinearModel(weights=weights, bias=float(obj["bias"]),
                            l2_lambda=float(obj.get("lambda", 0.0)))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"bad model file: {exc}") from exc
    if model.dim != int(obj.get("dim", model.dim)):
        raise MalformedInput("declared dim does not match weights")
    if not (np.all(np.isfinite(model.weights)) and math.isfinite(model.bias)):
        raise MalformedInput("model parameters must be finite")
    return model


def load_member_scores(data: bytes | str) -> dict[str, float]:
    """Read one voting member's JSONL of {"user_id":..., "proba":...}."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    scores: dict[str, float] = {}
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            user, proba = obj["user_id"], float(obj["proba"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"line {lineno}: {exc}") from exc
        if not 0.0 <= proba <= 1.0:
            raise OutOfRange(f"line {lineno}: proba {proba} outside [0, 1]")
        scores[user] = proba
    return scores
