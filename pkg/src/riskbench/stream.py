"""Round-based early-detection simulation and its evaluation metrics.

Round t releases the t-th writing of every still-unresolved user; the
scorer sees only writings 1..t. A positive decision resolves the user
permanently; users who run out of writings finalize as negative with
delay equal to their writing count. Metrics follow the decision-based
(P/R/F1, ERDE, latency) and ranking-based (P@k, NDCG@k) conventions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .corpus import UserTimeline
from .errors import EmptyTimeline, MalformedInput, MissingLabel, OutOfRange, ScorerFailure

__all__ = [
    "RoundEmission",
    "StreamOutcome",
    "StreamMetricConfig",
    "run_simulation",
    "precision_recall_f1",
    "erde",
    "latency_metrics",
    "rank_metrics",
    "scores_at",
    "write_emissions_jsonl",
    "outcomes_to_dict",
    "outcomes_from_dict",
]

LATENCY_P = 0.0078


@dataclass(frozen=True)
class RoundEmission:
    round: int
    user_id: str
    decision: int
    score: float


@dataclass
class StreamOutcome:
    user_id: str
    final_decision: int
    delay: int
    score_trajectory: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class StreamMetricConfig:
    erde_horizons: tuple[int, ...] = (5, 50)
    c_fp_mode: str = "prevalence"  # prevalence | fixed
    c_fp_fixed: float | None = None
    latency_p: float = LATENCY_P
    ranking_checkpoints: tuple[int, ...] = (1, 100)

    def __post_init__(self):
        if any(o < 1 for o in self.erde_horizons):
            raise ValueError("ERDE horizons must be >= 1")
        if self.c_fp_mode not in ("prevalence", "fixed"):
            raise ValueError(f"unknown c_fp_mode {self.c_fp_mode!r}")
        if self.c_fp_mode == "fixed" and self.c_fp_fixed is None:
            raise ValueError("fixed c_fp_mode needs c_fp_fixed")
        if self.latency_p <= 0:
            raise ValueError("latency_p must be positive")

    def to_dict(self) -> dict:
        return {
            "erde_horizons": list(self.erde_horizons),
            "c_fp_mode": self.c_fp_mode,
            "c_fp_fixed": self.c_fp_fixed,
            "latency_p": self.latency_p,
            "ranking_checkpoints": list(self.ranking_checkpoints),
        }


def run_simulation(
    timelines: list[UserTimeline],
    scorer,
    threshold: float = 0.5,
) -> tuple[list[RoundEmission], list[StreamOutcome]]:
    """Run the release-score-decide loop until every user is resolved.

    ``scorer(user_id, posts_so_far)`` returns a score in [0, 1]; the
    decision is positive when score >= threshold. Scorer exceptions are
    re-raised as :class:`ScorerFailure` with user and round context.
    Emissions are ordered by round, then user_id.
    """
    for tl in timelines:
        if not tl.posts:
            raise EmptyTimeline(f"user {tl.user_id!r} has no writings")
    by_user = {tl.user_id: tl for tl in sorted(timelines, key=lambda t: t.user_id)}
    unresolved = set(by_user)
    trajectories: dict[str, list[float]] = {u: [] for u in by_user}
    resolved_at: dict[str, int] = {}
    emissions: list[RoundEmission] = []

    round_no = 0
    while unresolved:
        round_no += 1
        active = [u for u in sorted(unresolved) if len(by_user[u].posts) >= round_no]
        if not active:
            break
        for user in active:
            posts = by_user[user].posts[:round_no]
            try:
                score = float(scorer(user, posts))
            except Exception as exc:
                raise ScorerFailure(user, round_no, exc) from exc
            decision = 1 if score >= threshold else 0
            emissions.append(RoundEmission(round_no, user, decision, score))
            trajectories[user].append(score)
            if decision == 1:
                resolved_at[user] = round_no
                unresolved.discard(user)

    outcomes = []
    for user in sorted(by_user):
        if user in resolved_at:
            outcomes.append(
                StreamOutcome(user, 1, resolved_at[user], trajectories[user])
            )
        else:
            outcomes.append(
                StreamOutcome(user, 0, len(by_user[user].posts), trajectories[user])
            )
    return emissions, outcomes


def _check_labels(outcomes: list[StreamOutcome], labels: dict[str, int]) -> None:
    for o in outcomes:
        if o.user_id not in labels:
            raise MissingLabel(f"user {o.user_id!r} has no label")


def precision_recall_f1(
    outcomes: list[StreamOutcome], labels: dict[str, int]
) -> tuple[float, float, float]:
    """Precision, recall, F1 on final decisions; 0/0 ratios are 0."""
    _check_labels(outcomes, labels)
    tp = sum(1 for o in outcomes if o.final_decision == 1 and labels[o.user_id] == 1)
    fp = sum(1 for o in outcomes if o.final_decision == 1 and labels[o.user_id] == 0)
    fn = sum(1 for o in outcomes if o.final_decision == 0 and labels[o.user_id] == 1)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _c_fp(labels: dict[str, int], cfg: StreamMetricConfig) -> float:
    if cfg.c_fp_mode == "fixed":
        return float(cfg.c_fp_fixed)
    if not labels:
        return 0.0
    return sum(labels.values()) / len(labels)


def erde(
    outcomes: list[StreamOutcome],
    labels: dict[str, int],
    horizon: int,
    cfg: StreamMetricConfig = StreamMetricConfig(),
) -> float:
    """Early Risk Detection Error at the given horizon.

    Per user: TP costs 1 - 1/(1 + e^(k - horizon)) with k the delay, FP
    costs c_fp (positive prevalence by default), FN costs 1, TN costs 0;
    the metric is the mean over users.
    """
    if horizon < 1:
        raise OutOfRange("horizon must be >= 1")
    _check_labels(outcomes, labels)
    c_fp = _c_fp(labels, cfg)
    costs = []
    for o in outcomes:
        truth = labels[o.user_id]
        if o.final_decision == 1 and truth == 1:
            costs.append(1.0 - 1.0 / (1.0 + math.exp(min(o.delay - horizon, 500))))
        elif o.final_decision == 1 and truth == 0:
            costs.append(c_fp)
        elif o.final_decision == 0 and truth == 1:
            costs.append(1.0)
        else:
            costs.append(0.0)
    return math.fsum(costs) / len(costs) if costs else 0.0


def _median(values: list[float]) -> float:
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    if n % 2:
        return float(ordered[mid])
    return 0.5 * (ordered[mid - 1] + ordered[mid])


def latency_penalty(k: int, p: float = LATENCY_P) -> float:
    """-1 + 2 / (1 + e^(-p (k-1))); zero for a decision at the first writing."""
    return -1.0 + 2.0 / (1.0 + math.exp(-p * (k - 1)))


def latency_metrics(
    outcomes: list[StreamOutcome],
    labels: dict[str, int],
    cfg: StreamMetricConfig = StreamMetricConfig(),
) -> tuple[float | None, float | None, float | None]:
    """(latency_TP, speed, F_latency); all None when there is no true positive.

    latency_TP is the median delay over true positives, speed is one minus
    the median latency penalty, and F_latency scales F1 by speed.
    """
    _check_labels(outcomes, labels)
    tp_delays = [
        o.delay for o in outcomes if o.final_decision == 1 and labels[o.user_id] == 1
    ]
    if not tp_delays:
        return None, None, None
    latency_tp = _median([float(k) for k in tp_delays])
    speed = 1.0 - _median([latency_penalty(k, cfg.latency_p) for k in tp_delays])
    _, _, f1 = precision_recall_f1(outcomes, labels)
    return latency_tp, speed, f1 * speed


def scores_at(outcomes: list[StreamOutcome], writing_count: int) -> dict[str, float]:
    """Each user's score after `writing_count` writings, carrying the last
    score forward for users with shorter histories."""
    if writing_count < 1:
        raise OutOfRange("writing_count must be >= 1")
    out = {}
    for o in outcomes:
        if not o.score_trajectory:
            continue
        idx = min(writing_count, len(o.score_trajectory)) - 1
        out[o.user_id] = o.score_trajectory[idx]
    return out


def rank_metrics(
    scores: dict[str, float],
    labels: dict[str, int],
    cutoffs: tuple[int, ...] = (10, 100),
) -> dict[str, float]:
    """P@k and NDCG@k for a score snapshot.

    Users are ranked by score descending with user_id as the tie-break.
    P@k divides by min(k, n); NDCG uses binary relevance with DCG =
    sum(rel_i / log2(i + 1)) and is 0 when no user is positive.
    """
    for user in scores:
        if user not in labels:
            raise MissingLabel(f"user {user!r} has no label")
    ranked = sorted(scores, key=lambda u: (-scores[u], u))
    rels = [labels[u] for u in ranked]
    n_pos = sum(rels)
    out: dict[str, float] = {}
    for k in cutoffs:
        top = rels[:k]
        out[f"p_at_{k}"] = sum(top) / min(k, len(rels)) if rels else 0.0
        if n_pos == 0:
            out[f"ndcg_at_{k}"] = 0.0
            continue
        dcg = math.fsum(rel / math.log2(i + 2) for i, rel in enumerate(top))
        ideal = sorted(rels, reverse=True)[:k]
        idcg = math.fsum(rel / math.log2(i + 2) for i, rel in enumerate(ideal))
        out[f"ndcg_at_{k}"] = dcg / idcg if idcg > 0 else 0.0
    return out


def write_emissions_jsonl(emissions: list[RoundEmission]) -> bytes:
    lines = [
        json.dumps(
            {"round": e.round, "user": e.user_id, "decision": e.decision, "score": e.score},
            sort_keys=True,
        )
        for e in emissions
    ]
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def outcomes_to_dict(outcomes: list[StreamOutcome]) -> list[dict]:
    return [
        {
            "user_id": o.user_id,
            "final_decision": o.final_decision,
            "delay": o.delay,
            "score_trajectory": o.score_trajectory,
        }
        for o in outcomes
    ]


def outcomes_from_dict(data) -> list[StreamOutcome]:
    try:
        return [
            StreamOutcome(
                user_id=o["user_id"],
                final_decision=int(o["final_decision"]),
                delay=int(o["delay"]),
                score_trajectory=[float(s) for s in o["score_trajectory"]],
            )
            for o in data
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"bad outcomes payload: {exc}") from exc
