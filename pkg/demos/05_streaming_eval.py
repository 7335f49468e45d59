"""Round-based early-detection simulation and its decision / ranking
metrics (precision, recall, F1, ERDE, latency, P@k, NDCG@k).

Run: python demos/05_streaming_eval.py
"""

from datetime import datetime, timedelta, timezone

from riskbench.corpus import RawPost, UserTimeline
from riskbench.stream import (
    StreamMetricConfig,
    erde,
    latency_metrics,
    precision_recall_f1,
    rank_metrics,
    run_simulation,
    scores_at,
)

T0 = datetime(2024, 3, 1, 12, 0, 0, tzinfo=timezone.utc)

# Six users, varying history lengths; risk rises over time for the rest.
profiles = {
    "anna": [0.1, 0.2, 0.3],
    "ben": [0.2, 0.7],
    "cara": [0.9],
    "dev": [0.3, 0.4, 0.6, 0.8],
    "eli": [0.1],
    "fay": [0.2, 0.55, 0.9],
}
labels = {"anna": 0, "ben": 1, "cara": 1, "dev": 1, "eli": 0, "fay": 0}

timelines = [
    UserTimeline(user, [RawPost(f"{user}-{i}", T0 + timedelta(hours=i), body=f"w{i}")
                        for i in range(len(scores))])
    for user, scores in profiles.items()
]

scorer = lambda user, posts: profiles[user][len(posts) - 1]
emissions, outcomes = run_simulation(timelines, scorer, threshold=0.5)

print("emissions (round, user, decision, score):")
for e in emissions:
    print(f"  r{e.round} {e.user_id:5} d={e.decision} s={e.score:.2f}")

print("\noutcomes:")
for o in outcomes:
    print(f"  {o.user_id:5} decision {o.final_decision} after {o.delay} writings")

p, r, f1 = precision_recall_f1(outcomes, labels)
print(f"\nP={p:.2f} R={r:.2f} F1={f1:.2f}")

cfg = StreamMetricConfig()
for horizon in cfg.erde_horizons:
    print(f"ERDE_{horizon} = {erde(outcomes, labels, horizon, cfg):.4f}")

latency_tp, speed, f_latency = latency_metrics(outcomes, labels, cfg)
print(f"latency_TP={latency_tp}, speed={speed:.4f}, F_latency={f_latency:.4f}")

print("\nranking after 1 writing vs after 3 writings:")
for checkpoint in (1, 3):
    snapshot = scores_at(outcomes, checkpoint)
    metrics = rank_metrics(snapshot, labels, cutoffs=(3,))
    print(f"  @{checkpoint} writings: P@3={metrics['p_at_3']:.2f} "
          f"NDCG@3={metrics['ndcg_at_3']:.3f}")
