from __future__ import annotations

import math
import random

import numpy as np
import pytest

from riskbench.attention import AttentionConfig, aggregate_user
from riskbench.errors import EmptyTimeline, MissingLabel, ScorerFailure
from riskbench.model import LinearModel, predict_proba
from riskbench.stream import (
    StreamMetricConfig,
    StreamOutcome,
    erde,
    latency_metrics,
    latency_penalty,
    outcomes_from_dict,
    outcomes_to_dict,
    precision_recall_f1,
    rank_metrics,
    run_simulation,
    scores_at,
    write_emissions_jsonl,
)

from conftest import make_post, make_timeline, ts
from reference import (
    bf_aggregate,
    naive_erde,
    naive_latency,
    naive_prf,
    naive_rank,
    naive_simulate,
)


def corpus_of(writing_counts: dict[str, int]):
    out = []
    for user, n in writing_counts.items():
        posts = [make_post(f"{user}-p{i:02d}", ts(8 + i % 10, day=1 + i // 10), body=f"w{i}")
                 for i in range(n)]
        out.append(make_timeline(user, posts))
    return out


def outcome(user, decision, delay, trajectory):
    return StreamOutcome(user, decision, delay, list(trajectory))


class TestSimulation:
    def test_always_positive_resolves_round_one(self):
        emissions, outcomes = run_simulation(corpus_of({"a": 3, "b": 2}), lambda u, p: 1.0)
        assert all(o.final_decision == 1 and o.delay == 1 for o in outcomes)
        assert [e.round for e in emissions] == [1, 1]

    def test_positive_from_round_two(self):
        scorer = lambda u, posts: 1.0 if len(posts) >= 2 else 0.0
        emissions, outcomes = run_simulation(corpus_of({"a": 3, "b": 2}), scorer)
        assert all(o.final_decision == 1 and o.delay == 2 for o in outcomes)

    def test_exhausted_users_finalize_negative(self):
        _, outcomes = run_simulation(corpus_of({"a": 3}), lambda u, p: 0.0)
        assert outcomes[0].final_decision == 0
        assert outcomes[0].delay == 3
        assert len(outcomes[0].score_trajectory) == 3

    def test_scorer_sees_only_prefix(self):
        seen = []
        def scorer(user, posts):
            seen.append((user, [p.post_id for p in posts]))
            return 0.0
        run_simulation(corpus_of({"a": 2}), scorer)
        assert seen == [("a", ["a-p00"]), ("a", ["a-p00", "a-p01"])]

    def test_no_emissions_after_resolution(self):
        scorer = lambda u, posts: 1.0 if (u == "a" and len(posts) == 1) else 0.0
        emissions, _ = run_simulation(corpus_of({"a": 4, "b": 2}), scorer)
        a_rounds = [e.round for e in emissions if e.user_id == "a"]
        assert a_rounds == [1]
        b_rounds = [e.round for e in emissions if e.user_id == "b"]
        assert b_rounds == [1, 2]

    def test_one_emission_per_round_while_active(self):
        emissions, _ = run_simulation(corpus_of({"a": 3, "b": 1}), lambda u, p: 0.0)
        per_round_users = {}
        for e in emissions:
            per_round_users.setdefault(e.round, []).append(e.user_id)
        assert per_round_users == {1: ["a", "b"], 2: ["a"], 3: ["a"]}

    def test_deterministic_user_order_within_round(self):
        emissions, _ = run_simulation(corpus_of({"z": 1, "a": 1, "m": 1}), lambda u, p: 0.0)
        assert [e.user_id for e in emissions] == ["a", "m", "z"]

    def test_scorer_failure_carries_context(self):
        def scorer(user, posts):
            if len(posts) == 2:
                raise RuntimeError("boom")
            return 0.0
        with pytest.raises(ScorerFailure) as info:
            run_simulation(corpus_of({"a": 3}), scorer)
        assert info.value.user_id == "a" and info.value.round_no == 2

    def test_empty_timeline_rejected(self):
        with pytest.raises(EmptyTimeline):
            run_simulation([make_timeline("a", [])], lambda u, p: 0.0)

    def test_matches_naive_protocol(self):
        rng = random.Random(5)
        for _ in range(30):
            counts = {f"u{i}": rng.randint(1, 4) for i in range(rng.randint(1, 6))}
            table = {(u, r): rng.random() for u in counts for r in range(1, counts[u] + 1)}
            scorer = lambda u, posts: table[(u, len(posts))]
            _, outcomes = run_simulation(corpus_of(counts), scorer, threshold=0.5)
            expected = naive_simulate(counts, table, threshold=0.5)
            got = {o.user_id: (o.final_decision, o.delay, o.score_trajectory)
                   for o in outcomes}
            assert got == expected

    def test_attention_logistic_pipeline_trace(self):
        # six users, embeddings with known content coordinates, tiny linear
        # model; every emitted score must match the independently composed
        # reference (brute-force pooling + explicit sigmoid).
        cfg = AttentionConfig(dim=4, content_indices=(0, 2), content_weights=(0.9, 0.7))
        rng = np.random.default_rng(12)
        counts = {f"u{i}": int(rng.integers(1, 4)) for i in range(6)}
        vectors = {
            (u, i): rng.normal(size=4).astype(np.float32)
            for u in counts for i in range(counts[u])
        }
        linear = LinearModel(weights=np.array([0.8, -0.5, 0.3, 0.1]), bias=-0.05)

        def scorer(user, posts):
            emb = np.stack([vectors[(user, i)] for i in range(len(posts))])
            vec, _ = aggregate_user(emb, cfg)
            return predict_proba(linear, vec)

        emissions, _ = run_simulation(corpus_of(counts), scorer, threshold=0.6)

        for e in emissions:
            rows = [vectors[(e.user_id, i)].astype(np.float64).tolist()
                    for i in range(e.round)]
            pooled, _ = bf_aggregate(rows, cfg.content_indices, cfg.content_weights,
                                     cfg.ramp_low, cfg.ramp_high)
            z = sum(w * x for w, x in zip([0.8, -0.5, 0.3, 0.1], pooled)) - 0.05
            expected = 1.0 / (1.0 + math.exp(-z))
            assert e.score == pytest.approx(expected, abs=1e-12)
            assert e.decision == (1 if e.score >= 0.6 else 0)


class TestDecisionMetrics:
    def test_flag_all_reference_row(self):
        outcomes = (
            [outcome(f"p{i}", 1, 2, [0.0, 1.0]) for i in range(297)]
            + [outcome(f"n{i}", 1, 2, [0.0, 1.0]) for i in range(2446)]
        )
        labels = {f"p{i}": 1 for i in range(297)} | {f"n{i}": 0 for i in range(2446)}
        p, r, f1 = precision_recall_f1(outcomes, labels)
        assert round(p, 2) == 0.11
        assert r == 1.0
        assert round(f1, 2) == 0.20

    def test_perfect_decisions(self):
        outcomes = [outcome("a", 1, 1, [1.0]), outcome("b", 0, 2, [0.0, 0.0])]
        assert precision_recall_f1(outcomes, {"a": 1, "b": 0}) == (1.0, 1.0, 1.0)

    def test_no_positives_predicted(self):
        outcomes = [outcome("a", 0, 1, [0.0]), outcome("b", 0, 1, [0.0])]
        assert precision_recall_f1(outcomes, {"a": 1, "b": 0}) == (0.0, 0.0, 0.0)

    def test_missing_label(self):
        with pytest.raises(MissingLabel):
            precision_recall_f1([outcome("a", 1, 1, [1.0])], {})


class TestErde:
    def test_all_true_negatives(self):
        outcomes = [outcome(f"u{i}", 0, 1, [0.0]) for i in range(4)]
        labels = {f"u{i}": 0 for i in range(4)}
        assert erde(outcomes, labels, 5) == 0.0

    def test_hand_computed_mixed_case(self):
        outcomes = [
            outcome("tp", 1, 3, [0.9] * 3),
            outcome("fp", 1, 1, [0.9]),
            outcome("tn1", 0, 2, [0.1, 0.1]),
            outcome("tn2", 0, 1, [0.1]),
        ]
        labels = {"tp": 1, "fp": 0, "tn1": 0, "tn2": 0}
        cfg = StreamMetricConfig(c_fp_mode="fixed", c_fp_fixed=0.25)
        expected = ((1 - 1 / (1 + math.exp(-2))) + 0.25) / 4
        assert erde(outcomes, labels, 5, cfg) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.0923, abs=5e-5)

    def test_tp_cost_half_at_horizon(self):
        outcomes = [outcome("a", 1, 7, [1.0] * 7)]
        assert erde(outcomes, {"a": 1}, 7) == pytest.approx(0.5, abs=1e-12)

    def test_false_negative_costs_one(self):
        outcomes = [outcome("a", 0, 2, [0.0, 0.0])]
        assert erde(outcomes, {"a": 1}, 5) == 1.0

    def test_prevalence_c_fp(self):
        outcomes = [outcome("a", 1, 1, [1.0]), outcome("b", 0, 1, [0.0])]
        labels = {"a": 0, "b": 1}
        # c_fp = prevalence = 0.5; user a is FP, user b is FN
        assert erde(outcomes, labels, 5) == pytest.approx((0.5 + 1.0) / 2, abs=1e-12)

    def test_monotone_in_delay(self):
        labels = {"a": 1}
        values = [erde([outcome("a", 1, k, [1.0] * k)], labels, 5) for k in range(1, 12)]
        assert values == sorted(values)
        assert all(0 <= v <= 1 for v in values)


class TestLatency:
    def test_table_row_values(self):
        outcomes = (
            [outcome(f"p{i}", 1, 2, [0.0, 1.0]) for i in range(297)]
            + [outcome(f"n{i}", 1, 2, [0.0, 1.0]) for i in range(2446)]
        )
        labels = {f"p{i}": 1 for i in range(297)} | {f"n{i}": 0 for i in range(2446)}
        latency_tp, speed, f_latency = latency_metrics(outcomes, labels)
        assert latency_tp == 2.0
        assert round(speed, 2) == 1.00
        assert speed == pytest.approx(1 - (-1 + 2 / (1 + math.exp(-0.0078))), abs=1e-12)
        _, _, f1 = precision_recall_f1(outcomes, labels)
        assert f_latency == pytest.approx(f1 * speed, abs=1e-12)

    def test_first_writing_has_zero_penalty(self):
        assert latency_penalty(1) == 0.0
        outcomes = [outcome("a", 1, 1, [1.0])]
        _, speed, _ = latency_metrics(outcomes, {"a": 1})
        assert speed == 1.0

    def test_median_of_mixed_delays(self):
        outcomes = [outcome(f"u{k}", 1, k, [1.0] * k) for k in (1, 3, 100)]
        labels = {u.user_id: 1 for u in outcomes}
        latency_tp, speed, _ = latency_metrics(outcomes, labels)
        assert latency_tp == 3.0
        assert speed == pytest.approx(1 - latency_penalty(3), abs=1e-12)

    def test_even_count_median_averages(self):
        outcomes = [outcome(f"u{k}", 1, k, [1.0] * k) for k in (2, 4)]
        labels = {u.user_id: 1 for u in outcomes}
        latency_tp, _, _ = latency_metrics(outcomes, labels)
        assert latency_tp == 3.0

    def test_no_true_positive_reports_null(self):
        outcomes = [outcome("a", 0, 1, [0.0])]
        assert latency_metrics(outcomes, {"a": 1}) == (None, None, None)

    def test_f_latency_never_exceeds_f1(self):
        rng = random.Random(8)
        for _ in range(30):
            n = rng.randint(2, 8)
            outcomes = [outcome(f"u{i}", rng.randint(0, 1), rng.randint(1, 5), [0.5])
                        for i in range(n)]
            labels = {f"u{i}": rng.randint(0, 1) for i in range(n)}
            _, _, f1 = precision_recall_f1(outcomes, labels)
            _, speed, f_lat = latency_metrics(outcomes, labels)
            if f_lat is not None:
                assert f_lat <= f1 + 1e-12
                assert -1 < speed <= 1


class TestRankMetrics:
    def test_ideal_ranking(self):
        scores = {f"p{i}": 1.0 - i * 0.01 for i in range(10)}
        scores |= {f"n{i}": 0.1 - i * 0.001 for i in range(10)}
        labels = {u: 1 if u.startswith("p") else 0 for u in scores}
        got = rank_metrics(scores, labels, cutoffs=(10,))
        assert got["p_at_10"] == 1.0
        assert got["ndcg_at_10"] == 1.0

    def test_no_positives(self):
        scores = {"a": 0.9, "b": 0.1}
        got = rank_metrics(scores, {"a": 0, "b": 0}, cutoffs=(10,))
        assert got["ndcg_at_10"] == 0.0

    def test_five_user_hand_dcg(self):
        scores = {"u1": 0.9, "u2": 0.8, "u3": 0.7, "u4": 0.6, "u5": 0.5}
        labels = {"u1": 1, "u2": 0, "u3": 1, "u4": 0, "u5": 0}
        got = rank_metrics(scores, labels, cutoffs=(10,))
        dcg = 1 / math.log2(2) + 1 / math.log2(4)
        idcg = 1 / math.log2(2) + 1 / math.log2(3)
        assert got["ndcg_at_10"] == pytest.approx(dcg / idcg, abs=1e-12)
        assert got["p_at_10"] == pytest.approx(2 / 5, abs=1e-12)

    def test_affine_invariance(self):
        rng = random.Random(13)
        scores = {f"u{i}": rng.random() for i in range(12)}
        labels = {u: rng.randint(0, 1) for u in scores}
        base = rank_metrics(scores, labels)
        scaled = {u: 3.5 * s + 11.0 for u, s in scores.items()}
        assert rank_metrics(scaled, labels) == base

    def test_tie_broken_by_user_id(self):
        scores = {"b": 0.5, "a": 0.5}
        labels = {"a": 1, "b": 0}
        got = rank_metrics(scores, labels, cutoffs=(1,))
        assert got["p_at_1"] == 1.0  # "a" sorts first on ties

    def test_missing_label(self):
        with pytest.raises(MissingLabel):
            rank_metrics({"a": 0.5}, {})


class TestScoresAt:
    def test_carry_forward_last_score(self):
        outcomes = [outcome("a", 0, 2, [0.1, 0.2]), outcome("b", 1, 1, [0.9])]
        assert scores_at(outcomes, 5) == {"a": 0.2, "b": 0.9}
        assert scores_at(outcomes, 1) == {"a": 0.1, "b": 0.9}


class TestNaiveEquivalence:
    def test_random_small_corpora(self):
        rng = random.Random(99)
        for _ in range(40):
            n_users = rng.randint(1, 6)
            counts = {f"u{i}": rng.randint(1, 4) for i in range(n_users)}
            table = {(u, r): round(rng.random(), 3)
                     for u in counts for r in range(1, counts[u] + 1)}
            labels = {u: rng.randint(0, 1) for u in counts}
            scorer = lambda u, posts: table[(u, len(posts))]
            _, outcomes = run_simulation(corpus_of(counts), scorer, threshold=0.5)

            decisions = {o.user_id: o.final_decision for o in outcomes}
            delays = {o.user_id: o.delay for o in outcomes}

            assert precision_recall_f1(outcomes, labels) == pytest.approx(
                naive_prf(decisions, labels), abs=1e-12)

            prevalence = sum(labels.values()) / len(labels)
            for horizon in (1, 5, 50):
                assert erde(outcomes, labels, horizon) == pytest.approx(
                    naive_erde(decisions, delays, labels, horizon, prevalence), abs=1e-12)

            got = latency_metrics(outcomes, labels)
            want = naive_latency(decisions, delays, labels, p=0.0078)
            assert got == pytest.approx(want, abs=1e-12) if want[0] is not None \
                else got == want

            for checkpoint in (1, 2, 4):
                snapshot = scores_at(outcomes, checkpoint)
                metrics = rank_metrics(snapshot, labels, cutoffs=(10, 100))
                for k in (10, 100):
                    p_ref, ndcg_ref = naive_rank(snapshot, labels, k)
                    assert metrics[f"p_at_{k}"] == pytest.approx(p_ref, abs=1e-12)
                    assert metrics[f"ndcg_at_{k}"] == pytest.approx(ndcg_ref, abs=1e-12)


class TestSerialization:
    def test_emissions_jsonl(self):
        emissions, _ = run_simulation(corpus_of({"a": 1}), lambda u, p: 1.0)
        data = write_emissions_jsonl(emissions)
        assert data == b'{"decision": 1, "round": 1, "score": 1.0, "user": "a"}\n'

    def test_outcomes_round_trip(self):
        _, outcomes = run_simulation(corpus_of({"a": 2, "b": 1}), lambda u, p: 0.2)
        again = outcomes_from_dict(outcomes_to_dict(outcomes))
        assert again == outcomes
