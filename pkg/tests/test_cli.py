from __future__ import annotations

import json

import numpy as np
import pytest

from riskbench import attention, corpus, model, stream
from riskbench.cli import run_command

from conftest import make_item_scores, make_transcript_dict, make_turn


def write(path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, bytes):
        path.write_bytes(data)
    else:
        path.write_text(data, encoding="utf-8")


@pytest.fixture
def workspace(tmp_path):
    """Raw corpus dir, labels, embeddings, transcripts, gold, submission."""
    raw = tmp_path / "raw"
    users = {
        "u1": (1, ["I don't feel great", "tired again https://x.co"]),
        "u2": (0, ["all good here", "sunny day"]),
        "u3": (1, ["can't sleep at 3am", "so sad lately", "empty inside"]),
        "u4": (0, ["made plans with friends"]),
    }
    for user, (_, texts) in users.items():
        posts = [
            {"post_id": f"{user}-p{i}", "timestamp": f"2024-03-0{i + 1}T0{3 + i}:00:00Z",
             "title": None, "text": text, "is_subject": True}
            for i, text in enumerate(texts)
        ]
        write(raw / f"{user}.json", json.dumps({"user_id": user, "posts": posts}))
    write(tmp_path / "labels.tsv",
          "".join(f"{u}\t{label}\n" for u, (label, _) in users.items()))

    # embeddings for every post, dim 8
    rng = np.random.default_rng(0)
    matrix = attention.EmbeddingMatrix(dim=8)
    for user, (_, texts) in users.items():
        for i in range(len(texts)):
            matrix.add(f"{user}-p{i}", rng.normal(size=8).astype(np.float32))
    write(tmp_path / "embeddings.erkv1", attention.write_embeddings(matrix))

    tdir = tmp_path / "transcripts"
    for m, persona, totals in [("model-a", "p1", (10, 22)), ("model-a", "p2", (4, 4)),
                               ("model-b", "p1", (12, 20)), ("model-b", "p2", (5, 6))]:
        turns = [
            make_turn(1, state="Gathering", total=totals[0],
                      item_scores=make_item_scores({0: min(totals[0], 3)})),
            make_turn(2, state="Finalized", total=totals[1], classification="Moderate",
                      key_symptoms=["hopelesness", "mild fatigue"],
                      item_scores=make_item_scores({0: 3, 1: 3})),
        ]
        write(tdir / f"{m}-{persona}.json",
              json.dumps(make_transcript_dict(model=m, persona=persona, turns=turns)))

    write(tmp_path / "gold.json", json.dumps([
        {"persona": "p1", "bdi": 20,
         "symptoms": ["Pessimism", "Tiredness or fatigue", "Sadness", "Crying"]},
        {"persona": "p2", "bdi": 5,
         "symptoms": ["Sadness", "Agitation", "Crying", "Worthlessness"]},
    ]))
    write(tmp_path / "submission.json", json.dumps([
        {"persona": "p1", "category": "moderate", "bdi": 22,
         "symptoms": ["Pessimism", "Tiredness or fatigue"]},
        {"persona": "p2", "category": "minimal", "bdi": 6, "symptoms": ["Sadness"]},
    ]))
    return tmp_path


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


class TestUsage:
    def test_unknown_subcommand_exits_one(self, capsys):
        assert run_command(["frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_no_subcommand_exits_one(self):
        assert run_command([]) == 1

    def test_help_exits_zero(self, capsys):
        assert run_command(["--help"]) == 0

    def test_missing_file_is_data_error(self, tmp_path, capsys):
        code = run_command(["eval-pilot", "--gold", str(tmp_path / "nope.json"),
                            "--submission", str(tmp_path / "nalso-nope.json"),
                            "--out", str(tmp_path)])
        assert code == 2
        assert "data error" in capsys.readouterr().err


class TestPipeline:
    def test_ingest(self, workspace):
        out = workspace / "out"
        code = run_command(["--out", str(out), "ingest",
                            "--corpus-dir", str(workspace / "raw"),
                            "--labels", str(workspace / "labels.tsv")])
        assert code == 0
        lines = (out / "corpus.jsonl").read_text().splitlines()
        assert len(lines) == 8
        first = json.loads(lines[0])
        assert first["text"] == "I do not feel great"
        report = read_json(out / "ingest_report.json")
        assert report["label_counts"] == {"negative": 2, "positive": 2, "total": 4}

    def test_full_feature_training_pipeline(self, workspace):
        out = workspace / "out"
        run_command(["--out", str(out), "ingest", "--corpus-dir", str(workspace / "raw")])
        corpus_file = out / "corpus.jsonl"
        assert run_command(["--out", str(out), "features", "--corpus", str(corpus_file),
                            "--max-features", "32"]) == 0
        header = read_json(out / "features_header.json")
        rows = [json.loads(line) for line in (out / "features.jsonl").read_text().splitlines()]
        assert all(len(r["features"]) == len(header["columns"]) for r in rows)

        assert run_command(["--seed", "7", "--out", str(out), "train",
                            "--features", str(out / "features.jsonl"),
                            "--labels", str(workspace / "labels.tsv"),
                            "--epochs", "40"]) == 0
        trained = model.load_model((out / "model.json").read_bytes())
        assert trained.dim == len(header["columns"])
        report = read_json(out / "train_report.json")
        assert report["seed"] == 7
        assert 0.0 <= report["train_auc"] <= 1.0
        assert report["class_weights"] == [1.0, 1.0]

    def test_aggregate_train_simulate_attention(self, workspace):
        out = workspace / "out"
        run_command(["--out", str(out), "ingest", "--corpus-dir", str(workspace / "raw")])
        attention_flags = ["--dim", "8", "--indices", "1,3", "--weights", "0.9,0.7"]
        assert run_command(["--out", str(out), "aggregate",
                            "--corpus", str(out / "corpus.jsonl"),
                            "--embeddings", str(workspace / "embeddings.erkv1"),
                            *attention_flags]) == 0
        vec_rows = [json.loads(line)
                    for line in (out / "user_vectors.jsonl").read_text().splitlines()]
        assert len(vec_rows) == 4 and len(vec_rows[0]["features"]) == 8
        alphas = [json.loads(line)
                  for line in (out / "alphas.jsonl").read_text().splitlines()]
        assert all(abs(sum(a["alpha"]) - 1) < 1e-9 for a in alphas)

        assert run_command(["--seed", "3", "--out", str(out), "train",
                            "--features", str(out / "user_vectors.jsonl"),
                            "--labels", str(workspace / "labels.tsv"),
                            "--epochs", "30"]) == 0
        assert run_command(["--out", str(out), "simulate",
                            "--corpus", str(out / "corpus.jsonl"),
                            "--model", str(out / "model.json"),
                            "--embeddings", str(workspace / "embeddings.erkv1"),
                            "--scorer", "attention", "--threshold", "0.5",
                            *attention_flags]) == 0

        outcomes = stream.outcomes_from_dict(read_json(out / "outcomes.json"))
        # cross-check one emitted score against the module composition
        emissions = [json.loads(line)
                     for line in (out / "emissions.jsonl").read_text().splitlines()]
        linear = model.load_model((out / "model.json").read_bytes())
        emb = attention.read_embeddings((workspace / "embeddings.erkv1").read_bytes())
        cfg = attention.AttentionConfig(dim=8, content_indices=(1, 3),
                                        content_weights=(0.9, 0.7))
        first = emissions[0]
        timelines = corpus.load_corpus_jsonl((out / "corpus.jsonl").read_bytes())
        tl = next(t for t in timelines if t.user_id == first["user"])
        mat = emb.matrix([p.post_id for p in tl.posts[:first["round"]]])
        vec, _ = attention.aggregate_user(mat, cfg)
        assert first["score"] == pytest.approx(model.predict_proba(linear, vec), abs=1e-12)
        assert {o.user_id for o in outcomes} == {"u1", "u2", "u3", "u4"}

    def test_simulate_constant_and_eval(self, workspace):
        out = workspace / "out"
        run_command(["--out", str(out), "ingest", "--corpus-dir", str(workspace / "raw")])
        assert run_command(["--out", str(out), "simulate",
                            "--corpus", str(out / "corpus.jsonl"),
                            "--scorer", "constant", "--constant-score", "0.9",
                            "--fire-round", "2"]) == 0
        assert run_command(["--out", str(out), "eval-stream",
                            "--outcomes", str(out / "outcomes.json"),
                            "--labels", str(workspace / "labels.tsv"),
                            "--horizons", "5,50"]) == 0
        report = read_json(out / "stream_report.json")

        outcomes = stream.outcomes_from_dict(read_json(out / "outcomes.json"))
        labels = corpus.load_labels((workspace / "labels.tsv").read_bytes())
        p, r, f1 = stream.precision_recall_f1(outcomes, labels)
        assert report["metrics"]["precision"] == p
        assert report["metrics"]["recall"] == r
        assert report["metrics"]["f1"] == f1
        assert report["metrics"]["erde_5"] == stream.erde(outcomes, labels, 5)
        # u4 has a single writing, so a round-2 scorer never fires for it
        u4 = next(o for o in outcomes if o.user_id == "u4")
        assert u4.final_decision == 0 and u4.delay == 1

        assert run_command(["--out", str(out), "eval-rank",
                            "--outcomes", str(out / "outcomes.json"),
                            "--labels", str(workspace / "labels.tsv"),
                            "--checkpoints", "1,2", "--cutoffs", "10"]) == 0
        rank_report = read_json(out / "rank_report.json")
        snapshot = stream.scores_at(outcomes, 1)
        assert rank_report["metrics"]["1"] == stream.rank_metrics(snapshot, labels, (10,))


class TestEvalPilot:
    def test_report_keys_and_values(self, workspace):
        out = workspace / "out"
        code = run_command(["--out", str(out), "eval-pilot",
                            "--gold", str(workspace / "gold.json"),
                            "--submission", str(workspace / "submission.json")])
        assert code == 0
        report = read_json(out / "pilot_report.json")
        metrics = report["metrics"]
        assert set(metrics) == {"dchr", "adodl", "ashr"}
        # p1 category correct, p2 correct -> DCHR 1.0
        assert metrics["dchr"] == 1.0
        assert metrics["adodl"] == pytest.approx(((63 - 2) / 63 + (63 - 1) / 63) / 2)
        assert metrics["ashr"] == pytest.approx((0.5 + 0.25) / 2)

    def test_reports_byte_identical_apart_from_timestamp(self, workspace):
        out1, out2 = workspace / "o1", workspace / "o2"
        for out in (out1, out2):
            run_command(["--seed", "5", "--out", str(out), "eval-pilot",
                         "--gold", str(workspace / "gold.json"),
                         "--submission", str(workspace / "submission.json")])
        r1 = read_json(out1 / "pilot_report.json")
        r2 = read_json(out2 / "pilot_report.json")
        r1.pop("generated_at"), r2.pop("generated_at")
        assert r1 == r2


class TestAuditAndStats:
    def test_audit_transcripts(self, workspace):
        out = workspace / "out"
        code = run_command(["--out", str(out), "audit-transcripts",
                            "--transcripts", str(workspace / "transcripts"),
                            "--submission-out", str(out / "submission.json"),
                            "--model", "model-a"])
        assert code == 0
        report = read_json(out / "audit_report.json")
        assert report["transcripts"] == 4
        assert set(report["summation"]) == {"model-a", "model-b"}
        assert "agreement" in report
        assert report["agreement"]["fraction_below_threshold"] >= 0.0
        rows = read_json(out / "submission.json")
        assert {r["persona"] for r in rows} == {"p1", "p2"}

    def test_submission_over_multiple_models_is_data_error(self, workspace, capsys):
        out = workspace / "out"
        code = run_command(["--out", str(out), "audit-transcripts",
                            "--transcripts", str(workspace / "transcripts"),
                            "--submission-out", str(out / "submission.json")])
        assert code == 2
        assert "single run" in capsys.readouterr().err

    def test_eval_pilot_rejects_duplicate_personas(self, workspace, capsys):
        rows = read_json(workspace / "submission.json")
        dup = workspace / "dup.json"
        dup.write_text(json.dumps(rows + rows))
        code = run_command(["--out", str(workspace / "out"), "eval-pilot",
                            "--gold", str(workspace / "gold.json"),
                            "--submission", str(dup)])
        assert code == 2
        assert "duplicate persona" in capsys.readouterr().err

    def test_invalid_transcript_is_data_error(self, workspace, capsys):
        bad = workspace / "transcripts" / "bad.json"
        write(bad, json.dumps({"model": "m", "persona": "p", "turns": []}))
        code = run_command(["--out", str(workspace / "out"), "audit-transcripts",
                            "--transcripts", str(workspace / "transcripts")])
        assert code == 2
        err = capsys.readouterr().err
        assert "bad.json" in err and "turns" in err

    def test_skip_invalid_collects_failures(self, workspace):
        bad = workspace / "transcripts" / "bad.json"
        write(bad, json.dumps({"model": "m", "persona": "p", "turns": []}))
        out = workspace / "out"
        code = run_command(["--out", str(out), "audit-transcripts",
                            "--transcripts", str(workspace / "transcripts"),
                            "--skip-invalid"])
        assert code == 0
        report = read_json(out / "audit_report.json")
        assert len(report["invalid"]) == 1

    def test_stats_corpus_and_transcripts(self, workspace):
        out = workspace / "out"
        run_command(["--out", str(out), "ingest", "--corpus-dir", str(workspace / "raw")])
        code = run_command(["--out", str(out), "stats",
                            "--corpus", str(out / "corpus.jsonl"),
                            "--labels", str(workspace / "labels.tsv"),
                            "--transcripts", str(workspace / "transcripts")])
        assert code == 0
        report = read_json(out / "stats_report.json")
        assert set(report["box_stats"]) == {"neg", "pos"}
        assert "post_frequency" in report["box_stats"]["pos"]
        assert set(report["token_stats"]) == {"input", "output", "reason"}
        assert report["token_stats"]["output"]["model-a"]["n"] == 4
        assert "model-a" in report["trajectories"]

    def test_config_file_provides_defaults(self, workspace):
        out = workspace / "out"
        run_command(["--out", str(out), "ingest", "--corpus-dir", str(workspace / "raw")])
        config = workspace / "config.json"
        write(config, json.dumps({"max_features": 5}))
        assert run_command(["--config", str(config), "--out", str(out), "features",
                            "--corpus", str(out / "corpus.jsonl")]) == 0
        report = read_json(out / "features_report.json")
        assert report["config"]["max_features"] == 5

        # an explicit flag beats the config file
        assert run_command(["--config", str(config), "--out", str(out), "features",
                            "--corpus", str(out / "corpus.jsonl"),
                            "--max-features", "3"]) == 0
        report = read_json(out / "features_report.json")
        assert report["config"]["max_features"] == 3
