"""Command-line entry point wiring the modules into batch workflows.

Subcommands: ingest, features, aggregate, train, simulate, eval-stream,
eval-rank, eval-pilot, audit-transcripts, stats. Flag precedence is
flags > config file (--config, JSON) > defaults. Exit codes: 0 success,
1 usage error, 2 data error. RISKBENCH_LOG sets log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import attention, corpus, features, model, pilot, reports, stream
from .errors import RiskbenchError

log = logging.getLogger("riskbench")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _ints(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def _floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise _UsageError("--config must contain a JSON object")
    return obj


def _pick(args, config: dict, key: str, default):
    """flags > config file > default (argparse defaults are None)."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _read(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _load_timelines(path: str) -> list[corpus.UserTimeline]:
    return corpus.load_corpus_jsonl(_read(path))


def _attention_config(args, config) -> attention.AttentionConfig:
    indices = _pick(args, config, "indices", None)
    weights = _pick(args, config, "weights", None)
    if isinstance(indices, str):
        indices = _ints(indices)
    if isinstance(weights, str):
        weights = _floats(weights)
    window = _pick(args, config, "window", None)
    return attention.AttentionConfig(
        dim=int(_pick(args, config, "dim", 768)),
        content_indices=tuple(indices) if indices is not None
        else attention.DEFAULT_CONTENT_INDICES,
        content_weights=tuple(weights) if weights is not None
        else attention.DEFAULT_CONTENT_WEIGHTS,
        ramp_low=float(_pick(args, config, "ramp_low", 0.1)),
        ramp_high=float(_pick(args, config, "ramp_high", 1.0)),
        window=int(window) if window is not None else None,
    )


def _lexicon(args, config) -> features.LexiconConfig:
    path = _pick(args, config, "lexicon", None)
    if path:
        return features.load_lexicon(_read(path))
    return features.default_lexicon()


# --- subcommands ---------------------------------------------------------


def cmd_ingest(args, config, seed) -> int:
    out = Path(_pick(args, config, "out", "out"))
    corpus_dir = Path(args.corpus_dir)
    files = sorted(corpus_dir.glob("*.json"))
    if not files:
        raise RiskbenchError(f"no .json user files under {corpus_dir}")
    table = corpus.default_contractions()
    timelines = []
    for path in files:
        try:
            timelines.append(corpus.clean_timeline(corpus.parse_user_file(_read(path)), table))
        except RiskbenchError as exc:
            raise RiskbenchError(f"{path}: {exc}") from exc
    timelines.sort(key=lambda t: t.user_id)
    reports.write_bytes(out / "corpus.jsonl", corpus.write_corpus_jsonl(timelines))

    payload = {
        "users": len(timelines),
        "posts": sum(len(t.posts) for t in timelines),
        "output": "corpus.jsonl",
    }
    labels_path = _pick(args, config, "labels", None)
    if labels_path:
        labels = corpus.load_labels(_read(labels_path))
        n_neg, n_pos = corpus.label_counts(labels)
        payload["label_counts"] = {"negative": n_neg, "positive": n_pos,
                                   "total": n_neg + n_pos}
        missing = sorted(set(t.user_id for t in timelines) - set(labels))
        payload["users_without_label"] = len(missing)
    reports.write_json(out / "ingest_report.json",
                       reports.make_report("ingest", payload,
                                           {"corpus_dir": str(corpus_dir)}, seed))
    return 0


def cmd_features(args, config, seed) -> int:
    out = Path(_pick(args, config, "out", "out"))
    timelines = _load_timelines(args.corpus)
    max_features = int(_pick(args, config, "max_features", 1000))
    lexicon = _lexicon(args, config)
    late_night = frozenset(_ints(str(_pick(args, config, "late_night_hours", "0,1,2,3,4,5"))))

    docs = [corpus.post_text(p) for t in timelines for p in t.posts]
    tfidf = features.fit_tfidf(docs, max_features)
    header = features.feature_header(tfidf)

    lines = []
    for t in timelines:
        row = features.assemble_row(t, tfidf, lexicon, late_night)
        lines.append(json.dumps({"user_id": t.user_id, "features": [float(v) for v in row]},
                                sort_keys=True))
    reports.write_bytes(out / "features.jsonl", ("\n".join(lines) + "\n").encode("utf-8"))
    reports.write_json(out / "features_header.json", {
        "columns": header,
        "pooling": {
            "tfidf": "transform of all post texts concatenated",
            "sentiment": "mean over posts",
            "liwc": "sum over posts",
            "temporal": "last hours_since_first, mean gap, late-night count, post count",
        },
        "tfidf_model": tfidf.to_dict(),
    })
    cfg = {"max_features": max_features, "late_night_hours": sorted(late_night)}
    reports.write_json(out / "features_report.json",
                       reports.make_report("features",
                                           {"users": len(timelines), "columns": len(header)},
                                           cfg, seed))
    return 0


def cmd_aggregate(args, config, seed) -> int:
    out = Path(_pick(args, config, "out", "out"))
    timelines = _load_timelines(args.corpus)
    emb = attention.read_embeddings(_read(args.embeddings))
    cfg = _attention_config(args, config)

    vec_lines, alpha_lines = [], []
    for t in timelines:
        missing = [p.post_id for p in t.posts if p.post_id not in emb.records]
        if missing:
            raise RiskbenchError(
                f"user {t.user_id!r}: no embeddings for posts {missing[:3]}"
                + ("..." if len(missing) > 3 else "")
            )
        mat = emb.matrix([p.post_id for p in t.posts])
        user_vec, alpha = attention.aggregate_user(mat, cfg)
        vec_lines.append(json.dumps(
            {"user_id": t.user_id, "features": [float(v) for v in user_vec]}, sort_keys=True))
        alpha_lines.append(json.dumps(
            {"user_id": t.user_id, "alpha": [float(a) for a in alpha]}, sort_keys=True))
    reports.write_bytes(out / "user_vectors.jsonl", ("\n".join(vec_lines) + "\n").encode("utf-8"))
    reports.write_bytes(out / "alphas.jsonl", ("\n".join(alpha_lines) + "\n").encode("utf-8"))
    reports.write_json(out / "aggregate_report.json",
                       reports.make_report("aggregate", {"users": len(timelines)},
                                           {"attention": cfg.__dict__ | {
                                               "content_indices": list(cfg.content_indices),
                                               "content_weights": list(cfg.content_weights)}},
                                           seed))
    return 0


def _load_feature_rows(path: str) -> tuple[list[str], np.ndarray]:
    users, rows = [], []
    for lineno, line in enumerate(_read(path).decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            users.append(obj["user_id"])
            rows.append(obj["features"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise RiskbenchError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise RiskbenchError(f"{path}: no feature rows")
    return users, np.asarray(rows, dtype=np.float64)


def cmd_train(args, config, seed) -> int:
    out = Path(_pick(args, config, "out", "out"))
    users, X = _load_feature_rows(args.features)
    labels = corpus.load_labels(_read(args.labels))
    missing = [u for u in users if u not in labels]
    if missing:
        raise RiskbenchError(f"{args.labels}: users without labels: {missing[:5]}")
    y = np.array([labels[u] for u in users])

    mode = str(_pick(args, config, "class_weight", "balanced"))
    explicit = None
    if mode not in ("balanced", "none"):
        w0, w1 = _floats(mode)
        mode, explicit = "explicit", (w0, w1)
    cfg = model.TrainConfig(
        learning_rate=float(_pick(args, config, "lr", 0.01)),
        epochs=int(_pick(args, config, "epochs", 500)),
        l2_lambda=float(_pick(args, config, "l2", 1e-4)),
        class_weight_mode=mode,
        explicit_weights=explicit,
        seed=seed if seed is not None else 0,
        validation_fraction=float(_pick(args, config, "validation_fraction", 0.0)),
        patience=int(_pick(args, config, "patience", 0)),
    )
    trained = model.train_sgd(X, y, cfg)
    reports.write_bytes(out / "model.json", model.save_model(trained, cfg))

    scores = [model.predict_proba(trained, x) for x in X]
    payload = {
        "users": len(users),
        "train_auc": model.auc_score(scores, y),
        "class_weights": list(model.class_weights(y)) if mode == "balanced" else None,
    }
    reports.write_json(out / "train_report.json",
                       reports.make_report("train", payload, cfg.to_dict(), seed))
    return 0


def cmd_simulate(args, config, seed) -> int:
    out = Path(_pick(args, config, "out", "out"))
    timelines = _load_timelines(args.corpus)
    threshold = float(_pick(args, config, "threshold", 0.5))
    mode = str(_pick(args, config, "scorer", "attention"))

    if mode == "attention":
        if not args.model or not args.embeddings:
            raise _UsageError("simulate with the attention scorer needs --model and --embeddings")
        linear = model.load_model(_read(args.model))
        emb = attention.read_embeddings(_read(args.embeddings))
        cfg = _attention_config(args, config)

        def scorer(user_id, posts):
            try:
                mat = emb.matrix([p.post_id for p in posts])
            except KeyError as exc:
                raise RiskbenchError(f"user {user_id!r}: missing embedding {exc}") from exc
            vec, _ = attention.aggregate_user(mat, cfg)
            return model.predict_proba(linear, vec)

        scorer_cfg = {"scorer": "attention", "threshold": threshold,
                      "model": args.model, "embeddings": args.embeddings}
    elif mode == "constant":
        score = float(_pick(args, config, "constant_score", 1.0))
        fire_round = int(_pick(args, config, "fire_round", 1))

        def scorer(user_id, posts):
            return score if len(posts) >= fire_round else 0.0

        scorer_cfg = {"scorer": "constant", "threshold": threshold,
                      "constant_score": score, "fire_round": fire_round}
    else:
        raise _UsageError(f"unknown scorer {mode!r}")

    emissions, outcomes = stream.run_simulation(timelines, scorer, threshold)
    reports.write_bytes(out / "emissions.jsonl", stream.write_emissions_jsonl(emissions))
    reports.write_json(out / "outcomes.json", stream.outcomes_to_dict(outcomes))
    reports.write_json(out / "simulate_report.json",
                       reports.make_report("simulate",
                                           {"users": len(outcomes),
                                            "emissions": len(emissions),
                                            "positives": sum(o.final_decision
                                                             for o in outcomes)},
                                           scorer_cfg, seed))
    return 0


def _metric_config(args, config) -> stream.StreamMetricConfig:
    c_fp = str(_pick(args, config, "c_fp", "prevalence"))
    if c_fp == "prevalence":
        mode, fixed = "prevalence", None
    else:
        mode, fixed = "fixed", float(c_fp)
    horizons = _pick(args, config, "horizons", None)
    if isinstance(horizons, str):
        horizons = _ints(horizons)
    checkpoints = _pick(args, config, "checkpoints", None)
    if isinstance(checkpoints, str):
        checkpoints = _ints(checkpoints)
    return stream.StreamMetricConfig(
        erde_horizons=tuple(horizons) if horizons else (5, 50),
        c_fp_mode=mode,
        c_fp_fixed=fixed,
        latency_p=float(_pick(args, config, "latency_p", stream.LATENCY_P)),
        ranking_checkpoints=tuple(checkpoints) if checkpoints else (1, 100),
    )


def _load_outcomes(path: str) -> list[stream.StreamOutcome]:
    try:
        payload = json.loads(_read(path).decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise RiskbenchError(f"{path}: invalid JSON: {exc}") from exc
    return stream.outcomes_from_dict(payload)


def cmd_eval_stream(args, config, seed) -> int:
    out = Path(_pick(args, config, "out", "out"))
    outcomes = _load_outcomes(args.outcomes)
    labels = corpus.load_labels(_read(args.labels))
    cfg = _metric_config(args, config)
    p, r, f1 = stream.precision_recall_f1(outcomes, labels)
    latency_tp, speed, f_latency = stream.latency_metrics(outcomes, labels, cfg)
    metrics = {
        "precision": p, "recall": r, "f1": f1,
        "latency_tp": latency_tp, "speed": speed, "f_latency": f_latency,
    }
    for o in cfg.erde_horizons:
        metrics[f"erde_{o}"] = stream.erde(outcomes, labels, o, cfg)
    n_neg, n_pos = corpus.label_counts(labels)
    payload = {"metrics": metrics,
               "label_counts": {"negative": n_neg, "positive": n_pos, "total": n_neg + n_pos}}
    reports.write_json(out / "stream_report.json",
                       reports.make_report("eval-stream", payload, cfg.to_dict(), seed))
    return 0


def cmd_eval_rank(args, config, seed) -> int:
    out = Path(_pick(args, config, "out", "out"))
    outcomes = _load_outcomes(args.outcomes)
    labels = corpus.load_labels(_read(args.labels))
    cfg = _metric_config(args, config)
    cutoffs = _pick(args, config, "cutoffs", None)
    cutoffs = tuple(_ints(cutoffs)) if isinstance(cutoffs, str) else (10, 100)
    by_checkpoint = {}
    for n in cfg.ranking_checkpoints:
        snapshot = stream.scores_at(outcomes, n)
        by_checkpoint[str(n)] = stream.rank_metrics(snapshot, labels, cutoffs)
    reports.write_json(out / "rank_report.json",
                       reports.make_report("eval-rank",
                                           {"metrics": by_checkpoint,
                                            "cutoffs": list(cutoffs)},
                                           cfg.to_dict(), seed))
    return 0


def cmd_eval_pilot(args, config, seed) -> int:
    out = Path(_pick(args, config, "out", "out"))
    gold = pilot.load_gold(_read(args.gold))
    try:
        rows = json.loads(_read(args.submission).decode("utf-8"))
        if not isinstance(rows, list):
            raise RiskbenchError(f"{args.submission}: expected a JSON array of persona rows")
        if len({r["persona"] for r in rows}) != len(rows):
            raise RiskbenchError(f"{args.submission}: duplicate persona rows")
        categories = {r["persona"]: r["category"] for r in rows}
        bdis = {r["persona"]: r["bdi"] for r in rows}
        symptoms = {r["persona"]: r.get("symptoms", []) for r in rows}
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise RiskbenchError(f"{args.submission}: {exc}") from exc
    per_persona, ashr_mean = pilot.ashr(symptoms, gold)
    payload = {
        "metrics": {
            "dchr": pilot.dchr(categories, gold),
            "adodl": pilot.adodl(bdis, gold),
            "ashr": ashr_mean,
        },
        "ashr_per_persona": per_persona,
        "personas": len(gold),
    }
    reports.write_json(out / "pilot_report.json",
                       reports.make_report("eval-pilot", payload,
                                           {"gold": args.gold, "submission": args.submission},
                                           seed))
    return 0


def _load_transcripts(paths: list[str], skip_invalid: bool):
    transcripts, failures = [], []
    for raw_path in paths:
        path = Path(raw_path)
        files = sorted(path.glob("*.json")) if path.is_dir() else [path]
        for f in files:
            try:
                transcripts.append(pilot.parse_transcript(_read(f)))
            except RiskbenchError as exc:
                if not skip_invalid:
                    raise RiskbenchError(f"{f}: {exc}") from exc
                failures.append({"file": str(f), "error": str(exc)})
    return transcripts, failures


def cmd_audit_transcripts(args, config, seed) -> int:
    out = Path(_pick(args, config, "out", "out"))
    skip_invalid = bool(_pick(args, config, "skip_invalid", False))
    transcripts, failures = _load_transcripts(args.transcripts, skip_invalid)
    if not transcripts:
        raise RiskbenchError("no valid transcripts to audit")
    payload = {
        "transcripts": len(transcripts),
        "invalid": failures,
        "summation": pilot.summation_audit(transcripts),
        "turn_confidence": pilot.turn_confidence_stats(transcripts),
    }
    models = {t.model_name for t in transcripts}
    if len(models) >= 2:
        turn = _pick(args, config, "agreement_turn", None)
        payload["agreement"] = pilot.agreement_std(
            pilot.extract_item_scores(transcripts),
            turn=int(turn) if turn is not None else None,
        )
    rule = str(_pick(args, config, "final_rule", "finalized"))
    submission_out = _pick(args, config, "submission_out", None)
    if submission_out:
        model_filter = _pick(args, config, "model", None)
        selected = [t for t in transcripts
                    if model_filter is None or t.model_name == model_filter]
        if not selected:
            raise RiskbenchError(f"no transcripts for model {model_filter!r}")
        reports.write_json(Path(submission_out), pilot.build_submission(selected, rule))
    reports.write_json(out / "audit_report.json",
                       reports.make_report("audit-transcripts", payload,
                                           {"skip_invalid": skip_invalid, "final_rule": rule},
                                           seed))
    return 0


def cmd_stats(args, config, seed) -> int:
    out = Path(_pick(args, config, "out", "out"))
    payload: dict = {}
    cfg: dict = {}

    if args.corpus:
        timelines = _load_timelines(args.corpus)
        lexicon = _lexicon(args, config)
        late_night = frozenset(
            _ints(str(_pick(args, config, "late_night_hours", "0,1,2,3,4,5"))))
        labels = corpus.load_labels(_read(args.labels)) if args.labels else None

        per_user: dict[str, dict[str, float]] = {}
        for t in timelines:
            temporal = features.temporal_features(t, late_night)
            first_person = sum(
                features.liwc_counts(corpus.post_text(p), lexicon)["first_person_count"]
                for p in t.posts
            )
            per_user[t.user_id] = {
                "post_frequency": float(len(t.posts)),
                "late_night_posts": float(sum(1 for f in temporal if f.is_late_night)),
                "first_person_count": float(first_person),
            }

        def groups():
            if labels is None:
                yield "all", list(per_user)
            else:
                yield "neg", [u for u in per_user if labels.get(u) == 0]
                yield "pos", [u for u in per_user if labels.get(u) == 1]

        box = {}
        for name, users in groups():
            if not users:
                continue
            box[name] = {
                metric: _box_dict(features.box_stats([per_user[u][metric] for u in users]))
                for metric in ("post_frequency", "late_night_posts", "first_person_count")
            }
        payload["box_stats"] = box
        cfg["late_night_hours"] = sorted(late_night)

    if args.transcripts:
        transcripts, _ = _load_transcripts(args.transcripts, skip_invalid=False)
        payload["token_stats"] = {
            field: {m: pilot.token_stats(texts)
                    for m, texts in sorted(pilot.collect_texts(transcripts, field).items())}
            for field in ("input", "output", "reason")
        }
        by_model: dict[str, list[pilot.Transcript]] = {}
        for t in transcripts:
            by_model.setdefault(t.model_name, []).append(t)
        payload["trajectories"] = {m: pilot.trajectories(ts)
                                   for m, ts in sorted(by_model.items())}
        payload["turn_confidence"] = pilot.turn_confidence_stats(transcripts)

    if not payload:
        raise _UsageError("stats needs --corpus and/or --transcripts")
    reports.write_json(out / "stats_report.json",
                       reports.make_report("stats", payload, cfg, seed))
    return 0


def _box_dict(stats: features.BoxStats) -> dict:
    return {
        "median": stats.median, "q1": stats.q1, "q3": stats.q3,
        "whisker_low": stats.whisker_low, "whisker_high": stats.whisker_high,
        "outliers": list(stats.outliers),
    }


# --- parser and dispatch ----------------------------------------------------


def build_parser() -> _Parser:
    # Global flags live on a parent parser with SUPPRESS defaults so they can
    # be given before or after the subcommand without clobbering each other.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="JSON config file (flags take precedence)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed recorded in every report")
    common.add_argument("--out", default=argparse.SUPPRESS,
                        help="output directory (default: out)")

    parser = _Parser(prog="riskbench", description=__doc__, parents=[common])
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)

    class _Sub:
        def add_parser(self, name, **kwargs):
            return subparsers.add_parser(name, parents=[common], **kwargs)

    sub = _Sub()

    p = sub.add_parser("ingest", help="raw user files to canonical cleaned corpus")
    p.add_argument("--corpus-dir", required=True, dest="corpus_dir")
    p.add_argument("--labels")

    p = sub.add_parser("features", help="assemble per-user feature rows")
    p.add_argument("--corpus", required=True)
    p.add_argument("--max-features", type=int, dest="max_features")
    p.add_argument("--lexicon")
    p.add_argument("--late-night-hours", dest="late_night_hours")

    p = sub.add_parser("aggregate", help="attention-pool post embeddings per user")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    _add_attention_flags(p)

    p = sub.add_parser("train", help="train the SGD logistic model")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--l2", type=float)
    p.add_argument("--class-weight", dest="class_weight",
                   help="balanced | none | W0,W1")
    p.add_argument("--validation-fraction", type=float, dest="validation_fraction")
    p.add_argument("--patience", type=int)

    p = sub.add_parser("simulate", help="run the round-based streaming protocol")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model")
    p.add_argument("--embeddings")
    p.add_argument("--scorer", choices=["attention", "constant"])
    p.add_argument("--threshold", type=float)
    p.add_argument("--constant-score", type=float, dest="constant_score")
    p.add_argument("--fire-round", type=int, dest="fire_round")
    _add_attention_flags(p)

    p = sub.add_parser("eval-stream", help="decision-based streaming metrics")
    p.add_argument("--outcomes", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--horizons")
    p.add_argument("--c-fp", dest="c_fp", help="prevalence | fixed value")
    p.add_argument("--latency-p", type=float, dest="latency_p")

    p = sub.add_parser("eval-rank", help="ranking metrics at writing checkpoints")
    p.add_argument("--outcomes", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--checkpoints")
    p.add_argument("--cutoffs")

    p = sub.add_parser("eval-pilot", help="DCHR / ADODL / ASHR against a gold file")
    p.add_argument("--gold", required=True)
    p.add_argument("--submission", required=True)

    p = sub.add_parser("audit-transcripts", help="validate transcripts and audit statistics")
    p.add_argument("--transcripts", required=True, nargs="+")
    p.add_argument("--skip-invalid", action="store_true", default=None, dest="skip_invalid")
    p.add_argument("--agreement-turn", type=int, dest="agreement_turn")
    p.add_argument("--final-rule", choices=["finalized", "last"], dest="final_rule")
    p.add_argument("--submission-out", dest="submission_out")
    p.add_argument("--model", help="restrict --submission-out to one model's transcripts")

    p = sub.add_parser("stats", help="box stats, token stats, trajectories")
    p.add_argument("--corpus")
    p.add_argument("--labels")
    p.add_argument("--lexicon")
    p.add_argument("--late-night-hours", dest="late_night_hours")
    p.add_argument("--transcripts", nargs="+")

    return parser


def _add_attention_flags(p) -> None:
    p.add_argument("--dim", type=int)
    p.add_argument("--indices", help="comma-separated content indices")
    p.add_argument("--weights", help="comma-separated content weights")
    p.add_argument("--ramp-low", type=float, dest="ramp_low")
    p.add_argument("--ramp-high", type=float, dest="ramp_high")
    p.add_argument("--window", type=int)


_DISPATCH = {
    "ingest": cmd_ingest,
    "features": cmd_features,
    "aggregate": cmd_aggregate,
    "train": cmd_train,
    "simulate": cmd_simulate,
    "eval-stream": cmd_eval_stream,
    "eval-rank": cmd_eval_rank,
    "eval-pilot": cmd_eval_pilot,
    "audit-transcripts": cmd_audit_transcripts,
    "stats": cmd_stats,
}


def run_command(argv: list[str]) -> int:
    level = os.environ.get("RISKBENCH_LOG", "WARNING").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise _UsageError("a subcommand is required")
        config = _load_config(getattr(args, "config", None))
        seed = getattr(args, "seed", None)
        if seed is None:
            seed = config.get("seed")
        return _DISPATCH[args.command](args, config, seed)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (RiskbenchError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
