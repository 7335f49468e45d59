"""Conversational-assessment analytics: transcript validation, symptom
normalization, DCHR / ADODL / ASHR, and the audit statistics.

Run: python demos/06_pilot_metrics.py
"""

import json

from riskbench.pilot import (
    BDI_ITEM_KEYS,
    adodl,
    agreement_std,
    ashr,
    build_submission,
    category_of,
    dchr,
    encode_classification,
    extract_item_scores,
    load_gold,
    normalize_symptom,
    ols_fit,
    parse_transcript,
    summation_audit,
    token_stats,
    trajectories,
)


def turn(n, state, total, classification, confidence, symptoms, hot_items):
    items = {
        key: {"score": hot_items.get(i, 0), "reason": "inferred from conversation"}
        for i, key in enumerate(BDI_ITEM_KEYS)
    }
    return {
        "input_message": f"persona message {n}",
        "output_message": f"agent message {n} with a gentle follow-up question",
        "next_step_reasoning": f"explore domain {n}",
        "evaluation": {
            "assessment_turn": n,
            "assessment_state": state,
            "assessment_complete": state == "Finalized",
            "total_bdi_score": total,
            "classification_suggestion": classification,
            "confidence": confidence,
            "key_symptoms": symptoms,
            "bdi_scores": items,
        },
    }


def transcript(model, persona, course):
    return json.dumps({"model": model, "persona": persona, "turns": course}).encode()


course_a = [
    turn(1, "Initializing", 0, "Uncertain", 0.2, [], {}),
    turn(2, "Gathering", 8, "Mild", 0.5, ["fatigue"], {19: 2, 15: 2, 0: 2, 16: 2}),
    turn(3, "Finalized", 21, "Moderate", 0.9,
         ["hopelesness", "mild fatigue", "sleep disturbance", "appetite drop"],
         {1: 3, 19: 3, 15: 3, 17: 3, 0: 3, 16: 3, 3: 3}),
]
course_b = [
    turn(1, "Initializing", 0, "Uncertain", 0.3, [], {}),
    turn(2, "Gathering", 10, "Mild", 0.6, ["tiredness"], {19: 3, 0: 3, 3: 3, 16: 1}),
    turn(3, "Finalized", 17, "Mild", 0.8,
         ["feeling worthless", "tiredness", "poor sleep", "loss of appetite"],
         {13: 3, 19: 3, 15: 2, 0: 3, 16: 3, 3: 3}),
]

transcripts = [
    parse_transcript(transcript("model-a", "persona-1", course_a)),
    parse_transcript(transcript("model-b", "persona-1", course_b)),
]
print("parsed", len(transcripts), "transcripts; final states:",
      [t.turns[-1].evaluation.assessment_state for t in transcripts])

print("\nsymptom normalization:")
for raw in ["hopelesness", "mild fatigue", "appetite drop", "feeling worthless"]:
    print(f"  {raw!r:20} -> {normalize_symptom(raw).value}")

print("\nseverity categories:", {t: category_of(t) for t in (0, 10, 19, 30)})
print("classification codes:",
      {label: encode_classification(label) for label in ("Uncertain", "Mild", "Extreme")})

submission = build_submission(transcripts[:1])
print("\nsubmission row:", submission[0])

gold = load_gold(json.dumps([{
    "persona": "persona-1",
    "bdi": 24,
    "symptoms": ["Pessimism", "Tiredness or fatigue", "Changes in appetite", "Sadness"],
}]).encode())
categories = {r["persona"]: r["category"] for r in submission}
bdis = {r["persona"]: r["bdi"] for r in submission}
symptoms = {r["persona"]: r["symptoms"] for r in submission}
_, ashr_mean = ashr(symptoms, gold)
print(f"DCHR={dchr(categories, gold):.2f}  ADODL={adodl(bdis, gold):.3f}  "
      f"ASHR={ashr_mean:.2f}")

print("\nsummation audit (reported total vs item sum):")
for model, stats in summation_audit(transcripts).items():
    print(f"  {model}: avg_diff {stats['avg_diff']:.2f}, "
          f"correct {stats['correct_n']}/{stats['n']}")

agreement = agreement_std(extract_item_scores(transcripts))
worst = max(agreement["per_item"], key=agreement["per_item"].get)
print(f"\ncross-model agreement: {agreement['fraction_below_threshold']:.0%} of items "
      f"below std 0.5; most contested: {worst}")

series = trajectories(transcripts)
print("confidence by round:", [round(c, 2) for c in series["confidence_mean"]])
print("mean BDI by round:  ", series["bdi_mean"])

print("\nseverity-vs-score line over the two finals:")
xs = [encode_classification(t.turns[-1].evaluation.classification_suggestion)
      for t in transcripts]
ys = [t.turns[-1].evaluation.total_bdi_score for t in transcripts]
fit = ols_fit(xs, ys)
print(f"  bdi = {fit['slope']:.2f} * level + {fit['intercept']:.2f} (r2={fit['r2']:.2f})")

print("\noutput-message token stats:",
      token_stats([u.output_message for t in transcripts for u in t.turns]))
