"""Conversational-assessment analytics: transcript validation, symptom
normalization, severity metrics (DCHR, ADODL, ASHR), and audit statistics.

A transcript is one persona conversation. Every turn carries the agent's
messages plus a 21-item BDI-II evaluation block; parsing validates the
full schema, including enum membership, score ranges, item completeness,
and the monotone assessment state machine.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from .errors import (
    DegenerateX,
    InsufficientModels,
    MalformedInput,
    MissingItem,
    MissingPersona,
    OutOfRange,
    SchemaViolation,
    StateRegression,
    UnknownLabel,
    UnmappedSymptom,
    UnnormalizedInput,
)

__all__ = [
    "ASSESSMENT_STATES",
    "CLASSIFICATION_LABELS",
    "BDI_ITEM_KEYS",
    "CanonicalSymptom",
    "ItemScore",
    "Evaluation",
    "Turn",
    "Transcript",
    "GoldPersona",
    "parse_transcript",
    "normalize_symptom",
    "category_of",
    "prompt_category_of",
    "dchr",
    "adodl",
    "ashr",
    "encode_classification",
    "ols_fit",
    "summation_audit",
    "agreement_std",
    "extract_item_scores",
    "trajectories",
    "count_tokens",
    "token_stats",
    "collect_texts",
    "turn_confidence_stats",
    "final_evaluation",
    "build_submission",
    "load_gold",
]

ASSESSMENT_STATES = ("Initializing", "Gathering", "Consolidating", "Concluding", "Finalized")
_STATE_ORDER = {s: i for i, s in enumerate(ASSESSMENT_STATES)}

CLASSIFICATION_LABELS = ("Uncertain", "Control", "Mild", "Borderline", "Moderate", "Severe",
                         "Extreme")
_CLASSIFICATION_CODES = {label.lower(): code for code, label in enumerate(CLASSIFICATION_LABELS)}


class CanonicalSymptom(Enum):
    """The 21 BDI-II symptom names (closed set)."""

    SADNESS = "Sadness"
    PESSIMISM = "Pessimism"
    PAST_FAILURE = "Past failure"
    LOSS_OF_PLEASURE = "Loss of pleasure"
    GUILTY_FEELINGS = "Guilty feelings"
    PUNISHMENT_FEELINGS = "Punishment feelings"
    SELF_DISLIKE = "Self-dislike"
    SELF_CRITICALNESS = "Self-criticalness"
    SUICIDAL_THOUGHTS = "Suicidal thoughts or wishes"
    CRYING = "Crying"
    AGITATION = "Agitation"
    LOSS_OF_INTEREST_IN_OTHERS = "Loss of interest in others"
    INDECISIVENESS = "Indecisiveness"
    WORTHLESSNESS = "Worthlessness"
    LOSS_OF_ENERGY = "Loss of energy"
    SLEEP_CHANGES = "Changes in sleeping pattern"
    IRRITABILITY = "Irritability"
    APPETITE_CHANGES = "Changes in appetite"
    CONCENTRATION_DIFFICULTY = "Concentration difficulty"
    TIREDNESS_OR_FATIGUE = "Tiredness or fatigue"
    LOSS_OF_INTEREST_IN_SEX = "Loss of interest in sex"


# Item key suffixes follow the assessment prompt's numbering.
BDI_ITEM_KEYS = (
    "q01_sadness",
    "q02_pessimism",
    "q03_past_failure",
    "q04_loss_of_pleasure",
    "q05_guilty_feelings",
    "q06_punishment_feelings",
    "q07_self_dislike",
    "q08_self_criticalness",
    "q09_suicidal_thoughts",
    "q10_crying",
    "q11_agitation",
    "q12_loss_of_interest_in_others",
    "q13_indecisiveness",
    "q14_worthlessness",
    "q15_loss_of_energy",
    "q16_sleep_changes",
    "q17_tiredness_or_fatigue",
    "q18_appetite_changes",
    "q19_weight_loss",
    "q20_somatic_preoccupation",
    "q21_loss_of_libido",
)
_ITEM_PREFIXES = tuple(key[:3] for key in BDI_ITEM_KEYS)
_PREFIX_RE = re.compile(r"^q(\d{2})(?=_|$)")


@dataclass(frozen=True)
class ItemScore:
    score: int
    reason: str


@dataclass
class Evaluation:
    assessment_turn: int
    assessment_state: str
    assessment_complete: bool
    total_bdi_score: int
    classification_suggestion: str
    confidence: float
    key_symptoms: list[str]
    bdi_scores: dict[str, ItemScore]

    def item_total(self) -> int:
        return sum(item.score for item in self.bdi_scores.values())


@dataclass
class Turn:
    input_message: str
    output_message: str
    next_step_reasoning: str
    evaluation: Evaluation


@dataclass
class Transcript:
    model_name: str
    persona_id: str
    turns: list[Turn] = field(default_factory=list)


@dataclass(frozen=True)
class GoldPersona:
    persona_id: str
    true_bdi: int
    true_category: str
    true_symptoms: tuple[CanonicalSymptom, ...]


_ALIAS_TABLE: dict[str, CanonicalSymptom] | None = None
_NON_ALNUM_RE = re.compile(r"[^a-z0-9]+")


def _fold(raw: str) -> str:
    return _NON_ALNUM_RE.sub(" ", raw.lower()).strip()


def _alias_table() -> dict[str, CanonicalSymptom]:
    global _ALIAS_TABLE
    if _ALIAS_TABLE is None:
        with resources.files("riskbench.data").joinpath("symptom_aliases.json").open(
            "r", encoding="utf-8"
        ) as fh:
            raw = json.load(fh)
        by_name = {_fold(s.value): s for s in CanonicalSymptom}
        table = {}
        for alias, canonical in raw.items():
            target = by_name.get(_fold(canonical))
            if target is None:
                raise ValueError(f"alias target {canonical!r} is not canonical")
            table[_fold(alias)] = target
        _ALIAS_TABLE = table
    return _ALIAS_TABLE


def normalize_symptom(raw: str) -> CanonicalSymptom:
    """Map a free-text symptom to its canonical BDI-II name.

    Case and punctuation insensitive exact matches win; otherwise the
    bundled alias table is consulted. Unknown strings raise
    :class:`UnmappedSymptom` so failures stay auditable.
    """
    folded = _fold(raw)
    for symptom in CanonicalSymptom:
        if _fold(symptom.value) == folded:
            return symptom
    alias = _alias_table().get(folded)
    if alias is None:
        raise UnmappedSymptom(raw)
    return alias


def category_of(total_bdi: int) -> str:
    """Official four-category severity mapping of a BDI-II total."""
    if isinstance(total_bdi, bool) or not isinstance(total_bdi, int):
        raise OutOfRange(f"total must be an integer, got {total_bdi!r}")
    if not 0 <= total_bdi <= 63:
        raise OutOfRange(f"total {total_bdi} outside 0..63")
    if total_bdi <= 9:
        return "minimal"
    if total_bdi <= 18:
        return "mild"
    if total_bdi <= 29:
        return "moderate"
    return "severe"


def prompt_category_of(total_bdi: int) -> str:
    """Six-level scale used inside the assessment prompt (analysis helper)."""
    if isinstance(total_bdi, bool) or not isinstance(total_bdi, int):
        raise OutOfRange(f"total must be an integer, got {total_bdi!r}")
    if not 0 <= total_bdi <= 63:
        raise OutOfRange(f"total {total_bdi} outside 0..63")
    if total_bdi <= 10:
        return "Control"
    if total_bdi <= 16:
        return "Mild"
    if total_bdi <= 20:
        return "Borderline"
    if total_bdi <= 30:
        return "Moderate"
    if total_bdi <= 40:
        return "Severe"
    return "Extreme"


def encode_classification(label: str) -> int:
    """Numeric level of a classification label (Uncertain=0 .. Extreme=6)."""
    if not isinstance(label, str):
        raise UnknownLabel(f"label must be a string, got {label!r}")
    code = _CLASSIFICATION_CODES.get(label.strip().lower())
    if code is None:
        raise UnknownLabel(f"unknown classification {label!r}")
    return code


# --- transcript parsing -------------------------------------------------------


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaViolation(path, f"missing field {key!r}")
    return obj[key]


def _require_str(obj: dict, key: str, path: str) -> str:
    value = _require(obj, key, path)
    if not isinstance(value, str):
        raise SchemaViolation(f"{path}.{key}", "expected a string")
    return value


def _require_int(obj: dict, key: str, path: str, lo: int, hi: int) -> int:
    value = _require(obj, key, path)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(f"{path}.{key}", "expected an integer")
    if not lo <= value <= hi:
        raise SchemaViolation(f"{path}.{key}", f"value {value} outside {lo}..{hi}")
    return value


def _parse_items(raw: dict, path: str) -> dict[str, ItemScore]:
    if not isinstance(raw, dict):
        raise SchemaViolation(path, "expected an object of BDI items")
    by_prefix: dict[str, tuple[str, dict]] = {}
    for key, value in raw.items():
        match = _PREFIX_RE.match(key)
        if not match or match.group(0) not in _ITEM_PREFIXES:
            raise SchemaViolation(f"{path}.{key}", "not a q01..q21 item key")
        prefix = match.group(0)
        if prefix in by_prefix:
            raise SchemaViolation(f"{path}.{key}", f"duplicate item {prefix}")
        by_prefix[prefix] = (key, value)
    for canonical_key in BDI_ITEM_KEYS:
        prefix = canonical_key[:3]
        if prefix not in by_prefix:
            raise MissingItem(path, f"missing item {prefix}")
    items: dict[str, ItemScore] = {}
    for canonical_key in BDI_ITEM_KEYS:
        prefix = canonical_key[:3]
        key, value = by_prefix[prefix]
        if not isinstance(value, dict):
            raise SchemaViolation(f"{path}.{key}", "expected an object with score and reason")
        score = _require_int(value, "score", f"{path}.{key}", 0, 3)
        reason = _require_str(value, "reason", f"{path}.{key}")
        items[canonical_key] = ItemScore(score=score, reason=reason)
    return items


def _parse_evaluation(raw: dict, path: str) -> Evaluation:
    if not isinstance(raw, dict):
        raise SchemaViolation(path, "expected an evaluation object")
    turn_no = _require_int(raw, "assessment_turn", path, 1, 10**9)
    state = _require_str(raw, "assessment_state", path)
    if state not in _STATE_ORDER:
        raise SchemaViolation(f"{path}.assessment_state", f"unknown state {state!r}")
    complete = _require(raw, "assessment_complete", path)
    if not isinstance(complete, bool):
        raise SchemaViolation(f"{path}.assessment_complete", "expected a boolean")
    total = _require_int(raw, "total_bdi_score", path, 0, 63)
    classification = _require_str(raw, "classification_suggestion", path)
    if classification not in CLASSIFICATION_LABELS:
        raise SchemaViolation(
            f"{path}.classification_suggestion", f"unknown label {classification!r}"
        )
    confidence = _require(raw, "confidence", path)
    if isinstance(confidence, bool) or not isinstance(confidence, (int, float)):
        raise SchemaViolation(f"{path}.confidence", "expected a number")
    if not 0.0 <= float(confidence) <= 1.0:
        raise SchemaViolation(f"{path}.confidence", f"value {confidence} outside 0..1")
    symptoms = _require(raw, "key_symptoms", path)
    if not isinstance(symptoms, list) or len(symptoms) > 4:
        raise SchemaViolation(f"{path}.key_symptoms", "expected a list of at most 4 strings")
    for i, s in enumerate(symptoms):
        if not isinstance(s, str):
            raise SchemaViolation(f"{path}.key_symptoms[{i}]", "expected a string")
    items = _parse_items(_require(raw, "bdi_scores", path), f"{path}.bdi_scores")
    return Evaluation(
        assessment_turn=turn_no,
        assessment_state=state,
        assessment_complete=complete,
        total_bdi_score=total,
        classification_suggestion=classification,
        confidence=float(confidence),
        key_symptoms=list(symptoms),
        bdi_scores=items,
    )


def parse_transcript(data: bytes | str) -> Transcript:
    """Parse and fully validate one persona transcript.

    Turn numbers must rise strictly from 1 and assessment states may never
    move backwards through Initializing, Gathering, Consolidating,
    Concluding, Finalized.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"not UTF-8: {exc}") from exc
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaViolation("$", "expected a transcript object")
    model = _require_str(obj, "model", "$")
    persona = _require_str(obj, "persona", "$")
    raw_turns = _require(obj, "turns", "$")
    if not isinstance(raw_turns, list) or not raw_turns:
        raise SchemaViolation("$.turns", "expected a nonempty array")

    turns: list[Turn] = []
    for i, raw_turn in enumerate(raw_turns):
        path = f"$.turns[{i}]"
        if not isinstance(raw_turn, dict):
            raise SchemaViolation(path, "expected a turn object")
        evaluation = _parse_evaluation(_require(raw_turn, "evaluation", path),
                                       f"{path}.evaluation")
        turns.append(
            Turn(
                input_message=_require_str(raw_turn, "input_message", path),
                output_message=_require_str(raw_turn, "output_message", path),
                next_step_reasoning=_require_str(raw_turn, "next_step_reasoning", path),
                evaluation=evaluation,
            )
        )

    if turns[0].evaluation.assessment_turn != 1:
        raise SchemaViolation("$.turns[0].evaluation.assessment_turn", "first turn must be 1")
    for i in range(1, len(turns)):
        prev, cur = turns[i - 1].evaluation, turns[i].evaluation
        if cur.assessment_turn <= prev.assessment_turn:
            raise SchemaViolation(
                f"$.turns[{i}].evaluation.assessment_turn", "turn numbers must increase"
            )
        if _STATE_ORDER[cur.assessment_state] < _STATE_ORDER[prev.assessment_state]:
            raise StateRegression(
                f"$.turns[{i}].evaluation.assessment_state",
                f"{cur.assessment_state} after {prev.assessment_state}",
            )
    return Transcript(model_name=model, persona_id=persona, turns=turns)


# --- run metrics -----------------------------------------------------------------


def dchr(predictions: dict[str, str], gold: list[GoldPersona]) -> float:
    """Fraction of personas whose predicted severity category is exact."""
    if not gold:
        raise MissingPersona("gold set is empty")
    hits = 0
    for g in gold:
        if g.persona_id not in predictions:
            raise MissingPersona(f"no prediction for persona {g.persona_id!r}")
        if predictions[g.persona_id] == g.true_category:
            hits += 1
    return hits / len(gold)


def adodl(predictions: dict[str, int], gold: list[GoldPersona]) -> float:
    """Mean of (63 - |ADL - EDL|) / 63 over personas."""
    if not gold:
        raise MissingPersona("gold set is empty")
    total = 0.0
    for g in gold:
        if g.persona_id not in predictions:
            raise MissingPersona(f"no prediction for persona {g.persona_id!r}")
        edl = predictions[g.persona_id]
        if isinstance(edl, bool) or not isinstance(edl, int) or not 0 <= edl <= 63:
            raise OutOfRange(f"EDL {edl!r} outside 0..63 for persona {g.persona_id!r}")
        if not 0 <= g.true_bdi <= 63:
            raise OutOfRange(f"ADL {g.true_bdi!r} outside 0..63")
        total += (63 - abs(g.true_bdi - edl)) / 63.0
    return total / len(gold)


def ashr(
    pred_symptoms: dict[str, list], gold: list[GoldPersona]
) -> tuple[dict[str, float], float]:
    """Per-persona fraction of the four gold symptoms found, and the mean.

    Predictions must already be canonical (CanonicalSymptom members or
    exact canonical names); the denominator is fixed at 4.
    """
    if not gold:
        raise MissingPersona("gold set is empty")
    per_persona: dict[str, float] = {}
    for g in gold:
        if g.persona_id not in pred_symptoms:
            raise MissingPersona(f"no prediction for persona {g.persona_id!r}")
        canonical = set()
        for sym in pred_symptoms[g.persona_id]:
            if isinstance(sym, CanonicalSymptom):
                canonical.add(sym)
                continue
            member = next((s for s in CanonicalSymptom if s.value == sym), None)
            if member is None:
                raise UnnormalizedInput(f"symptom {sym!r} is not canonical")
            canonical.add(member)
        per_persona[g.persona_id] = len(canonical & set(g.true_symptoms)) / 4.0
    mean = math.fsum(per_persona.values()) / len(per_persona)
    return per_persona, mean


def ols_fit(x, y) -> dict[str, float]:
    """Ordinary least squares line with coefficient of determination."""
    xs = [float(v) for v in x]
    ys = [float(v) for v in y]
    n = len(xs)
    if n != len(ys):
        raise DegenerateX("x and y lengths differ")
    if n < 2:
        raise DegenerateX("need at least 2 points")
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    sxx = math.fsum((v - mean_x) ** 2 for v in xs)
    if sxx == 0.0:
        raise DegenerateX("x has zero variance")
    sxy = math.fsum((xs[i] - mean_x) * (ys[i] - mean_y) for i in range(n))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    ss_res = math.fsum((ys[i] - (slope * xs[i] + intercept)) ** 2 for i in range(n))
    ss_tot = math.fsum((v - mean_y) ** 2 for v in ys)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return {"slope": slope, "intercept": intercept, "r2": r2}


def _population_std(values: list[float]) -> float:
    n = len(values)
    if n == 0:
        return 0.0
    mean = math.fsum(values) / n
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / n)


def summation_audit(transcripts: list[Transcript]) -> dict[str, dict[str, float]]:
    """Check each turn's reported total against the sum of its item scores.

    Per model: mean and population std of |total - item sum|, the number
    of exactly correct turns, the turn count, and the correct fraction.
    """
    by_model: dict[str, list[int]] = {}
    for t in transcripts:
        diffs = by_model.setdefault(t.model_name, [])
        for turn in t.turns:
            ev = turn.evaluation
            diffs.append(abs(ev.total_bdi_score - ev.item_total()))
    out: dict[str, dict[str, float]] = {}
    for model in sorted(by_model):
        diffs = by_model[model]
        n = len(diffs)
        correct = sum(1 for d in diffs if d == 0)
        out[model] = {
            "avg_diff": math.fsum(diffs) / n if n else 0.0,
            "std_diff": _population_std([float(d) for d in diffs]),
            "correct_n": correct,
            "n": n,
            "correct_pct": correct / n if n else 0.0,
        }
    return out


def extract_item_scores(
    transcripts: list[Transcript],
) -> dict[str, dict[str, dict[int, list[int]]]]:
    """model -> persona -> turn number -> the 21 item scores in key order."""
    out: dict[str, dict[str, dict[int, list[int]]]] = {}
    for t in transcripts:
        personas = out.setdefault(t.model_name, {})
        turns = personas.setdefault(t.persona_id, {})
        for turn in t.turns:
            ev = turn.evaluation
            turns[ev.assessment_turn] = [ev.bdi_scores[k].score for k in BDI_ITEM_KEYS]
    return out


def agreement_std(
    item_scores: dict[str, dict[str, dict[int, list[int]]]],
    turn: int | None = None,
    threshold: float = 0.5,
) -> dict:
    """Cross-model agreement on item scores at a selected turn.

    For every item and persona, the population standard deviation of the
    score across models (using each model's latest turn <= `turn`, or its
    final turn when `turn` is None); per item, the mean over personas.
    Personas must be covered by every model; those missing a usable turn
    under the selector are skipped. Also reports the fraction of items
    whose mean std falls below `threshold`.
    """
    models = sorted(item_scores)
    if len(models) < 2:
        raise InsufficientModels("agreement needs at least 2 models")
    shared = set(item_scores[models[0]])
    for m in models[1:]:
        shared &= set(item_scores[m])

    def select(turns: dict[int, list[int]]):
        usable = [t for t in turns if turn is None or t <= turn]
        return turns[max(usable)] if usable else None

    per_item: dict[str, float] = {}
    stds: dict[str, list[float]] = {key: [] for key in BDI_ITEM_KEYS}
    for persona in sorted(shared):
        rows = [select(item_scores[m][persona]) for m in models]
        if any(r is None for r in rows):
            continue
        for idx, key in enumerate(BDI_ITEM_KEYS):
            stds[key].append(_population_std([float(r[idx]) for r in rows]))
    for key in BDI_ITEM_KEYS:
        per_item[key] = (
            math.fsum(stds[key]) / len(stds[key]) if stds[key] else 0.0
        )
    below = sum(1 for v in per_item.values() if v < threshold)
    return {
        "per_item": per_item,
        "fraction_below_threshold": below / len(BDI_ITEM_KEYS),
        "threshold": threshold,
        "models": models,
        "personas_used": sorted(shared),
    }


def trajectories(transcripts: list[Transcript]) -> dict:
    """Per-round mean confidence and mean total BDI over a transcript set.

    Confidence averages ignore rounds a transcript does not report (null
    rounds); BDI values are forward-filled from each transcript's last
    valid round before averaging.
    """
    if not transcripts:
        return {"rounds": [], "confidence_mean": [], "bdi_mean": []}
    max_round = max(t.turns[-1].evaluation.assessment_turn for t in transcripts)
    conf_at: list[dict[int, float]] = []
    bdi_at: list[dict[int, int]] = []
    for t in transcripts:
        conf_at.append({u.evaluation.assessment_turn: u.evaluation.confidence for u in t.turns})
        bdi_at.append({u.evaluation.assessment_turn: u.evaluation.total_bdi_score
                       for u in t.turns})
    rounds = list(range(1, max_round + 1))
    conf_series: list[float | None] = []
    bdi_series: list[float | None] = []
    for r in rounds:
        confs = [m[r] for m in conf_at if r in m]
        conf_series.append(math.fsum(confs) / len(confs) if confs else None)
        filled = []
        for m in bdi_at:
            valid = [t for t in m if t <= r]
            if valid:
                filled.append(m[max(valid)])
        bdi_series.append(math.fsum(filled) / len(filled) if filled else None)
    return {"rounds": rounds, "confidence_mean": conf_series, "bdi_mean": bdi_series}


def count_tokens(text: str) -> int:
    """Whitespace tokens: maximal runs of non-space characters."""
    return len(text.split())


def token_stats(texts: list[str]) -> dict[str, float]:
    """n, sum, avg, max, min, population std of whitespace token counts.

    Empty strings count 0 tokens and stay included in n.
    """
    counts = [count_tokens(t) for t in texts]
    n = len(counts)
    if n == 0:
        return {"n": 0, "sum": 0, "avg": 0.0, "max": 0, "min": 0, "std": 0.0}
    return {
        "n": n,
        "sum": sum(counts),
        "avg": sum(counts) / n,
        "max": max(counts),
        "min": min(counts),
        "std": _population_std([float(c) for c in counts]),
    }


_FIELDS = {
    "input": lambda turn: turn.input_message,
    "output": lambda turn: turn.output_message,
    "reason": lambda turn: turn.next_step_reasoning,
}


def collect_texts(transcripts: list[Transcript], field_name: str) -> dict[str, list[str]]:
    """Per-model message texts for one of: input, output, reason."""
    if field_name not in _FIELDS:
        raise ValueError(f"field must be one of {sorted(_FIELDS)}, got {field_name!r}")
    getter = _FIELDS[field_name]
    out: dict[str, list[str]] = {}
    for t in transcripts:
        out.setdefault(t.model_name, []).extend(getter(turn) for turn in t.turns)
    return out


def turn_confidence_stats(transcripts: list[Transcript]) -> dict[str, dict[str, float]]:
    """Per-model mean/std of final turn number and final confidence."""
    finals: dict[str, list[tuple[int, float]]] = {}
    for t in transcripts:
        ev = t.turns[-1].evaluation
        finals.setdefault(t.model_name, []).append((ev.assessment_turn, ev.confidence))
    out = {}
    for model in sorted(finals):
        turns = [float(x) for x, _ in finals[model]]
        confs = [c for _, c in finals[model]]
        out[model] = {
            "avg_turn": math.fsum(turns) / len(turns),
            "avg_conf": math.fsum(confs) / len(confs),
            "std_turn": _population_std(turns),
            "std_conf": _population_std(confs),
        }
    return out


def final_evaluation(transcript: Transcript, rule: str = "finalized") -> Evaluation:
    """The evaluation used for submissions.

    rule="finalized": the last turn whose state is Finalized, falling back
    to the final turn; rule="last": always the final turn.
    """
    if rule not in ("finalized", "last"):
        raise ValueError(f"unknown rule {rule!r}")
    if rule == "finalized":
        for turn in reversed(transcript.turns):
            if turn.evaluation.assessment_state == "Finalized":
                return turn.evaluation
    return transcript.turns[-1].evaluation


def build_submission(transcripts: list[Transcript], rule: str = "finalized") -> list[dict]:
    """Cleaned per-persona submission rows: category, BDI total, symptoms.

    Key symptoms are normalized to canonical names (duplicates collapse,
    order preserved); unmappable entries raise :class:`UnmappedSymptom`.
    """
    seen_personas = {t.persona_id for t in transcripts}
    if len(seen_personas) != len(transcripts):
        raise MalformedInput(
            "one transcript per persona expected; filter to a single run/model first"
        )
    rows = []
    for t in sorted(transcripts, key=lambda item: item.persona_id):
        ev = final_evaluation(t, rule)
        seen: list[str] = []
        for raw in ev.key_symptoms:
            name = normalize_symptom(raw).value
            if name not in seen:
                seen.append(name)
        rows.append(
            {
                "persona": t.persona_id,
                "category": category_of(ev.total_bdi_score),
                "bdi": ev.total_bdi_score,
                "symptoms": seen[:4],
            }
        )
    return rows


def load_gold(data: bytes | str) -> list[GoldPersona]:
    """Parse the gold file: [{"persona":..., "bdi":..., "symptoms":[4 names]}]."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise MalformedInput("gold file must be a JSON array")
    personas = []
    for i, entry in enumerate(raw):
        try:
            persona = entry["persona"]
            bdi = entry["bdi"]
            symptoms = entry["symptoms"]
        except (KeyError, TypeError) as exc:
            raise MalformedInput(f"gold[{i}]: {exc}") from exc
        if isinstance(bdi, bool) or not isinstance(bdi, int) or not 0 <= bdi <= 63:
            raise OutOfRange(f"gold[{i}]: bdi {bdi!r} outside 0..63")
        if not isinstance(symptoms, list) or len(symptoms) != 4:
            raise MalformedInput(f"gold[{i}]: expected exactly 4 symptoms")
        canonical = tuple(normalize_symptom(s) for s in symptoms)
        personas.append(
            GoldPersona(
                persona_id=persona,
                true_bdi=bdi,
                true_category=category_of(bdi),
                true_symptoms=canonical,
            )
        )
    return personas
