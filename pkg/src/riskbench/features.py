"""Engineered features: TF-IDF, lexicon sentiment, LIWC-style counts,
temporal activity features, and box-plot statistics.

The sentiment scorer is a compact lexicon method (valence lookup, a
negation window, booster words, exclamation emphasis, and the usual
S/sqrt(S^2+15) compound normalization). Idiom handling, emoticons, and
all-caps emphasis are deliberately not implemented.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .corpus import UserTimeline, post_text
from .errors import EmptyCorpus, EmptyInput, EmptyTimeline

__all__ = [
    "TfidfModel",
    "SentimentScores",
    "LexiconConfig",
    "TemporalFeatures",
    "BoxStats",
    "default_lexicon",
    "fit_tfidf",
    "tfidf_transform",
    "sentiment_scores",
    "liwc_counts",
    "temporal_features",
    "box_stats",
    "assemble_row",
    "feature_header",
    "DEFAULT_LATE_NIGHT_HOURS",
]

BOOSTER_STEP = 0.293
NEGATION_SCALAR = -0.74
NEGATION_WINDOW = 3
EXCLAIM_STEP = 0.292
MAX_EXCLAIM = 4
COMPOUND_ALPHA = 15.0

DEFAULT_LATE_NIGHT_HOURS = frozenset(range(0, 6))

_EDGE_PUNCT = ".,!?;:\"'()[]&-"


def _words(text: str) -> list[str]:
    """Whitespace tokens, lowercased, stripped of edge punctuation."""
    out = []
    for tok in text.lower().split():
        tok = tok.strip(_EDGE_PUNCT)
        if tok:
            out.append(tok)
    return out


@dataclass
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    max_features: int

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def to_dict(self) -> dict:
        terms = sorted(self.vocabulary, key=self.vocabulary.get)
        return {
            "terms": terms,
            "idf": [float(x) for x in self.idf],
            "max_features": self.max_features,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TfidfModel":
        vocab = {t: i for i, t in enumerate(obj["terms"])}
        return cls(vocab, np.asarray(obj["idf"], dtype=np.float64), int(obj["max_features"]))


@dataclass(frozen=True)
class SentimentScores:
    neg: float
    neu: float
    pos: float
    compound: float


@dataclass
class LexiconConfig:
    """Token lists driving sentiment and LIWC-style counts (all lowercase)."""

    valence: dict[str, float] = field(default_factory=dict)
    boosters: dict[str, float] = field(default_factory=dict)
    negators: frozenset[str] = frozenset()
    pronouns_first_person: frozenset[str] = frozenset({"i", "me", "my"})
    neg_emotion_words: frozenset[str] = frozenset({"sad", "depressed", "lonely"})
    social_words: frozenset[str] = frozenset({"friend", "family", "talk"})

    def __post_init__(self):
        for token in (
            list(self.valence) + list(self.boosters) + list(self.negators)
            + list(self.pronouns_first_person) + list(self.neg_emotion_words)
            + list(self.social_words)
        ):
            if token != token.lower():
                raise ValueError(f"lexicon token not lowercase: {token!r}")


_DEFAULT_LEXICON: LexiconConfig | None = None


def default_lexicon() -> LexiconConfig:
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        with resources.files("riskbench.data").joinpath("lexicon.json").open(
            "r", encoding="utf-8"
        ) as fh:
            raw = json.load(fh)
        _DEFAULT_LEXICON = LexiconConfig(
            valence={k: float(v) for k, v in raw["valence"].items()},
            boosters={k: float(v) for k, v in raw["boosters"].items()},
            negators=frozenset(raw["negators"]),
            pronouns_first_person=frozenset(raw["pronouns_first_person"]),
            neg_emotion_words=frozenset(raw["neg_emotion_words"]),
            social_words=frozenset(raw["social_words"]),
        )
    return _DEFAULT_LEXICON


def load_lexicon(data: bytes | str) -> LexiconConfig:
    """Build a LexiconConfig from a JSON document (same shape as the bundled one)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    raw = json.loads(data)
    base = default_lexicon()
    return LexiconConfig(
        valence={k: float(v) for k, v in raw.get("valence", base.valence).items()},
        boosters={k: float(v) for k, v in raw.get("boosters", base.boosters).items()},
        negators=frozenset(raw.get("negators", base.negators)),
        pronouns_first_person=frozenset(
            raw.get("pronouns_first_person", base.pronouns_first_person)
        ),
        neg_emotion_words=frozenset(raw.get("neg_emotion_words", base.neg_emotion_words)),
        social_words=frozenset(raw.get("social_words", base.social_words)),
    )


@dataclass(frozen=True)
class TemporalFeatures:
    hours_since_first: float
    post_gap: float
    is_late_night: bool


@dataclass(frozen=True)
class BoxStats:
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]


def fit_tfidf(documents: list[str], max_features: int) -> TfidfModel:
    """Fit vocabulary and smoothed idf over whitespace-tokenized documents.

    Vocabulary keeps the ``max_features`` terms with the highest total
    corpus count (ties broken lexicographically); indices are assigned in
    sorted term order. idf(t) = ln((1+N)/(1+df(t))) + 1.
    """
    if max_features < 1:
        raise ValueError("max_features must be >= 1")
    token_docs = [doc.split() for doc in documents]
    if not any(token_docs):
        raise EmptyCorpus("need at least one nonempty document")
    counts: Counter[str] = Counter()
    df: Counter[str] = Counter()
    for toks in token_docs:
        counts.update(toks)
        df.update(set(toks))
    selected = sorted(counts, key=lambda t: (-counts[t], t))[:max_features]
    vocabulary = {t: i for i, t in enumerate(sorted(selected))}
    n_docs = len(documents)
    idf = np.empty(len(vocabulary), dtype=np.float64)
    for term, idx in vocabulary.items():
        idf[idx] = math.log((1.0 + n_docs) / (1.0 + df[term])) + 1.0
    return TfidfModel(vocabulary=vocabulary, idf=idf, max_features=max_features)


def tfidf_transform(model: TfidfModel, text: str) -> np.ndarray:
    """Count*idf vector, L2-normalized when nonzero; unknown terms ignored."""
    vec = np.zeros(model.dim, dtype=np.float64)
    for tok, cnt in Counter(text.split()).items():
        idx = model.vocabulary.get(tok)
        if idx is not None:
            vec[idx] = cnt * model.idf[idx]
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    return vec


def _trailing_exclaims(text: str) -> int:
    stripped = text.rstrip()
    n = 0
    while n < len(stripped) and stripped[-1 - n] == "!":
        n += 1
    return min(n, MAX_EXCLAIM)


def sentiment_scores(text: str, lexicon: LexiconConfig | None = None) -> SentimentScores:
    """Lexicon sentiment with negation, boosters, and exclamation emphasis.

    Token valences are adjusted in place: a booster immediately before a
    scored token shifts it by +-0.293 toward its sign, and any negator in
    the three preceding tokens multiplies it by -0.74. Up to four trailing
    exclamation marks each add 0.292 in the direction of the running sum.
    compound = S / sqrt(S^2 + 15); neg/neu/pos are shares of absolute
    valence mass, with zero-valence tokens counting 1 toward neutral.
    """
    if lexicon is None:
        lexicon = default_lexicon()
    tokens = _words(text)
    if not tokens:
        return SentimentScores(0.0, 0.0, 0.0, 0.0)

    adjusted: list[float] = []
    for i, tok in enumerate(tokens):
        v = lexicon.valence.get(tok, 0.0)
        if v != 0.0:
            sign = 1.0 if v > 0 else -1.0
            if i > 0:
                step = lexicon.boosters.get(tokens[i - 1])
                if step is not None:
                    v += step * sign
            window = tokens[max(0, i - NEGATION_WINDOW):i]
            if any(w in lexicon.negators for w in window):
                v *= NEGATION_SCALAR
        adjusted.append(v)

    total = math.fsum(adjusted)
    n_excl = _trailing_exclaims(text)
    if total > 0:
        total += EXCLAIM_STEP * n_excl
    elif total < 0:
        total -= EXCLAIM_STEP * n_excl
    compound = total / math.sqrt(total * total + COMPOUND_ALPHA)

    pos_mass = math.fsum(v for v in adjusted if v > 0)
    neg_mass = math.fsum(-v for v in adjusted if v < 0)
    neu_mass = float(sum(1 for v in adjusted if v == 0.0))
    mass = pos_mass + neg_mass + neu_mass
    if mass == 0.0:
        return SentimentScores(0.0, 0.0, 0.0, compound)
    return SentimentScores(
        neg=neg_mass / mass, neu=neu_mass / mass, pos=pos_mass / mass, compound=compound
    )


def liwc_counts(text: str, lexicon: LexiconConfig | None = None) -> dict[str, int]:
    """Counts of first-person pronouns, negative-emotion words, social words."""
    if lexicon is None:
        lexicon = default_lexicon()
    raw_tokens = text.split()
    tokens = _words(text)
    first = sum(1 for t in tokens if t in lexicon.pronouns_first_person)
    neg = sum(1 for t in tokens if t in lexicon.neg_emotion_words)
    social = sum(1 for t in tokens if t in lexicon.social_words)
    return {
        "first_person_count": first,
        "neg_emotion_count": neg,
        "social_count": social,
        "word_count": len(raw_tokens),
    }


def temporal_features(
    timeline: UserTimeline, late_night_hours: frozenset[int] = DEFAULT_LATE_NIGHT_HOURS
) -> list[TemporalFeatures]:
    """Per-post hours since first post, gap to the previous post, late-night flag."""
    if not timeline.posts:
        raise EmptyTimeline(f"user {timeline.user_id!r} has no posts")
    first = timeline.posts[0].timestamp
    out = []
    prev = None
    for p in timeline.posts:
        since_first = (p.timestamp - first).total_seconds() / 3600.0
        gap = 0.0 if prev is None else (p.timestamp - prev).total_seconds() / 3600.0
        out.append(
            TemporalFeatures(
                hours_since_first=since_first,
                post_gap=gap,
                is_late_night=p.timestamp.hour in late_night_hours,
            )
        )
        prev = p.timestamp
    return out


def box_stats(values) -> BoxStats:
    """Tukey box-plot statistics with linearly interpolated quartiles."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("box_stats needs at least one value")
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    outlier_mask = (arr < lo_fence) | (arr > hi_fence)
    inliers = arr[~outlier_mask]
    return BoxStats(
        median=float(med),
        q1=float(q1),
        q3=float(q3),
        whisker_low=float(inliers.min()),
        whisker_high=float(inliers.max()),
        outliers=tuple(float(x) for x in arr[outlier_mask]),
    )


def feature_header(model: TfidfModel) -> list[str]:
    """Column names for rows built by :func:`assemble_row`.

    The per-user pooling is: TF-IDF of the concatenated post texts, mean
    sentiment over posts, summed LIWC counts, the final hours_since_first,
    mean post gap, late-night post count, and the number of posts.
    """
    terms = sorted(model.vocabulary, key=model.vocabulary.get)
    return (
        [f"tfidf:{t}" for t in terms]
        + ["sentiment_neg_mean", "sentiment_neu_mean", "sentiment_pos_mean",
           "sentiment_compound_mean"]
        + ["first_person_total", "neg_emotion_total", "social_total", "word_count_total"]
        + ["hours_since_first_last", "post_gap_mean", "late_night_count", "post_frequency"]
    )


def assemble_row(
    timeline: UserTimeline,
    model: TfidfModel,
    lexicon: LexiconConfig | None = None,
    late_night_hours: frozenset[int] = DEFAULT_LATE_NIGHT_HOURS,
) -> np.ndarray:
    """Fixed-layout user feature row; see :func:`feature_header` for columns."""
    if lexicon is None:
        lexicon = default_lexicon()
    texts = [post_text(p) for p in timeline.posts]
    temporal = temporal_features(timeline, late_night_hours)

    tfidf_block = tfidf_transform(model, " ".join(texts))

    sents = [sentiment_scores(t, lexicon) for t in texts]
    n = len(texts)
    sent_block = [
        math.fsum(s.neg for s in sents) / n,
        math.fsum(s.neu for s in sents) / n,
        math.fsum(s.pos for s in sents) / n,
        math.fsum(s.compound for s in sents) / n,
    ]

    liwc = [liwc_counts(t, lexicon) for t in texts]
    liwc_block = [
        float(sum(c["first_person_count"] for c in liwc)),
        float(sum(c["neg_emotion_count"] for c in liwc)),
        float(sum(c["social_count"] for c in liwc)),
        float(sum(c["word_count"] for c in liwc)),
    ]

    temporal_block = [
        temporal[-1].hours_since_first,
        math.fsum(t.post_gap for t in temporal) / n,
        float(sum(1 for t in temporal if t.is_late_night)),
        float(n),
    ]

    return np.concatenate([tfidf_block, sent_block, liwc_block, temporal_block])
