"""Engineered features: TF-IDF, lexicon sentiment, LIWC-style counts,
temporal activity, and the box-plot statistics behind the EDA figures.

Run: python demos/02_features.py
"""

from datetime import datetime, timezone

from riskbench.corpus import RawPost, UserTimeline
from riskbench.features import (
    assemble_row,
    box_stats,
    default_lexicon,
    feature_header,
    fit_tfidf,
    liwc_counts,
    sentiment_scores,
    temporal_features,
    tfidf_transform,
)


def at(day, hour):
    return datetime(2024, 3, day, hour, 0, 0, tzinfo=timezone.utc)


posts = [
    RawPost("p0", at(1, 3), body="i feel so sad and alone tonight"),
    RawPost("p1", at(1, 15), body="talked to my friend it helped a little"),
    RawPost("p2", at(3, 2), body="tired again i can not focus on anything"),
]
user = UserTimeline("demo", posts)
texts = [p.body for p in posts]

print("== TF-IDF ==")
model = fit_tfidf(texts, max_features=12)
print("vocabulary:", sorted(model.vocabulary))
vec = tfidf_transform(model, texts[0])
print("transform norm (unit when nonzero):", round(float((vec @ vec) ** 0.5), 6))

print("\n== sentiment ==")
lexicon = default_lexicon()
for text in ["good", "not good", "very good", "so sad!!"]:
    s = sentiment_scores(text, lexicon)
    print(f"  {text!r:14} -> compound {s.compound:+.3f}  (neg {s.neg:.2f} "
          f"neu {s.neu:.2f} pos {s.pos:.2f})")

print("\n== LIWC-style counts ==")
for text in texts:
    print(" ", liwc_counts(text, lexicon), "<-", text)

print("\n== temporal ==")
for post, feats in zip(posts, temporal_features(user)):
    print(f"  {post.post_id}: {feats.hours_since_first:6.1f} h since first, "
          f"gap {feats.post_gap:5.1f} h, late-night={feats.is_late_night}")

print("\n== box-plot statistics ==")
post_frequencies = [3, 5, 4, 6, 5, 80, 4, 3, 5, 6]
stats = box_stats(post_frequencies)
print(f"  median {stats.median}, IQR [{stats.q1}, {stats.q3}], "
      f"whiskers [{stats.whisker_low}, {stats.whisker_high}], outliers {stats.outliers}")

print("\n== assembled user row ==")
row = assemble_row(user, model, lexicon)
header = feature_header(model)
print(f"  {len(row)} columns; last four: "
      f"{dict(zip(header[-4:], [round(float(v), 3) for v in row[-4:]]))}")
