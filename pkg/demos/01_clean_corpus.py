"""Walk through the text-cleaning pipeline on messy social-media posts.

Run: python demos/01_clean_corpus.py
"""

import json

from riskbench.corpus import (
    clean_timeline,
    clean_text,
    expand_contractions,
    label_counts,
    load_labels,
    parse_user_file,
    post_text,
    write_corpus_jsonl,
)

# One raw user file, as fetched: null fields, URLs, HTML entities,
# mojibake, stray markdown, and contractions.
raw_user = {
    "user_id": "demo-user",
    "posts": [
        {
            "post_id": "a1",
            "timestamp": "2024-03-01T23:55:00Z",
            "title": "can't sleep again",
            "text": "It's 3am &amp; I donâ€™t feel okay... [mood tracker](www.moodapp.io/u/1)",
            "is_subject": True,
        },
        {
            "post_id": "a0",
            "timestamp": "2024-03-01T09:10:00Z",
            "title": None,
            "text": "Check this out https://example.org/post?id=9 pretty interesting",
            "is_subject": True,
        },
    ],
}

timeline = parse_user_file(json.dumps(raw_user).encode())
print("posts arrive sorted by timestamp:")
for post in timeline.posts:
    print(f"  {post.timestamp:%H:%M} {post.post_id}: {post.title!r} / {post.body!r}")

print("\nstep by step on one string:")
s = "It's 3am &amp; I donâ€™t feel okay... [mood tracker](www.moodapp.io/u/1)"
print("  raw:     ", s)
print("  expanded:", expand_contractions("don't"))
print("  cleaned: ", clean_text(s))

print("\ncleaning is idempotent:")
once = clean_text(s)
print("  clean(clean(x)) == clean(x):", clean_text(once) == once)

cleaned = clean_timeline(timeline)
print("\ncleaned post texts (title + body):")
for post in cleaned.posts:
    print(" ", post_text(post))

print("\ncanonical corpus JSONL:")
print(write_corpus_jsonl([cleaned]).decode(), end="")

labels = load_labels(b"demo-user\t1\nother-user\t0")
print("\nlabel table:", labels, "counts (neg, pos):", label_counts(labels))
