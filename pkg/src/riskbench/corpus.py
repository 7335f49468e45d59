"""Raw post ingestion and the text-cleaning pipeline.

One input file per user: a JSON object with ``user_id`` and a ``posts``
array. Cleaning normalizes unicode, decodes HTML entities, strips URLs,
expands contractions, filters characters, and collapses whitespace, in
that order. The ordered pass is re-applied until the text stabilizes so
``clean_text`` is idempotent.
"""

from __future__ import annotations

import html
import json
import re
import unicodedata
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from importlib import resources

from .errors import BadLabel, BadTimestamp, DuplicatePost, MalformedInput

__all__ = [
    "RawPost",
    "UserTimeline",
    "ContractionTable",
    "default_contractions",
    "parse_user_file",
    "serialize_user_file",
    "expand_contractions",
    "clean_text",
    "clean_timeline",
    "post_text",
    "load_labels",
    "label_counts",
    "write_corpus_jsonl",
    "load_corpus_jsonl",
]

_UTC = timezone.utc

# Whole-match URL removal: scheme://rest or www.rest, wherever it appears.
_URL_RE = re.compile(r"(?:[A-Za-z][A-Za-z0-9+.\-]*://\S+|www\.\S+)")

# Word runs considered for contraction lookup (letters plus internal apostrophes).
_WORD_RE = re.compile(r"[A-Za-z][A-Za-z']*")

# Characters kept by the filtering step: unicode alphanumerics, space,
# apostrophe, hyphen, sentence punctuation, and ampersand.
_KEPT_PUNCT = frozenset(" '-.,!?&")

_WS_RE = re.compile(r"\s+")


def _load_data(name: str) -> dict:
    with resources.files("riskbench.data").joinpath(name).open("r", encoding="utf-8") as fh:
        return json.load(fh)


@dataclass(frozen=True)
class RawPost:
    """One post: id, UTC timestamp (seconds precision), title, body, authorship."""

    post_id: str
    timestamp: datetime
    title: str = ""
    body: str = ""
    is_subject: bool = True


@dataclass
class UserTimeline:
    """A user's posts sorted by (timestamp, post_id)."""

    user_id: str
    posts: list[RawPost] = field(default_factory=list)

    def __post_init__(self):
        self.posts = sorted(self.posts, key=lambda p: (p.timestamp, p.post_id))
        seen = set()
        for p in self.posts:
            if p.post_id in seen:
                raise DuplicatePost(f"user {self.user_id!r}: duplicate post_id {p.post_id!r}")
            seen.add(p.post_id)


class ContractionTable:
    """Lowercase contraction -> expansion map with loop-free expansions."""

    def __init__(self, mapping: dict[str, str]):
        for key, value in mapping.items():
            if key != key.lower():
                raise ValueError(f"contraction key not lowercase: {key!r}")
            for token in value.lower().split():
                if token in mapping:
                    raise ValueError(f"expansion of {key!r} contains key {token!r}")
        self.mapping = dict(mapping)

    def get(self, token: str) -> str | None:
        return self.mapping.get(token)


_DEFAULT_CONTRACTIONS: ContractionTable | None = None
_REPAIR_RE: re.Pattern | None = None
_REPAIR_MAP: dict[str, str] | None = None


def default_contractions() -> ContractionTable:
    global _DEFAULT_CONTRACTIONS
    if _DEFAULT_CONTRACTIONS is None:
        _DEFAULT_CONTRACTIONS = ContractionTable(_load_data("contractions.json"))
    return _DEFAULT_CONTRACTIONS


def _repair_pattern() -> tuple[re.Pattern, dict[str, str]]:
    global _REPAIR_RE, _REPAIR_MAP
    if _REPAIR_RE is None:
        table = _load_data("unicode_repair.json")
        keys = sorted(table, key=len, reverse=True)
        _REPAIR_RE = re.compile("|".join(re.escape(k) for k in keys))
        _REPAIR_MAP = table
    return _REPAIR_RE, _REPAIR_MAP


def _parse_timestamp(value) -> datetime:
    if not isinstance(value, str):
        raise BadTimestamp(f"timestamp must be a string, got {type(value).__name__}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError as exc:
        raise BadTimestamp(f"unparseable timestamp {value!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=_UTC)
    return ts.astimezone(_UTC).replace(microsecond=0)


def _format_timestamp(ts: datetime) -> str:
    return ts.astimezone(_UTC).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_user_file(data: bytes | str) -> UserTimeline:
    """Parse one per-user JSON file into a sorted timeline.

    Null titles and bodies become empty strings; posts are ordered by
    timestamp with post_id as the tie-break.
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
    if not isinstance(obj, dict) or "user_id" not in obj:
        raise MalformedInput("expected an object with a user_id field")
    user_id = obj["user_id"]
    if not isinstance(user_id, str) or not user_id:
        raise MalformedInput("user_id must be a nonempty string")
    raw_posts = obj.get("posts", [])
    if not isinstance(raw_posts, list):
        raise MalformedInput("posts must be an array")
    posts = []
    for i, entry in enumerate(raw_posts):
        if not isinstance(entry, dict):
            raise MalformedInput(f"posts[{i}] is not an object")
        try:
            post_id = entry["post_id"]
            ts_raw = entry["timestamp"]
        except KeyError as exc:
            raise MalformedInput(f"posts[{i}] missing field {exc.args[0]!r}") from exc
        if not isinstance(post_id, str) or not post_id:
            raise MalformedInput(f"posts[{i}].post_id must be a nonempty string")
        title = entry.get("title")
        body = entry.get("text")
        posts.append(
            RawPost(
                post_id=post_id,
                timestamp=_parse_timestamp(ts_raw),
                title=title if isinstance(title, str) else "",
                body=body if isinstance(body, str) else "",
                is_subject=bool(entry.get("is_subject", True)),
            )
        )
    return UserTimeline(user_id=user_id, posts=posts)


def serialize_user_file(timeline: UserTimeline) -> bytes:
    """Canonical per-user JSON; inverse of :func:`parse_user_file`."""
    obj = {
        "user_id": timeline.user_id,
        "posts": [
            {
                "post_id": p.post_id,
                "timestamp": _format_timestamp(p.timestamp),
                "title": p.title,
                "text": p.body,
                "is_subject": p.is_subject,
            }
            for p in timeline.posts
        ],
    }
    return (json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n").encode("utf-8")


def expand_contractions(text: str, table: ContractionTable | None = None) -> str:
    """Expand word runs found in the table, keeping a leading capital."""
    if table is None:
        table = default_contractions()

    def repl(match: re.Match) -> str:
        token = match.group(0)
        expansion = table.get(token.lower())
        if expansion is None:
            return token
        if token[0].isupper():
            return expansion[0].upper() + expansion[1:]
        return expansion

    return _WORD_RE.sub(repl, text)


def _keep_char(ch: str) -> bool:
    return ch.isalnum() or ch in _KEPT_PUNCT


def _clean_pass(text: str, table: ContractionTable) -> str:
    text = unicodedata.normalize("NFC", text)
    pattern, mapping = _repair_pattern()
    text = pattern.sub(lambda m: mapping[m.group(0)], text)
    text = html.unescape(text)
    text = _URL_RE.sub(" ", text)
    text = expand_contractions(text, table)
    text = "".join(ch if _keep_char(ch) else " " for ch in text)
    return _WS_RE.sub(" ", text).strip()


def clean_text(text: str, table: ContractionTable | None = None) -> str:
    """Run the full cleaning pipeline; total and idempotent.

    Steps in order: NFC normalization with mojibake repair, HTML entity
    decoding, URL removal, contraction expansion, character filtering
    (alphanumerics, space, apostrophe, hyphen, ``. , ! ? &``), whitespace
    collapse. Filtering can expose constructs for earlier steps (for
    example a URL that was wrapped in brackets), so the pass repeats
    until the text is stable.
    """
    if table is None:
        table = default_contractions()
    for _ in range(16):
        cleaned = _clean_pass(text, table)
        if cleaned == text:
            return cleaned
        text = cleaned
    return text


def post_text(post: RawPost) -> str:
    """Downstream text of a cleaned post: title, single space, body."""
    return f"{post.title} {post.body}".strip()


def clean_timeline(timeline: UserTimeline, table: ContractionTable | None = None) -> UserTimeline:
    """Clean title and body of every post independently."""
    if table is None:
        table = default_contractions()
    cleaned = [
        replace(p, title=clean_text(p.title, table), body=clean_text(p.body, table))
        for p in timeline.posts
    ]
    return UserTimeline(user_id=timeline.user_id, posts=cleaned)


def load_labels(data: bytes | str) -> dict[str, int]:
    """Parse a ``user_id<TAB>label`` TSV into a label table."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"not UTF-8: {exc}") from exc
    labels: dict[str, int] = {}
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0]:
            raise MalformedInput(f"line {lineno}: expected user_id<TAB>label")
        user_id, raw = parts
        if raw.strip() not in ("0", "1"):
            raise BadLabel(f"line {lineno}: label must be 0 or 1, got {raw!r}")
        if user_id in labels:
            raise MalformedInput(f"line {lineno}: duplicate user {user_id!r}")
        labels[user_id] = int(raw)
    return labels


def label_counts(labels: dict[str, int]) -> tuple[int, int]:
    """(negative count, positive count)."""
    pos = sum(labels.values())
    return len(labels) - pos, pos


def write_corpus_jsonl(timelines: list[UserTimeline]) -> bytes:
    """Canonical cleaned corpus: one post object per line, LF endings."""
    lines = []
    for tl in timelines:
        for p in tl.posts:
            lines.append(
                json.dumps(
                    {
                        "user_id": tl.user_id,
                        "post_id": p.post_id,
                        "timestamp": _format_timestamp(p.timestamp),
                        "text": post_text(p),
                        "is_subject": p.is_subject,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
            )
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def load_corpus_jsonl(data: bytes | str) -> list[UserTimeline]:
    """Read the canonical JSONL corpus back into timelines.

    The merged post text is stored on ``body``; titles are empty at this
    stage because cleaning already folded them in.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    by_user: dict[str, list[RawPost]] = {}
    order: list[str] = []
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"line {lineno}: invalid JSON: {exc}") from exc
        try:
            user_id = obj["user_id"]
            post = RawPost(
                post_id=obj["post_id"],
                timestamp=_parse_timestamp(obj["timestamp"]),
                title="",
                body=obj.get("text", "") or "",
                is_subject=bool(obj.get("is_subject", True)),
            )
        except KeyError as exc:
            raise MalformedInput(f"line {lineno}: missing field {exc.args[0]!r}") from exc
        if user_id not in by_user:
            by_user[user_id] = []
            order.append(user_id)
        by_user[user_id].append(post)
    return [UserTimeline(user_id=u, posts=by_user[u]) for u in order]
