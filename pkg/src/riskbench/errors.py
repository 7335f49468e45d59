"""Exception hierarchy shared across the toolkit.

Every data-facing failure raises a subclass of :class:`RiskbenchError` so
callers (and the CLI) can distinguish bad input from programming errors.
"""


class RiskbenchError(Exception):
    """Base class for all toolkit errors."""


# --- corpus ---------------------------------------------------------------

class MalformedInput(RiskbenchError):
    """Input bytes do not parse as the expected format."""


class BadTimestamp(MalformedInput):
    """A timestamp string is not valid ISO-8601."""


class DuplicatePost(MalformedInput):
    """Two records share a post id within one user."""


class BadLabel(MalformedInput):
    """A label value outside {0, 1}."""


# --- features -------------------------------------------------------------

class EmptyCorpus(RiskbenchError):
    """TF-IDF fitting requires at least one nonempty document."""


class EmptyTimeline(RiskbenchError):
    """The user has no posts."""


class EmptyInput(RiskbenchError):
    """A statistic was requested over an empty sequence."""


# --- attention / embedding files -------------------------------------------

class BadMagic(MalformedInput):
    """Embedding file does not start with the expected magic bytes."""


class TruncatedFile(MalformedInput):
    """Embedding file ended before the declared records were read."""


class DimMismatch(RiskbenchError):
    """Vector dimensions disagree with the configured dimension."""


class ZeroPosts(RiskbenchError):
    """Attention aggregation requires at least one post."""


# --- model ------------------------------------------------------------------

class SingleClass(RiskbenchError):
    """Both classes must be present."""


class DegenerateSplit(RiskbenchError):
    """Train/validation split left one side unusable."""


class LengthMismatch(RiskbenchError):
    """Aligned sequences have different lengths."""


class OutOfRange(RiskbenchError):
    """A value fell outside its documented range."""


# --- stream -------------------------------------------------------------------

class ScorerFailure(RiskbenchError):
    """The scoring callback raised; carries user and round context."""

    def __init__(self, user_id: str, round_no: int, cause: BaseException):
        super().__init__(f"scorer failed for user {user_id!r} at round {round_no}: {cause!r}")
        self.user_id = user_id
        self.round_no = round_no
        self.cause = cause


class MissingLabel(RiskbenchError):
    """A scored user has no entry in the label table."""


# --- pilot ---------------------------------------------------------------------

class SchemaViolation(MalformedInput):
    """Transcript JSON violates the schema; carries the offending path."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class StateRegression(SchemaViolation):
    """Assessment states moved backwards between turns."""


class MissingItem(SchemaViolation):
    """A BDI item is missing from a turn's score block."""


class UnmappedSymptom(RiskbenchError):
    """A raw symptom string could not be normalized."""

    def __init__(self, raw: str):
        super().__init__(f"no canonical symptom for {raw!r}")
        self.raw = raw


class UnknownLabel(RiskbenchError):
    """A classification label outside the known enumeration."""


class DegenerateX(RiskbenchError):
    """Regression inputs have zero variance or too few points."""


class InsufficientModels(RiskbenchError):
    """Agreement statistics need at least two models."""


class MissingPersona(RiskbenchError):
    """Predictions do not cover every gold persona."""


class UnnormalizedInput(RiskbenchError):
    """Symptom hit rate expects canonical symptom names."""
