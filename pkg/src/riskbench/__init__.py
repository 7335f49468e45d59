"""riskbench: early depression-risk detection and assessment analytics.

Submodules: corpus (ingestion and cleaning), features (engineered
features), attention (embedding aggregation), model (SGD logistic model
and soft voting), stream (round-based simulation and metrics), pilot
(conversational assessment analytics), cli (batch workflows).
"""

__version__ = "0.1.0"

from . import attention, corpus, errors, features, model, pilot, stream  # noqa: F401
