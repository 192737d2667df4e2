"""Exception types raised across the package."""


class RiskRankError(Exception):
    """Base class for all package errors."""


class OntologyError(RiskRankError, ValueError):
    """Malformed ontology (cycle, multiple parents, unreachable node)."""


class UnknownConceptError(RiskRankError, KeyError):
    """Concept is not a node of the ontology it was looked up in."""


class DimensionMismatchError(RiskRankError, ValueError):
    """Situations or ontologies disagree on the dimension set."""


class CorpusError(RiskRankError, ValueError):
    """Corpus is empty or inconsistent with a document or query."""


class EmptyClickSetError(RiskRankError, ValueError):
    """An interest vector was requested from zero clicked documents."""


class EmptyCaseBaseError(RiskRankError, LookupError):
    """Nearest-case retrieval on an empty case base."""


class EmptyCriticalSetError(RiskRankError, LookupError):
    """An operation needs at least one critical situation."""


class InsufficientDataError(RiskRankError):
    """Not enough recommendation history for CTR statistics."""


class NoRiskEstimateError(RiskRankError):
    """Every risk estimator was unavailable."""


class FeedbackError(RiskRankError, ValueError):
    """Feedback refers to documents that were not shown."""


class ConfigError(RiskRankError, ValueError):
    """Invalid configuration or scenario file."""
