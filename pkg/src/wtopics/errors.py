"""
Exception hierarchy for wtopics.

Every error belongs to one of three families. The family fixes the CLI exit
code so harnesses can tell a bad config from bad data from a failed fit:

- ConfigError    -> exit 2
- DataError      -> exit 3
- InferenceError -> exit 4
"""

from typing import List, Optional, Tuple


class WtopicsError(Exception):
    """Base class for all wtopics errors."""

    exit_code: int = 1


class ConfigError(WtopicsError, ValueError):
    """Invalid or inconsistent configuration."""

    exit_code = 2


class DataError(WtopicsError, ValueError):
    """Input data violates a model or corpus invariant."""

    exit_code = 3


class InferenceError(WtopicsError, RuntimeError):
    """Sampling or posterior processing failed."""

    exit_code = 4


# Corpus
class EmptyVocabulary(DataError):
    pass


class NonPositiveWeight(DataError):
    pass


class EmptyCorpus(DataError):
    pass


# Model
class DimensionMismatch(DataError):
    pass


class DomainError(DataError):
    pass


class DegenerateDocument(DataError):
    pass


class NonFinite(InferenceError, ValueError):
    pass


# Hierarchical model
class MissingCovariate(DataError):
    pass


class UnknownLevel(DataError):
    pass


# Inference / posterior
class InsufficientDraws(InferenceError):
    pass


class AllDivergent(InferenceError):
    pass


class CapReached(InferenceError):
    """Topic-count rule never triggered before the cap."""

    def __init__(self, message: str, trace: Optional[List[Tuple[int, float]]] = None):
        super().__init__(message)
        self.trace = trace or []


# Simulation study
class InfeasibleDesign(ConfigError):
    pass


class InvalidInterval(DataError):
    pass
