"""Exception hierarchy shared across the package."""

from __future__ import annotations


class DirtygenError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DirtygenError):
    """Invalid, contradictory, or infeasible run configuration."""


class LexiconError(ConfigError):
    """A lexicon could not be resolved, read, or is empty."""


class GenerationError(DirtygenError):
    """Value generation or error injection failed at run time."""


class PlanError(GenerationError):
    """The error plan could not satisfy its exact target counts."""


class DatasetFormatError(DirtygenError):
    """A dataset or error-log file does not conform to its documented format."""


class EvaluationError(DirtygenError):
    """Scoring inputs are malformed or misaligned."""
