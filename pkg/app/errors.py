"""
Error hierarchy for the recommender.

Every error carries the process exit code the commands map it to:
0 success, 2 usage/config, 3 data/format, 4 numeric failure.
"""


class RecommenderError(Exception):
    """Base class for all recommender errors."""
    exit_code = 1


class ConfigError(RecommenderError, ValueError):
    """Invalid configuration value, parameter range or mode."""
    exit_code = 2


class UsageError(RecommenderError):
    """Invalid command-line usage (bad ids, existing output, ...)."""
    exit_code = 2


class DataError(RecommenderError):
    """Base class for data and file-format problems."""
    exit_code = 3


class IngestionError(DataError):
    """Edge endpoint outside the declared user/item range."""


class ParseError(DataError):
    """Malformed line in a text input file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)
        self.line = line


class FormatError(DataError):
    """Malformed binary matrix file."""


class ValidationError(DataError):
    """Dataset bundle failed its validation pass."""


class CheckpointError(DataError):
    """Checkpoint is missing pieces or does not match the data."""


class MissingFileError(DataError):
    """A required input file does not exist."""


class SamplingError(DataError):
    """Negative sampling could not find an unobserved item."""


class ShapeError(RecommenderError, ValueError):
    """Operand dimensions do not match."""
    exit_code = 3


class NumericError(RecommenderError):
    """Non-finite values or other numeric failure."""
    exit_code = 4


class DomainError(NumericError):
    """Argument outside the mathematical domain of an operation."""


class StateError(NumericError):
    """Optimizer or parameter state is incomplete."""
