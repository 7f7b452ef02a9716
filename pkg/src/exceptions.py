"""Error hierarchy shared by every protomatch component.

Each error carries the process exit code the CLI reports for it.
"""


class ProtoMatchError(Exception):
    """Base class for all protomatch errors."""

    exit_code: int = 1


# ─── Configuration & I/O ────────────────────────────────────────────────────


class ConfigError(ProtoMatchError, ValueError):
    """Invalid or infeasible configuration."""

    exit_code = 2


class FileError(ProtoMatchError, OSError):
    """File could not be read, written, or is a malformed archive."""

    exit_code = 5


# ─── Data ───────────────────────────────────────────────────────────────────


class DataError(ProtoMatchError, ValueError):
    """Corpus or manifest problem."""

    exit_code = 3


class ParseError(DataError):
    """A corpus or manifest file is empty or does not parse."""


class ManifestError(DataError):
    """A sample label is not declared by the manifest, or the manifest is inconsistent."""


class SplitViolationError(DataError):
    """An OOD-labeled sample appears in the train or validation split."""


class SamplingError(DataError):
    """Few-shot sampling asked for more samples than a class has."""


# ─── Training ───────────────────────────────────────────────────────────────


class DivergenceError(ProtoMatchError, ArithmeticError):
    """Training produced a non-finite loss."""

    exit_code = 4

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class OptimizerError(ProtoMatchError, ValueError):
    """Optimizer misuse, e.g. a trainable parameter without a gradient."""

    exit_code = 6


class ScheduleError(ProtoMatchError, ValueError):
    """Learning-rate schedule queried outside its range."""

    exit_code = 6


# ─── Numerics ───────────────────────────────────────────────────────────────


class NumericsError(ProtoMatchError):
    """Base class for tensor-level failures."""

    exit_code = 6


class DimensionError(NumericsError, ValueError):
    """Operand shapes do not agree."""


class ShapeError(NumericsError, ValueError):
    """A tensor has the wrong rank or shape for the operation."""


class DegenerateVectorError(NumericsError, ValueError):
    """A vector has (near) zero norm where a direction is required."""


class UsageError(NumericsError, RuntimeError):
    """A tape was used outside its contract, e.g. consumed twice."""


class NumericError(NumericsError, ArithmeticError):
    """A value that must be finite is not."""


class TargetIndexError(NumericsError, IndexError):
    """A class index is outside [0, K)."""


class VocabError(NumericsError, IndexError):
    """A token id is outside the vocabulary."""


class LengthError(NumericsError, ValueError):
    """A sequence is empty or longer than the model accepts."""


# ─── Evaluation ─────────────────────────────────────────────────────────────


class StateError(ProtoMatchError, RuntimeError):
    """An operation was called on an empty or unready object."""

    exit_code = 6


class MetricUndefinedError(ProtoMatchError, ValueError):
    """A metric is undefined for the given samples (e.g. no ID or no OOD rows)."""

    exit_code = 6


class CompatibilityError(ProtoMatchError, ValueError):
    """Two artifacts (model, bank, checkpoint) do not fit together."""

    exit_code = 6
