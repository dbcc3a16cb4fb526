"""Exception hierarchy shared across the toolkit."""


class EmoppgError(Exception):
    """Base class for all toolkit errors."""


class InvalidBand(EmoppgError):
    """Bandpass edges are out of order or outside (0, Nyquist)."""


class SignalTooShort(EmoppgError):
    """Signal has too few samples for the requested filter."""


class InsufficientData(EmoppgError):
    """Not enough rows/intervals to compute the requested statistic."""


class SchemaError(EmoppgError):
    """A CSV file does not match its declared schema."""

    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"{message} (row {row})")
        self.row = row


class NonFinite(SchemaError):
    """A CSV value parsed to NaN or infinity."""


class ClassTooSmall(EmoppgError):
    """A class has fewer rows than a stratified split requires."""


class DegenerateLabels(EmoppgError):
    """Training labels contain fewer than two classes."""


class EmptyDataset(EmoppgError):
    """Training data contains no rows."""


class DimensionMismatch(EmoppgError):
    """Feature vector length does not match the model."""


class CorruptFile(EmoppgError):
    """Model file is truncated or fails integrity checks."""


class VersionMismatch(EmoppgError):
    """Model file was written by an unsupported format version."""


class MalformedTree(EmoppgError):
    """Tree structure violates its invariants (dangling child, bad leaf)."""


class LengthMismatch(EmoppgError):
    """Parallel arrays have different lengths."""


class Empty(EmoppgError):
    """An operation that requires at least one element got none."""


class NoProbes(EmoppgError):
    """Benchmark called without probe rows."""


class InvalidProfile(EmoppgError):
    """Synthesis profile violates its physiological bounds."""
