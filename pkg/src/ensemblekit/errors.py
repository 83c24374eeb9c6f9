"""Exception hierarchy shared across the package."""


class EnsembleKitError(Exception):
    """Base class for all package errors."""


class FormatError(EnsembleKitError):
    """Malformed on-disk artifact (EMB file, labels TSV, model blob)."""


class BadMagic(FormatError):
    pass


class UnsupportedVersion(FormatError):
    pass


class UnsupportedDtype(FormatError):
    pass


class Truncated(FormatError):
    pass


class NonFiniteValue(FormatError):
    def __init__(self, row, col):
        super().__init__(f"non-finite value at row {row}, column {col}")
        self.row = row
        self.col = col


class DataError(EnsembleKitError):
    """Inconsistent in-memory data (ids, labels, shapes)."""


class DuplicateId(DataError):
    pass


class MissingSample(DataError):
    pass


class ExtraSample(DataError):
    pass


class BadLabel(DataError):
    pass


class BadSplit(DataError):
    pass


class EmptySplit(DataError):
    pass


class TrainingError(EnsembleKitError):
    """Non-finite loss or otherwise unusable training state."""
