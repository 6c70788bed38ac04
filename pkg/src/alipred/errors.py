"""Exception types shared across the package."""


class AlipredError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(AlipredError):
    """Schema sidecar is malformed or internally inconsistent."""


class DataValidationError(AlipredError):
    """A record or cell violates the dataset schema.

    ``kind`` is one of "unknown_feature", "missing_required", "type_mismatch",
    "invariant" so callers (CLI exit codes, HTTP status mapping) can
    distinguish without parsing the message.
    """

    def __init__(self, message, row=None, column=None, kind="invariant"):
        super().__init__(message)
        self.row = row
        self.column = column
        self.kind = kind


class RankDeficiencyError(AlipredError):
    """Design matrix has linearly dependent columns; names the dependent set."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class ConvergenceError(AlipredError):
    """Iterative solver exhausted its iteration cap before tolerance."""

    def __init__(self, message, achieved_loss=None, gap_estimate=None):
        super().__init__(message)
        self.achieved_loss = achieved_loss
        self.gap_estimate = gap_estimate


class TrainingError(AlipredError):
    """Training preconditions not met (class balance, population size, config)."""


class ArtifactError(AlipredError):
    """Model artifact file is missing, corrupt, or version-incompatible."""
