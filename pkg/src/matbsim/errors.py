"""Exception types shared across the simulator."""


class MatbError(Exception):
    """Base class for all simulator errors."""


class ConfigError(MatbError):
    """Invalid or inconsistent configuration."""


class InsufficientDataError(MatbError):
    """An operation needs more buffered samples than are available."""


class ModelError(MatbError):
    """Model shape or parameter mismatch."""


class TrainingError(MatbError):
    """Training could not start or diverged."""


class PipelineError(MatbError):
    """Workload pipeline received incomplete inputs."""


class AccountingError(MatbError):
    """Internal bookkeeping violated an invariant (e.g. resolved > total)."""


class ReplayDivergence(MatbError):
    """Replay produced an event that differs from the recorded log."""

    def __init__(self, index: int, expected: dict, actual: dict):
        self.index = index
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"replay diverged at event {index}: expected {expected!r}, got {actual!r}"
        )


class ExportError(MatbError):
    """A log is missing the streams required for a dataset export."""
