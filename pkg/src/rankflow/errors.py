"""Exception types shared across the package."""


class RankflowError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(RankflowError):
    """Operands have incompatible shapes or ambient dimensions."""


class KindMismatchError(RankflowError):
    """A coupling spec of the wrong kind (scalar vs matrix, constant vs not)."""


class NumericalFailureError(RankflowError):
    """A numerical routine failed: SVD non-convergence, overflow, or an
    integration step that blew up or underflowed.  ``time`` carries the
    simulation time of the failure when one is known."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class AsymmetricMatrixError(RankflowError):
    """An input required to be symmetric deviates beyond tolerance."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class DegenerateInputError(RankflowError):
    """Input is degenerate for the requested operation (e.g. zero initial state)."""


class RankNotConstantError(RankflowError):
    """The trajectory rank changes, so a fixed-rank diagnostic is undefined."""


class ScenarioError(RankflowError):
    """A scenario file is malformed, inconsistent, or references unknown items."""
