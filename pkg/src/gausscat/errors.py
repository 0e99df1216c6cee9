"""Exception hierarchy shared by every gausscat module."""


class GaussCatError(Exception):
    """Base class for all library errors."""


class NonSymmetricError(GaussCatError, ValueError):
    pass


class NumericalFailure(GaussCatError, ArithmeticError):
    pass


class DimensionMismatch(GaussCatError, ValueError):
    pass


class BadModeIndex(GaussCatError, IndexError):
    pass


class HasCrossCorrelations(GaussCatError, ValueError):
    """The state carries x-p correlations and is outside the block class.

    ``max_entry`` is the largest offending coupling entry.
    """

    def __init__(self, max_entry: float):
        self.max_entry = max_entry
        super().__init__(
            f"state has cross-quadrature correlations (max |<x p>| = {max_entry:.3e})"
        )


class ZNotPositiveDefinite(GaussCatError, ValueError):
    pass


class DomainError(GaussCatError, ValueError):
    pass


class NotPure(GaussCatError, ValueError):
    pass


class Unphysical(GaussCatError, ValueError):
    """Covariance matrix violates the uncertainty principle."""

    def __init__(self, nu_minus: float, message: str | None = None):
        self.nu_minus = nu_minus
        super().__init__(message or f"unphysical state: smallest symplectic eigenvalue {nu_minus:.12g} < 1")


class DegenerateGeometry(GaussCatError, ValueError):
    pass


class RegimeViolation(GaussCatError, ValueError):
    pass


class NoFeasiblePoint(GaussCatError, RuntimeError):
    pass


class UnsupportedClass(GaussCatError, ValueError):
    pass


class BadBracket(GaussCatError, ValueError):
    pass


class SpecParseError(GaussCatError, ValueError):
    """A state description document could not be parsed."""
