"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`CircSpecError`, so callers (and the CLI) can map failures to exit
codes without catching unrelated exceptions.
"""


class CircSpecError(Exception):
    """Base class for library errors."""

    exit_code = 1


class InvalidParameterError(CircSpecError, ValueError):
    """Malformed parameters, dimensions or configuration."""

    exit_code = 2


class NumericalError(CircSpecError, ArithmeticError):
    exit_code = 3


class SingularCovarianceError(NumericalError):
    """A covariance that must be positive definite is (numerically) singular.

    Attributes
    ----------
    rank : int
        Numerical rank of the covariance.
    directions : tuple of int
        Zero-based coordinates whose variance is below the determinism
        threshold, i.e. coordinates that are (near) constant.
    forced_values : tuple of float
        Mean value of each coordinate in ``directions``.
    """

    def __init__(self, message, rank=None, directions=(), forced_values=()):
        super().__init__(message)
        self.rank = rank
        self.directions = tuple(int(d) for d in directions)
        self.forced_values = tuple(float(v) for v in forced_values)

    def to_dict(self):
        return {
            "rank": self.rank,
            "directions": list(self.directions),
            "forced_values": list(self.forced_values),
        }


class SingularComponentError(SingularCovarianceError):
    """A mixture component has zero variance."""


class NotPSDError(NumericalError):
    """Matrix has a pivot below the negative tolerance."""


class UnsupportedMeanError(NumericalError):
    """The requested density is only available for zero mean."""


class AccuracyError(NumericalError):
    """Quadrature failed to reach the requested tolerance.

    ``estimate`` and ``error`` hold the best result obtained.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class InsufficientDataError(NumericalError, ValueError):
    pass


class CapacityError(CircSpecError):
    """Requested work exceeds a configured cap (factorial terms, memory)."""

    exit_code = 4
