"""Exception hierarchy shared by the solvers and the command-line front end."""


class BioheatError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(BioheatError, ValueError):
    """Invalid scenario configuration or parameter value."""

    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class OutOfRangeError(BioheatError, OverflowError):
    """A physical quantity left the representable floating-point range."""


class SingularityError(BioheatError, ValueError):
    """Evaluation requested at a point where the solution is singular."""


class ConvergenceError(BioheatError, RuntimeError):
    """A numerical procedure failed to reach its tolerance.

    ``residual`` carries the last error estimate, ``evaluations`` the
    number of panels / subdivisions / steps spent.
    """

    def __init__(self, message, residual=float("nan"), evaluations=0):
        super().__init__(f"{message} (residual estimate {residual:.3e} after {evaluations})")
        self.detail = message
        self.residual = residual
        self.evaluations = evaluations


class DivergenceError(ConvergenceError):
    """The explicit time stepper produced a non-finite temperature."""


class StabilityError(BioheatError, ValueError):
    """Grid parameters violate the explicit-scheme stability bound."""


class UnsupportedCombinationError(BioheatError, ValueError):
    """The requested (method, source) pair is not implemented."""
