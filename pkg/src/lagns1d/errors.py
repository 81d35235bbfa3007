"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: configuration problems exit 2,
numerical divergence exits 3, broken invariants exit 4.
"""


class LagNSError(Exception):
    """Base class for all package errors."""


class ConfigurationError(LagNSError, ValueError):
    """A parameter or generator spec is outside its admissible range."""


class InsufficientDataError(LagNSError, ValueError):
    """Not enough time nodes to evaluate a weighted norm."""


class TruncationError(LagNSError, ValueError):
    """The heat kernel is too wide for the periodic box."""


class NoAntiderivativeError(LagNSError, ValueError):
    """A field with nonzero mean has no periodic antiderivative."""


class PositivityError(LagNSError, ArithmeticError):
    """The specific volume dropped below the admissible lower bound."""

    def __init__(self, message, t=None, x=None):
        super().__init__(message)
        self.t = t
        self.x = x


class PropagationError(LagNSError, ArithmeticError):
    """A NaN or Inf appeared in a forcing or iterate."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class DivergenceError(LagNSError, ArithmeticError):
    """The fixed-point iteration stopped contracting.

    Carries the data size and a suggested shorter window.
    """

    def __init__(self, message, data_size=None, suggested_T=None, state=None):
        super().__init__(message)
        self.data_size = data_size
        self.suggested_T = suggested_T
        self.state = state


class InvariantError(LagNSError, AssertionError):
    """A post-condition of a successful solve failed."""
