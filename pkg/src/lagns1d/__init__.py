"""Mild solutions of the 1D Lagrangian compressible Navier-Stokes system with rough data."""

from .errors import (
    ConfigurationError,
    DivergenceError,
    InsufficientDataError,
    InvariantError,
    LagNSError,
    NoAntiderivativeError,
    PositivityError,
    PropagationError,
    TruncationError,
)
from .grid import Field, Grid, TimeLadder, Trajectory

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DivergenceError",
    "Field",
    "Grid",
    "InsufficientDataError",
    "InvariantError",
    "LagNSError",
    "NoAntiderivativeError",
    "PositivityError",
    "PropagationError",
    "TimeLadder",
    "Trajectory",
    "TruncationError",
]
