"""Periodic grid, sampled fields, graded time ladders and trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class Grid:
    """Uniform grid on the torus [-L, L) with ``n`` points, n a power of two."""

    L: float
    n: int

    def __post_init__(self):
        if self.n < 16 or self.n & (self.n - 1):
            raise ConfigurationError(f"grid size must be a power of two >= 16, got {self.n}")
        if not self.L > 0:
            raise ConfigurationError(f"half width must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.L + self.h * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def xi(self) -> np.ndarray:
        """Angular wavenumbers of the real FFT, ``2*pi*k/(2L)``."""
        xi = 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.h)
        xi.flags.writeable = False
        return xi

    def wrap(self, x):
        """Signed periodic representative of ``x`` in [-L, L)."""
        return np.mod(np.asarray(x) + self.L, 2.0 * self.L) - self.L

    def __repr__(self):
        return f"Grid(L={self.L:g}, n={self.n})"


class Field:
    """Samples ``v_i ~ f(x_i)`` of a real function on a :class:`Grid`.

    Immutable: the value array is marked read-only.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        values = np.array(values, dtype=float)
        if values.shape != (grid.n,):
            raise ConfigurationError(f"expected {grid.n} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("field contains NaN or Inf")
        values.flags.writeable = False
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n))

    @classmethod
    def constant(cls, grid, c):
        return cls(grid, np.full(grid.n, float(c)))

    def mean(self) -> float:
        return float(np.mean(self.values))

    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ConfigurationError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __repr__(self):
        return f"Field({self.grid!r}, max|v|={np.max(np.abs(self.values)):.3e})"


@dataclass(frozen=True)
class TimeLadder:
    """Graded time nodes ``t_k = T (k/K)**q`` on [0, T]."""

    T: float
    K: int
    q: float = 3.0
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.T <= 1.0:
            raise ConfigurationError(f"horizon must lie in (0, 1], got {self.T}")
        if self.K < 2:
            raise ConfigurationError(f"need at least 2 time steps, got K={self.K}")
        if self.q < 2:
            raise ConfigurationError(f"grading exponent must be >= 2, got q={self.q}")
        nodes = self.T * (np.arange(self.K + 1) / self.K) ** self.q
        nodes[-1] = self.T
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)

    def __len__(self):
        return self.K + 1

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)


class Trajectory:
    """One field per ladder node, stored as a ``(K+1, n)`` array."""

    __slots__ = ("ladder", "grid", "data")

    def __init__(self, ladder: TimeLadder, grid: Grid, data):
        data = np.array(data, dtype=float)
        if data.shape != (len(ladder), grid.n):
            raise ConfigurationError(
                f"trajectory shape {data.shape} does not match ({len(ladder)}, {grid.n})"
            )
        data.flags.writeable = False
        self.ladder = ladder
        self.grid = grid
        self.data = data

    @classmethod
    def from_fields(cls, ladder, fields: Sequence[Field]):
        if len(fields) != len(ladder):
            raise ConfigurationError(f"need {len(ladder)} fields, got {len(fields)}")
        grid = fields[0].grid
        if any(f.grid != grid for f in fields):
            raise ConfigurationError("all fields of a trajectory must share one grid")
        return cls(ladder, grid, np.stack([f.values for f in fields]))

    @classmethod
    def zeros(cls, ladder, grid):
        return cls(ladder, grid, np.zeros((len(ladder), grid.n)))

    @classmethod
    def constant_in_time(cls, ladder, f: Field):
        return cls(ladder, f.grid, np.broadcast_to(f.values, (len(ladder), f.grid.n)))

    @property
    def times(self) -> np.ndarray:
        return self.ladder.nodes

    def field(self, k) -> Field:
        return Field(self.grid, self.data[k])

    def __len__(self):
        return self.data.shape[0]

    def __iter__(self) -> Iterator[Field]:
        for k in range(len(self)):
            yield self.field(k)

    def with_data(self, data):
        return Trajectory(self.ladder, self.grid, data)

    def _other(self, other):
        if isinstance(other, Trajectory):
            if other.grid != self.grid or other.ladder != self.ladder:
                raise ConfigurationError("trajectories do not share grid and ladder")
            return other.data
        if isinstance(other, Field):
            return other.values
        return other

    def __add__(self, other):
        return self.with_data(self.data + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_data(self.data - self._other(other))

    def __rsub__(self, other):
        return self.with_data(self._other(other) - self.data)

    def __mul__(self, other):
        return self.with_data(self.data * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_data(-self.data)

    def __repr__(self):
        return f"Trajectory({self.grid!r}, K={self.ladder.K}, T={self.ladder.T:g})"
