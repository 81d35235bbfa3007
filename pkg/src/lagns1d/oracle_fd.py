"""Staggered finite-difference solver used only to cross-check the mild solvers.

Velocity lives at the nodes x_i, volume and temperature at the cell
centres x_i + h/2. Each step updates v explicitly from the new-free
velocity, then solves the viscous (and for the full system the heat)
equation implicitly with a cyclic tridiagonal solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigurationError, PositivityError
from .grid import Field, Grid


@dataclass(frozen=True)
class FDConfig:
    T: float
    dt: Optional[float] = None

    def step(self, grid: Grid) -> tuple[float, int]:
        """Step size (at most h/4) adjusted to land exactly on T."""
        if not self.T >= 0:
            raise ConfigurationError(f"end time must be nonnegative, got {self.T}")
        cap = grid.h / 4.0
        dt = cap if self.dt is None else self.dt
        if not 0 < dt <= cap * (1 + 1e-12):
            raise ConfigurationError(f"time step must lie in (0, h/4 = {cap:.4g}], got {dt}")
        if self.T == 0:
            return dt, 0
        steps = int(np.ceil(self.T / dt - 1e-12))
        return self.T / steps, steps


def solve_cyclic(lower, diag, upper, rhs):
    """Solve a periodic tridiagonal system.

    Row i reads ``lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]``
    with indices modulo n; the corner entries are handled by Sherman-Morrison.
    """
    n = diag.size
    gamma = -diag[0]
    d = diag.copy()
    d[0] -= gamma
    d[-1] -= lower[0] * upper[-1] / gamma
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = d
    ab[2, :-1] = lower[1:]
    y = solve_banded((1, 1), ab, rhs)
    uvec = np.zeros(n)
    uvec[0] = gamma
    uvec[-1] = upper[-1]
    z = solve_banded((1, 1), ab, uvec)
    # v = (1, 0, ..., 0, lower[0] / gamma)
    vy = y[0] + lower[0] / gamma * y[-1]
    vz = z[0] + lower[0] / gamma * z[-1]
    return y - z * (vy / (1.0 + vz))


def _viscous_solve(u, v, mu, dt, h, forcing):
    """Implicit ``u_new - dt d_x(mu/v d_x u_new) = u + dt forcing`` with v on cells."""
    a = mu / v  # cell coefficient, cell i sits between nodes i and i+1
    a_left = np.roll(a, 1)
    r = dt / h**2
    return solve_cyclic(-r * a_left, 1.0 + r * (a + a_left), -r * a, u + dt * forcing)


def _check(v, t, grid):
    i = int(np.argmin(v))
    if v[i] <= 0:
        raise PositivityError(f"FD volume lost positivity at t = {t:.6g}, x = {grid.x[i] + grid.h / 2:.6g}", t=t, x=grid.x[i])


def cell_values(f: Field) -> np.ndarray:
    """Point values of a smooth field at the cell centres, via the interpolant."""
    from .spectral import shift

    return shift(f.values, f.grid, f.grid.h / 2)


def fd_solve_isentropic(v0: Field, u0: Field, params, cfg: FDConfig):
    """Return ``(v, u)`` at ``cfg.T``: v at cell centres, u at nodes."""
    grid = u0.grid
    h = grid.h
    dt, steps = cfg.step(grid)
    v = cell_values(v0)
    u = u0.values.copy()
    if v.min() < 0.5:
        raise ConfigurationError(f"FD oracle needs inf v0 >= 1/2, got {v.min():.4g}")
    for s in range(steps):
        v = v + dt * (np.roll(u, -1) - u) / h
        _check(v, (s + 1) * dt, grid)
        p = params.p(v)
        u = _viscous_solve(u, v, params.mu, dt, h, -(p - np.roll(p, 1)) / h)
    return v, u


def fd_solve_full(v0: Field, u0: Field, th0: Field, params, cfg: FDConfig):
    """Return ``(v, u, theta)`` at ``cfg.T``; v and theta at cell centres."""
    grid = u0.grid
    h = grid.h
    dt, steps = cfg.step(grid)
    v = cell_values(v0)
    th = cell_values(th0)
    u = u0.values.copy()
    K, c, mu, kappa = params.K_gas, params.c_heat, params.mu, params.kappa
    if v.min() < 0.5:
        raise ConfigurationError(f"FD oracle needs inf v0 >= 1/2, got {v.min():.4g}")
    r = dt / h**2
    for s in range(steps):
        v = v + dt * (np.roll(u, -1) - u) / h
        _check(v, (s + 1) * dt, grid)
        P = K * th / v
        u = _viscous_solve(u, v, mu, dt, h, -(P - np.roll(P, 1)) / h)
        ux = (np.roll(u, -1) - u) / h
        heat = (-P * ux + mu * ux**2 / v) / c
        # conductivity on the node between cells i and i+1, with v averaged
        b = (kappa / c) / (0.5 * (v + np.roll(v, -1)))
        b_left = np.roll(b, 1)
        th = solve_cyclic(-r * b_left, 1.0 + r * (b + b_left), -r * b, th + dt * heat)
    return v, u, th
