"""Heat kernel K_nu(t, x) = (4 pi nu t)**-0.5 exp(-x**2 / (4 nu t)) and its derivatives.

Closed-form samples use Hermite polynomials; convolutions act on the
Fourier side with the exact symbol, so they are periodic and satisfy the
semigroup law to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import hermite

from .audit import EstimateAudit
from .errors import ConfigurationError, TruncationError
from .grid import Field, Grid
from .norms import l1_norm_resolved, lp_norm, sup_norm_resolved


@dataclass(frozen=True)
class KernelQuery:
    """``d_t**j d_x**m K_nu(t, .)`` with diffusivity ``nu``."""

    t: float
    j: int = 0
    m: int = 0
    diffusivity: float = 1.0

    def __post_init__(self):
        if not self.t > 0:
            raise ConfigurationError(f"kernel time must be positive, got {self.t}")
        if self.j not in (0, 1, 2) or self.m not in (0, 1, 2):
            raise ConfigurationError(f"derivative orders must lie in {{0,1,2}}, got j={self.j}, m={self.m}")
        if not self.diffusivity > 0:
            raise ConfigurationError(f"diffusivity must be positive, got {self.diffusivity}")

    @property
    def width(self) -> float:
        return math.sqrt(2.0 * self.diffusivity * self.t)

    def symbol(self, xi):
        nu = self.diffusivity
        return (-nu * xi**2) ** self.j * (1j * xi) ** self.m * np.exp(-nu * self.t * xi**2)


def _guard(q: KernelQuery, grid: Grid):
    if q.width > grid.L / 6.0:
        raise TruncationError(
            f"kernel width sqrt(2 nu t) = {q.width:.4g} exceeds L/6 = {grid.L / 6:.4g}; enlarge L or shorten t"
        )


def kernel_values(q: KernelQuery, x) -> np.ndarray:
    """Closed-form ``d_t**j d_x**m K_nu(t, x)`` at arbitrary points on the line."""
    nu, t = q.diffusivity, q.t
    k = 2 * q.j + q.m
    s = 4.0 * nu * t
    z = np.asarray(x, dtype=float) / math.sqrt(s)
    c = np.zeros(k + 1)
    c[k] = 1.0
    pref = nu**q.j * (math.pi * s) ** -0.5 * s ** (-k / 2.0) * (-1.0) ** k
    return pref * hermite.hermval(z, c) * np.exp(-(z**2))


def kernel_field(q: KernelQuery, grid: Grid) -> Field:
    _guard(q, grid)
    return Field(grid, kernel_values(q, grid.x))


def heat_convolve(q: KernelQuery, f: Field) -> Field:
    """Periodic convolution of ``f`` with ``d_t**j d_x**m K_nu(t)``."""
    _guard(q, f.grid)
    grid = f.grid
    sym = q.symbol(grid.xi)
    if q.m % 2:
        sym[-1] = 0.0
    out = np.fft.irfft(np.fft.rfft(f.values) * sym, n=grid.n)
    return Field(grid, out)


def fractional_apply(f: Field, b: float) -> Field:
    """Fourier multiplier ``|xi|**b``; the zero mode is dropped."""
    if not -1.0 < b < 1.0 or b == 0.0:
        raise ConfigurationError(f"fractional order must lie in (-1, 1) without 0, got {b}")
    scale = float(np.max(np.abs(f.values))) if f.values.size else 0.0
    if b < 0 and abs(f.mean()) > 1e-10 * max(scale, 1e-300):
        raise ConfigurationError(f"negative-order multiplier needs a mean-zero field, mean = {f.mean():.3e}")
    xi = f.grid.xi
    sym = np.zeros_like(xi)
    sym[1:] = xi[1:] ** b
    return Field(f.grid, np.fft.irfft(np.fft.rfft(f.values) * sym, n=f.grid.n))


def kernel_norm(q: KernelQuery, grid: Grid, p: float) -> float:
    """L^p norm of a kernel sample; L^1 and L^inf are taken from the interpolant."""
    f = kernel_field(q, grid)
    if p == 1:
        return l1_norm_resolved(f)
    if math.isinf(p):
        return sup_norm_resolved(f)
    return lp_norm(f, p)


def pointwise_ratio(q: KernelQuery, grid: Grid) -> float:
    """``sup_x |d_t**j d_x**m K(t,x)| (t**0.5 + |x|)**(1+2j+m)`` at the grid nodes."""
    f = kernel_field(q, grid)
    w = (math.sqrt(q.t) + np.abs(grid.x)) ** (1 + 2 * q.j + q.m)
    return float(np.max(np.abs(f.values) * w))


def kernel_bound_audit(t_list, p_list, grid: Grid, diffusivity: float = 1.0, gaps=None) -> EstimateAudit:
    """Measured constants for the kernel size, pointwise and time-difference bounds.

    Rows carry ``kind`` in {"Lp", "pointwise", "time_difference"}. The L^p
    rows compare against ``t**(-j + (1/p - 1 - m)/2)``; the time-difference
    rows measure ``||K(t+a) - K(t)||_{L^1} / min(1, a/t)`` over ``a/t`` in
    ``gaps`` (default 0.01 .. 10).
    """
    if gaps is None:
        gaps = (0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0)
    audit = EstimateAudit("kernel_bounds", {"L": grid.L, "n": grid.n, "diffusivity": diffusivity})
    for t in t_list:
        if not 0.0 < t <= 1.0:
            raise ConfigurationError(f"audit times must lie in (0, 1], got {t}")
        for j in (0, 1, 2):
            for m in (0, 1, 2):
                q = KernelQuery(t, j, m, diffusivity)
                for p in p_list:
                    inv_p = 0.0 if math.isinf(p) else 1.0 / p
                    power = t ** (-j + 0.5 * (inv_p - 1.0 - m))
                    audit.add(kernel_norm(q, grid, p) / power, kind="Lp", t=t, j=j, m=m, p=float(p))
                audit.add(pointwise_ratio(q, grid), kind="pointwise", t=t, j=j, m=m)
        for r in gaps:
            a = r * t
            try:
                k1 = kernel_field(KernelQuery(t + a, 0, 0, diffusivity), grid)
            except TruncationError:
                audit.grid.setdefault("skipped_time_difference", []).append([t, r])
                continue
            k0 = kernel_field(KernelQuery(t, 0, 0, diffusivity), grid)
            audit.add(l1_norm_resolved(k1 - k0) / min(1.0, r), kind="time_difference", t=t, a_over_t=r)
    return audit
