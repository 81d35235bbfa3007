"""Norms on sampled fields and time-weighted norms on trajectories.

Spatial norms use the rectangle rule on the torus. The time-weighted
norms combine ``sup_t t**sigma ||f(t)||`` with the weighted Hoelder quotient
``sup_{s<t} s**(sigma+alpha) ||f(t)-f(s)|| / (t-s)**alpha``, both taken over
interior ladder nodes (``t_0 = 0`` is excluded).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import zeta

from . import _kernels, spectral
from .errors import ConfigurationError, InsufficientDataError, NoAntiderivativeError
from .grid import Field, Trajectory

BV = "BV"


@dataclass(frozen=True)
class NormParams:
    """Smallness exponents; defaults are the largest admissible values."""

    gamma: float = 0.01
    alpha: float = 0.005

    def __post_init__(self):
        if not 0.0 < self.alpha < self.gamma <= 0.01:
            raise ConfigurationError(
                f"need 0 < alpha < gamma <= 1/100, got alpha={self.alpha}, gamma={self.gamma}"
            )


@dataclass(frozen=True)
class WeightedNormReport:
    sigma: float
    mode: object
    alpha: float
    sup_term: float
    holder_term: float

    @property
    def total(self) -> float:
        return self.sup_term + self.holder_term

    def to_json(self) -> dict:
        d = asdict(self)
        d["mode"] = _mode_label(self.mode)
        d["total"] = self.total
        return d


def _mode_label(mode):
    if mode == BV:
        return BV
    return "Linf" if math.isinf(mode) else f"L{mode:g}"


def _check_p(p):
    if not p >= 1:
        raise ConfigurationError(f"integrability exponent must be >= 1, got {p}")


def lp_norm(f: Field, p: float) -> float:
    """Rectangle-rule L^p norm; ``p = inf`` gives the sample maximum."""
    _check_p(p)
    v = np.abs(f.values)
    if math.isinf(p):
        return float(v.max())
    return float((np.sum(v**p) * f.grid.h) ** (1.0 / p))


def bv_norm(f: Field) -> float:
    """Discrete total variation ``sum_{i>=1} |v_i - v_{i-1}|``."""
    return float(np.sum(np.abs(np.diff(f.values))))


def _offset_weights(grid, exponent):
    """Per-offset weights ``h**2 sum_m |r h + 2 L m|**-exponent`` over every periodic image.

    Summing the images makes the double sum the seminorm of the periodic
    function with one variable ranging over the whole line, which is the
    quantity the Fourier-side formula computes.
    """
    n = grid.n
    q = np.arange(1, n // 2 + 1) / n
    w = np.zeros(n // 2 + 1)
    w[1:] = grid.h**2 * (2.0 * grid.L) ** (-exponent) * (zeta(exponent, q) + zeta(exponent, 1.0 - q))
    return w


def gagliardo_norm(f: Field, s: float, p: float) -> float:
    """Double-sum Gagliardo seminorm of order ``s`` for the periodic field.

    The diagonal ``i == j`` is excluded; all periodic images enter the weights.
    """
    if not 0.0 < s < 1.0:
        raise ConfigurationError(f"Gagliardo order must lie in (0, 1), got {s}")
    _check_p(p)
    if math.isinf(p):
        raise ConfigurationError("Gagliardo seminorm needs finite p")
    w = _offset_weights(f.grid, 1.0 + s * p)
    rows = _kernels.gagliardo_rows(np.ascontiguousarray(f.values), w, float(p))
    return float(np.sum(rows) ** (1.0 / p))


def sobolev_norm(f: Field, s: float, p: float = 1.0) -> float:
    """Inhomogeneous ``W^{s,p}`` norm: L^p plus the Gagliardo seminorm."""
    return lp_norm(f, p) + gagliardo_norm(f, s, p)


def primitive(g: Field) -> Field:
    """Mean-zero periodic antiderivative; raises if ``g`` has nonzero mean."""
    scale = float(np.max(np.abs(g.values)))
    if abs(g.mean()) > 1e-10 * scale:
        raise NoAntiderivativeError(
            f"no periodic antiderivative: mean {g.mean():.3e} vs max {scale:.3e}"
        )
    return Field(g.grid, spectral.antiderivative(g.values, g.grid))


def negative_sobolev_norm(g: Field, beta: float, p: float) -> float:
    """Upper bound for the order ``-beta`` norm: Gagliardo norm of the mean-zero primitive."""
    if not 0.0 < beta < 1.0:
        raise ConfigurationError(f"beta must lie in (0, 1), got {beta}")
    if not np.any(g.values):
        return 0.0
    return gagliardo_norm(primitive(g), 1.0 - beta, p)


def l1_norm_resolved(f: Field) -> float:
    """L^1 norm of the trigonometric interpolant, exact for resolved fields.

    Integrates the interpolant's primitive between its sign changes, which
    avoids the O(h^2) error the rectangle rule makes at each zero crossing.
    """
    v = f.values
    grid = f.grid
    p = spectral.TrigInterpolant(v, grid)
    # samples at round-off level carry no sign information
    nz = np.flatnonzero(np.abs(v) > 1e-13 * np.max(np.abs(v)))
    if nz.size == 0:
        return 0.0
    roots = []
    sign = np.sign(v[nz])
    change = np.flatnonzero(sign != np.roll(sign, -1))
    for c in change:
        i, j = nz[c], nz[(c + 1) % nz.size]
        a = grid.x[i]
        b = grid.x[j] if j > i else grid.x[j] + 2 * grid.L
        if p(a)[0] * p(b)[0] >= 0:
            continue
        roots.append(brentq(lambda x: p(x)[0], a, b, xtol=1e-14 * max(1.0, grid.L), rtol=1e-15))
    period = 2.0 * grid.L
    if not roots:
        return abs(p.mean) * period
    roots = np.sort(grid.wrap(np.array(roots)))
    P = p.primitive(roots)
    total = np.sum(np.abs(np.diff(P)))
    total += abs(P[0] + p.mean * period - P[-1])
    return float(total)


def sup_norm_resolved(f: Field) -> float:
    """Maximum of the interpolant's modulus near the largest sample."""
    v = f.values
    grid = f.grid
    i = int(np.argmax(np.abs(v)))
    if v[i] == 0.0:
        return 0.0
    p = spectral.TrigInterpolant(v, grid)
    sgn = np.sign(v[i])
    x0 = grid.x[i]
    res = minimize_scalar(
        lambda x: -sgn * p(x)[0],
        bounds=(x0 - grid.h, x0 + grid.h),
        method="bounded",
        options={"xatol": 1e-12 * grid.h},
    )
    return float(max(abs(v[i]), -res.fun))


def _node_norms(data, mode, h):
    if mode == BV:
        return np.sum(np.abs(np.diff(data, axis=1)), axis=1)
    a = np.abs(data)
    if math.isinf(mode):
        return a.max(axis=1)
    return (np.sum(a**mode, axis=1) * h) ** (1.0 / mode)


def _as_mode(mode):
    if isinstance(mode, str):
        m = mode.strip()
        if m.upper() == BV:
            return BV
        if m.lower() in ("linf", "inf"):
            return math.inf
        if m[:1] in "Ll":
            m = m[1:]
        mode = float(m)
    _check_p(mode)
    return float(mode)


def weighted_norm(traj: Trajectory, sigma: float, mode, params: NormParams = NormParams()):
    """Time-weighted norm (``X_T^{sigma,p}`` for numeric ``mode``, ``BV_T^sigma`` for ``"BV"``)."""
    if sigma < 0:
        raise ConfigurationError(f"weight exponent must be >= 0, got {sigma}")
    mode = _as_mode(mode)
    if len(traj) < 3:
        raise InsufficientDataError("weighted norms need at least 2 interior nodes")
    t = traj.times
    data = traj.data
    norms = _node_norms(data, mode, traj.grid.h)
    sup_term = float(np.max(t[1:] ** sigma * norms[1:]))
    if mode == BV:
        D = np.ascontiguousarray(np.diff(data, axis=1))
        p, scale = 1.0, 1.0
    else:
        D = np.ascontiguousarray(data)
        p, scale = mode, traj.grid.h
    holder, _, _ = _kernels.holder_sup(D, np.asarray(t), norms, float(sigma), params.alpha, p, scale)
    return WeightedNormReport(sigma, mode, params.alpha, sup_term, float(holder))


def spacetime_norm(traj: Trajectory, p: float) -> float:
    """``L^p`` norm on [0, T] x torus; trapezoid in time over the ladder."""
    _check_p(p)
    norms = _node_norms(traj.data, float(p), traj.grid.h)
    if math.isinf(p):
        return float(norms[1:].max())
    return float(np.trapezoid(norms**p, traj.times) ** (1.0 / p))


def space_derivative(traj: Trajectory) -> Trajectory:
    return traj.with_data(spectral.derivative(traj.data, traj.grid))


COMPOSITES = ("Y_T", "T", "Z1", "Z2")


def composite_norms(traj: Trajectory, which: str, params: NormParams = NormParams()) -> float:
    """The finite sums of weighted norms defining the fixed-point spaces.

    ``Y_T`` expects ``v - 1``; ``T`` and ``Z1`` expect the velocity (its
    spectral derivative is taken here); ``Z2`` expects ``theta - 1``.
    """
    g = params.gamma

    def X(f, sigma, p):
        return weighted_norm(f, sigma, p, params).total

    if which == "Y_T":
        return X(traj, 0.0, 1.0) + X(traj, 0.0, math.inf) + X(traj, 0.0, BV)
    if which == "T":
        ux = space_derivative(traj)
        return X(ux, 1 - g, math.inf) + X(ux, 0.5 - g, 1.0) + X(ux, 1 - g, BV)
    if which == "Z1":
        ux = space_derivative(traj)
        return (
            spacetime_norm(ux, 2.0)
            + X(ux, 0.5, 2.0)
            + X(ux, 0.75, math.inf)
            + X(ux, 0.5 - g, 1.0)
            + X(ux, 1 - g, BV)
        )
    if which == "Z2":
        tx = space_derivative(traj)
        return (
            spacetime_norm(traj, 2.0)
            + X(traj, 0.5, 2.0)
            + X(traj, 0.5 - g, 1.0)
            + spacetime_norm(tx, 1.2)
            + X(tx, 5.0 / 6.0, 1.2)
            + X(tx, 1 - g, 1.0)
        )
    raise ConfigurationError(f"unknown composite norm {which!r}; choose from {COMPOSITES}")
