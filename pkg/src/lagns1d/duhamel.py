"""Mild solutions of ``f_t - nu f_xx = d_x F + R`` on the periodic grid.

The forcing integral is computed by product integration: between ladder
nodes the source is linear in time and the factor
``exp(-nu xi**2 (t - tau))`` is integrated exactly for every mode. The
per-target-node sums then collapse into the one-step recursion

    S_{k+1} = e^{-x} S_k + a1 g_k + (a0 - a1) g_{k+1},   x = nu xi**2 dt_k

with ``a0 = dt (1 - e^{-x}) / x`` and ``a1 = dt (1 - e^{-x} - x e^{-x}) / x**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import generators, spectral
from .audit import EstimateAudit, safe_ratio
from .errors import ConfigurationError, PropagationError
from .grid import Field, Grid, TimeLadder, Trajectory
from .norms import (
    BV,
    NormParams,
    gagliardo_norm,
    lp_norm,
    negative_sobolev_norm,
    spacetime_norm,
    space_derivative,
    weighted_norm,
)

_SERIES_CUT = 0.2


@dataclass(frozen=True)
class DuhamelProblem:
    diffusivity: float
    initial: Field
    ladder: TimeLadder
    grad_forcing: Optional[Trajectory] = None
    plain_forcing: Optional[Trajectory] = None

    def __post_init__(self):
        if not self.diffusivity > 0:
            raise ConfigurationError(f"diffusivity must be positive, got {self.diffusivity}")
        for name in ("grad_forcing", "plain_forcing"):
            tr = getattr(self, name)
            if tr is None:
                continue
            if tr.ladder != self.ladder or tr.grid != self.initial.grid:
                raise ConfigurationError(f"{name} does not share the ladder and grid of the problem")

    @property
    def grid(self) -> Grid:
        return self.initial.grid


def _phi(x):
    """``(1 - e^{-x})/x`` and ``(1 - e^{-x} - x e^{-x})/x**2``, series near 0."""
    a0 = np.empty_like(x)
    a1 = np.empty_like(x)
    small = x < _SERIES_CUT
    xs = x[small]
    s0 = np.zeros_like(xs)
    s1 = np.zeros_like(xs)
    term = np.ones_like(xs)
    for k in range(14):
        s0 += term / math.factorial(k + 1)
        s1 += term * (k + 1) / math.factorial(k + 2)
        term = term * (-xs)
    a0[small], a1[small] = s0, s1
    xb = x[~small]
    e = np.exp(-xb)
    a0[~small] = (1.0 - e) / xb
    a1[~small] = (1.0 - e - xb * e) / xb**2
    return a0, a1


@lru_cache(maxsize=16)
def _step_weights(nu: float, ladder: TimeLadder, grid: Grid):
    dt = ladder.steps[:, None]
    x = nu * grid.xi[None, :] ** 2 * dt
    a0, a1 = _phi(x)
    decay = np.exp(-x)
    w_old = dt * a1
    w_new = dt * (a0 - a1)
    for arr in (decay, w_old, w_new):
        arr.flags.writeable = False
    return decay, w_old, w_new


def linear_part(prob: DuhamelProblem) -> Trajectory:
    """``K_nu(t_k) * f0`` at every node, by the exact symbol."""
    grid = prob.grid
    t = prob.ladder.nodes[:, None]
    coef = np.fft.rfft(prob.initial.values)[None, :] * np.exp(-prob.diffusivity * t * grid.xi[None, :] ** 2)
    data = np.fft.irfft(coef, n=grid.n, axis=-1)
    data[0] = prob.initial.values
    return Trajectory(prob.ladder, grid, data)


def _source_hat(prob: DuhamelProblem):
    grid = prob.grid
    g = None
    for tr, grad in ((prob.grad_forcing, True), (prob.plain_forcing, False)):
        if tr is None:
            continue
        bad = ~np.all(np.isfinite(tr.data), axis=1)
        if bad.any():
            k = int(np.argmax(bad))
            which = "gradient" if grad else "plain"
            raise PropagationError(f"non-finite {which} forcing at node {k} (t = {tr.times[k]:.6g})", node=k)
        c = np.fft.rfft(tr.data, axis=-1)
        if grad:
            sym = 1j * grid.xi
            sym[-1] = 0.0
            c = c * sym[None, :]
        g = c if g is None else g + c
    return g


def forcing_parts(prob: DuhamelProblem) -> Trajectory:
    """Duhamel integral of ``d_x F + R`` at every node (zero at t_0)."""
    grid = prob.grid
    g = _source_hat(prob)
    if g is None:
        return Trajectory.zeros(prob.ladder, grid)
    decay, w_old, w_new = _step_weights(float(prob.diffusivity), prob.ladder, grid)
    S = np.zeros_like(g)
    for k in range(prob.ladder.K):
        S[k + 1] = decay[k] * S[k] + w_old[k] * g[k] + w_new[k] * g[k + 1]
    return Trajectory(prob.ladder, grid, np.fft.irfft(S, n=grid.n, axis=-1))


def assemble(prob: DuhamelProblem) -> Trajectory:
    return linear_part(prob) + forcing_parts(prob)


def pde_residual(f: Trajectory, diffusivity: float, F: Optional[Trajectory] = None, R: Optional[Trajectory] = None):
    """Max-norm residual of ``f_t - nu f_xx - d_x F - R`` at interior nodes.

    The time derivative is the three-point second-order formula on the
    nonuniform ladder; space derivatives are spectral.
    """
    t = f.times
    d = f.data
    h0 = t[1:-1] - t[:-2]
    h1 = t[2:] - t[1:-1]
    c_prev = -h1 / (h0 * (h0 + h1))
    c_mid = (h1 - h0) / (h0 * h1)
    c_next = h0 / (h1 * (h0 + h1))
    dt = c_prev[:, None] * d[:-2] + c_mid[:, None] * d[1:-1] + c_next[:, None] * d[2:]
    rhs = diffusivity * spectral.derivative(d[1:-1], f.grid, 2)
    if F is not None:
        rhs = rhs + spectral.derivative(F.data[1:-1], f.grid, 1)
    if R is not None:
        rhs = rhs + R.data[1:-1]
    return np.max(np.abs(dt - rhs), axis=1)


# --- smoothing-estimate audits -------------------------------------------------

SMOOTHING_KINDS = (
    "2.2",
    "2.3",
    "2.4",
    "2.5",
    "main-the1",
    "main-l1",
    "main-u1",
    "main-uinf",
    "main-l2",
    "main-BV",
)

# spatial shapes use a fixed top frequency so every resolution sees the same function
AUDIT_MAX_LEVEL = 4
_PROFILE_EPS = 1e-4


def random_shape(grid: Grid, rng: np.random.Generator) -> np.ndarray:
    decay = rng.uniform(0.0, 1.0)
    seed = int(rng.integers(2**31))
    s = generators.lacunary(grid, decay, seed, AUDIT_MAX_LEVEL)
    return s / np.max(np.abs(s))


def random_source(grid: Grid, ladder: TimeLadder, rng: np.random.Generator, exponent: float) -> Trajectory:
    """Two-term source ``sum_i c_i (t + eps)**(-e_i) phi_i(x)`` with ``e_i <= exponent``.

    Each term sits in the weighted space of order ``exponent``; the two
    different time profiles give a nontrivial Hoelder quotient.
    """
    t = ladder.nodes[:, None]
    data = np.zeros((len(ladder), grid.n))
    for _ in range(2):
        e = exponent * rng.uniform(0.5, 1.0)
        c = rng.uniform(0.5, 1.5) * rng.choice((-1.0, 1.0))
        data += c * (t + _PROFILE_EPS) ** (-e) * random_shape(grid, rng)[None, :]
    return Trajectory(ladder, grid, data)


def random_mean_zero(grid: Grid, rng: np.random.Generator) -> Field:
    """Derivative of a smooth random primitive (so it has an antiderivative)."""
    return Field(grid, spectral.derivative(random_shape(grid, rng), grid))


def _X(tr, sigma, p, params):
    return weighted_norm(tr, sigma, p, params).total


def _source_size(R, params):
    return spacetime_norm(R, 1.0) + _X(R, 1.0, 1.0, params)


def _audit_trial(kind, grid, ladder, rng, params):
    g_ = params.gamma
    T = ladder.T
    zero = Field.zeros(grid)
    X = lambda tr, s, p: _X(tr, s, p, params)  # noqa: E731

    if kind in ("2.2", "2.5"):
        sigma = rng.uniform(0.05, 0.9)
        p = BV if kind == "2.5" else float(rng.choice((1.0, 2.0, math.inf)))
        f = random_source(grid, ladder, rng, sigma)
        # d_t K * f = K * (nu d_xx f) with nu = 1
        R = f.with_data(spectral.derivative(f.data, grid, 2))
        g = assemble(DuhamelProblem(1.0, zero, ladder, plain_forcing=R))
        return X(g, sigma, p), X(f, sigma, p), {"sigma": sigma, "p": str(p)}

    if kind == "2.3":
        s_src = rng.uniform(0.05, 0.95)
        sigma = rng.uniform(max(s_src - 0.5, 0.05), 0.95)
        p = float(rng.choice((1.0, 2.0, math.inf)))
        f = random_source(grid, ladder, rng, s_src)
        g = assemble(DuhamelProblem(1.0, zero, ladder, grad_forcing=f))
        rhs = T ** (0.5 + sigma - s_src) * X(f, s_src, p)
        return X(g, sigma, p), rhs, {"sigma": sigma, "sigma_src": s_src, "p": str(p)}

    if kind == "2.4":
        l = int(rng.integers(2))
        p = float(rng.choice((1.0, 2.0)))
        lo = (1 + l) / 2 - 1 / (2 * p)
        sigma = rng.uniform(max(lo, 0.0), max(lo, 0.0) + 0.4)
        R = random_source(grid, ladder, rng, 0.95)
        g = assemble(DuhamelProblem(1.0, zero, ladder, plain_forcing=R))
        if l:
            g = space_derivative(g)
        rhs = T ** (sigma - (1 + l) / 2 + 1 / (2 * p)) * _source_size(R, params)
        return X(g, sigma, p), rhs, {"sigma": sigma, "l": l, "p": str(p)}

    if kind == "main-the1":
        f0 = random_mean_zero(grid, rng)
        F = random_source(grid, ladder, rng, 0.8)
        R = random_source(grid, ladder, rng, 0.95)
        f = assemble(DuhamelProblem(1.0, f0, ladder, grad_forcing=F, plain_forcing=R))
        fx = space_derivative(f)
        lhs = spacetime_norm(f, 2.0) + X(f, 0.5, 2.0) + spacetime_norm(fx, 1.2) + X(fx, 5 / 6, 1.2)
        rhs = (
            negative_sobolev_norm(f0, 2 / 3, 1.2)
            + spacetime_norm(F, 1.2)
            + X(F, 5 / 6, 1.2)
            + T**0.25 * _source_size(R, params)
        )
        return lhs, rhs, {}

    if kind == "main-l1":
        f0 = random_mean_zero(grid, rng)
        F = random_source(grid, ladder, rng, 1 - g_)
        R = random_source(grid, ladder, rng, 0.95)
        f = assemble(DuhamelProblem(1.0, f0, ladder, grad_forcing=F, plain_forcing=R))
        lhs = X(f, 0.5 - g_, 1.0) + X(space_derivative(f), 1 - g_, 1.0)
        rhs = (
            negative_sobolev_norm(f0, 1 - 2 * g_, 1.0)
            + X(F, 1 - g_, 1.0)
            + T ** (0.5 - g_) * _source_size(R, params)
        )
        return lhs, rhs, {}

    # the remaining estimates have R = 0 and a velocity-type datum
    f0 = Field(grid, random_shape(grid, rng))
    if kind == "main-u1":
        F = random_source(grid, ladder, rng, 0.5)
        fx = space_derivative(assemble(DuhamelProblem(1.0, f0, ladder, grad_forcing=F)))
        lhs = spacetime_norm(fx, 2.0) + X(fx, 0.5, 2.0) + X(fx, 0.75, math.inf)
        rhs = lp_norm(f0, 2.0) + spacetime_norm(F, 2.0) + X(F, 0.5, 2.0) + X(F, 0.75, math.inf)
        return lhs, rhs, {}
    sigma, p = {"main-uinf": (1 - g_, math.inf), "main-l2": (0.5 - g_, 1.0), "main-BV": (1 - g_, BV)}[kind]
    F = random_source(grid, ladder, rng, sigma)
    fx = space_derivative(assemble(DuhamelProblem(1.0, f0, ladder, grad_forcing=F)))
    rhs = gagliardo_norm(f0, 2 * g_, 1.0) + X(F, sigma, p)
    return X(fx, sigma, p), rhs, {}


def smoothing_audit(
    kind: str,
    trials: int,
    params: NormParams = NormParams(),
    n: int = 1024,
    K: int = 128,
    L: float = 20.0,
    T: float = 0.25,
    seed: int = 0,
) -> EstimateAudit:
    """Max LHS/RHS over ``trials`` random admissible inputs for one smoothing estimate.

    Trial ``i`` draws from ``default_rng([seed, i])``, so the same inputs are
    used at every resolution.
    """
    if kind not in SMOOTHING_KINDS:
        raise ConfigurationError(f"unknown estimate {kind!r}; valid: {', '.join(SMOOTHING_KINDS)}")
    if trials < 1:
        raise ConfigurationError(f"need at least one trial, got {trials}")
    grid = Grid(L, n)
    ladder = TimeLadder(T, K)
    audit = EstimateAudit(f"smoothing:{kind}", {"L": L, "n": n, "K": K, "T": T, "seed": seed})
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        lhs, rhs, info = _audit_trial(kind, grid, ladder, rng, params)
        audit.add(safe_ratio(lhs, rhs), trial=i, lhs=lhs, rhs=rhs, **info)
    return audit
