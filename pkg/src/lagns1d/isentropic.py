"""Picard iteration for the isentropic system v_t = u_x, u_t + p(v)_x = (mu u_x / v)_x.

Written around the constant state (1, 0), the momentum equation reads
``u_t - mu u_xx = d_x Ft(v, w)`` with ``Ft = -(p(v) - p(1)) + mu (1/v - 1) w_x``,
and the map ``w -> u`` is one Duhamel assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import generators, spectral
from .audit import EstimateAudit, safe_ratio
from .duhamel import DuhamelProblem, assemble, linear_part
from .errors import ConfigurationError, DivergenceError, InvariantError, PositivityError
from .grid import Field, Grid, TimeLadder, Trajectory
from .norms import NormParams, bv_norm, composite_norms, gagliardo_norm, lp_norm

TAPER_KEEP = 2.0 / 3.0
E = math.e


@dataclass(frozen=True)
class IsentropicParams:
    mu: float = 1.0
    A: float = 1.0
    nu_exp: float = 1.4
    pressure: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if not (self.mu > 0 and self.A > 0):
            raise ConfigurationError(f"mu and A must be positive, got mu={self.mu}, A={self.A}")
        if not 1.0 <= self.nu_exp < E:
            raise ConfigurationError(f"adiabatic exponent must lie in [1, e), got {self.nu_exp}")

    def p(self, v):
        if self.pressure is not None:
            return self.pressure(v)
        return self.A * np.power(v, -self.nu_exp)


@dataclass
class PicardState:
    k: int
    w: Trajectory
    v: Trajectory
    residual: float = math.inf
    residuals: list = field(default_factory=list)
    ratios: list = field(default_factory=list)


def reconstruct_volume(v0: Field, w: Trajectory) -> Trajectory:
    """``v(t) = v0 + int_0^t w_x``, trapezoid in time over the ladder."""
    wx = spectral.derivative(w.data, w.grid)
    dt = np.diff(w.times)[:, None]
    acc = np.zeros_like(wx)
    acc[1:] = np.cumsum(0.5 * dt * (wx[1:] + wx[:-1]), axis=0)
    return w.with_data(v0.values[None, :] + acc)


def check_volume(v: Trajectory, floor: float = 0.5):
    k, i = np.unravel_index(np.argmin(v.data), v.data.shape)
    if v.data[k, i] < floor:
        t, x = float(v.times[k]), float(v.grid.x[i])
        raise PositivityError(
            f"volume lower bound lost: v = {v.data[k, i]:.4g} < {floor} at t = {t:.6g}, x = {x:.6g}", t=t, x=x
        )


def viscous_flux(v: Trajectory, w: Trajectory, mu: float) -> np.ndarray:
    """Tapered ``mu (1/v - 1) w_x`` shared by both solvers."""
    grid = w.grid
    wx = spectral.taper(spectral.derivative(w.data, grid), grid, TAPER_KEEP)
    return mu * spectral.taper((1.0 / v.data - 1.0) * wx, grid, TAPER_KEEP)


def tilde_F(v: Trajectory, w: Trajectory, params: IsentropicParams) -> Trajectory:
    check_volume(v)
    pressure = -(params.p(v.data) - params.p(np.float64(1.0)))
    return v.with_data(pressure + viscous_flux(v, w, params.mu))


def apply_map(w: Trajectory, v0: Field, u0: Field, params: IsentropicParams, ladder: TimeLadder) -> Trajectory:
    """The fixed-point map ``w -> u``."""
    v = reconstruct_volume(v0, w)
    F = tilde_F(v, w, params)
    return assemble(DuhamelProblem(params.mu, u0, ladder, grad_forcing=F))


def picard_step(state: PicardState, u0, v0, params, ladder, norm_params: NormParams = NormParams()) -> PicardState:
    F = tilde_F(state.v, state.w, params)
    u = assemble(DuhamelProblem(params.mu, u0, ladder, grad_forcing=F))
    v = reconstruct_volume(v0, u)
    res = composite_norms(u - state.w, "T", norm_params)
    ratios = list(state.ratios)
    if state.residuals:
        ratios.append(safe_ratio(res, state.residuals[-1]))
    return PicardState(state.k + 1, u, v, res, state.residuals + [res], ratios)


def data_size(v0: Field, u0: Field, gamma: float = 0.01) -> float:
    """``||v0 - 1||_{L^1 cap BV} + ||u0||_{W^{2 gamma, 1}}``."""
    dv = v0 - 1.0
    return lp_norm(dv, 1.0) + bv_norm(dv) + lp_norm(u0, 1.0) + gagliardo_norm(u0, 2 * gamma, 1.0)


@dataclass
class IsentropicSolution:
    v: Trajectory
    u: Trajectory
    state: PicardState
    M1: float
    converged: bool

    def report(self, norm_params: NormParams = NormParams()) -> dict:
        v, u = self.v, self.u
        mass = np.sum(v.data - 1.0, axis=1) * v.grid.h
        mom = np.sum(u.data, axis=1) * u.grid.h
        return {
            "M1": self.M1,
            "T": v.ladder.T,
            "K": v.ladder.K,
            "n": v.grid.n,
            "L": v.grid.L,
            "iterations": self.state.k,
            "converged": self.converged,
            "residuals": self.state.residuals,
            "ratios": self.state.ratios,
            "box": {
                "Y_T(v-1)": composite_norms(v - 1.0, "Y_T", norm_params),
                "T(u)": composite_norms(u, "T", norm_params),
                "inf_v": float(v.data.min()),
            },
            "drift": {
                "mass": float(np.max(np.abs(mass - mass[0]))),
                "momentum": float(np.max(np.abs(mom - mom[0]))),
            },
            "taper_keep": TAPER_KEEP,
        }


def solve(
    v0: Field,
    u0: Field,
    params: IsentropicParams,
    ladder: TimeLadder,
    tol: float = 1e-10,
    max_iter: int = 40,
    norm_params: NormParams = NormParams(),
    initial: str = "linear",
) -> IsentropicSolution:
    """Iterate the map until the T-norm residual drops below ``tol``.

    Three consecutive residual ratios >= 1 raise :class:`DivergenceError`
    carrying the data size and the suggestion ``T/2``.
    """
    M1 = data_size(v0, u0, norm_params.gamma)
    if initial == "linear":
        w = linear_part(DuhamelProblem(params.mu, u0, ladder))
    elif initial == "zero":
        w = Trajectory.zeros(ladder, u0.grid).with_data(
            np.vstack([u0.values, np.zeros((ladder.K, u0.grid.n))])
        )
    else:
        raise ConfigurationError(f"initial guess must be 'linear' or 'zero', got {initial!r}")
    state = PicardState(0, w, reconstruct_volume(v0, w))
    converged = False
    while state.k < max_iter:
        state = picard_step(state, u0, v0, params, ladder, norm_params)
        if state.residual <= tol:
            converged = True
            break
        if len(state.ratios) >= 3 and all(r >= 1.0 for r in state.ratios[-3:]):
            raise DivergenceError(
                f"Picard map not contracting (last ratios {state.ratios[-3:]}); M1 = {M1:.4g}, "
                f"try T = {ladder.T / 2:g}",
                data_size=M1,
                suggested_T=ladder.T / 2,
                state=state,
            )
    sol = IsentropicSolution(state.v, state.w, state, M1, converged)
    if converged:
        y = composite_norms(sol.v - 1.0, "Y_T", norm_params)
        if y > 0.5 or sol.v.data.min() < 0.5:
            raise InvariantError(f"a-priori box violated: Y_T(v-1) = {y:.4g}, inf v = {sol.v.data.min():.4g}")
    return sol


def solve_with_halving(v0, u0, params, T, K, q=3.0, min_T=1e-3, **kw) -> IsentropicSolution:
    """Retry :func:`solve` on ``T/2`` after each divergence, down to ``min_T``."""
    while True:
        try:
            return solve(v0, u0, params, TimeLadder(T, K, q), **kw)
        except (DivergenceError, PositivityError):
            T /= 2
            if T < min_T:
                raise


def rough_data(grid: Grid, M1: float, seed: int = 7, share: float = 0.5, gamma: float = 0.01):
    """Step volume and lacunary velocity with ``data_size == M1``.

    ``share`` of the budget goes to ``v0 - 1 = step(h, -1, 1)``, whose
    L^1 plus BV size is ``4 h``; the rest is the velocity amplitude.
    """
    v0 = 1.0 + generators.step(grid, share * M1 / 4.0, -1.0, 1.0)
    u0 = generators.rough_velocity(gamma, seed, (1.0 - share) * M1, grid)
    return v0, u0


def contraction_quotient(w1, w2, v0, u0, params, ladder, norm_params: NormParams = NormParams()) -> float:
    """``||Tw1 - Tw2||_T / ||w1 - w2||_T``."""
    d = composite_norms(w1 - w2, "T", norm_params)
    if d == 0.0:
        return 0.0
    t1 = apply_map(w1, v0, u0, params, ladder)
    t2 = apply_map(w2, v0, u0, params, ladder)
    return composite_norms(t1 - t2, "T", norm_params) / d


def contraction_audit(
    grid: Grid,
    Ts=(0.4, 0.2, 0.1, 0.05),
    scales=(1.0, 0.5, 0.25),
    M1: float = 1e-2,
    T_fixed: float = 0.2,
    K: int = 128,
    params: IsentropicParams = IsentropicParams(),
    seed: int = 7,
    norm_params: NormParams = NormParams(),
) -> EstimateAudit:
    """Contraction quotient over a T sweep at fixed data and a data-scaling sweep at fixed T.

    Trial pair: ``w1`` = heat evolution of ``u0`` and ``w2`` = its image
    under the map, both members of the small ball around the solution.
    Rows carry the fitted predictor ``C0 (T**gamma + M1)``.
    """
    audit = EstimateAudit("contraction", {"L": grid.L, "n": grid.n, "K": K, "seed": seed})
    rows = []
    for T in Ts:
        rows.append(("T", T, M1, T))
    for lam in scales:
        rows.append(("scale", lam, lam * M1, T_fixed))
    for sweep, value, m, T in rows:
        ladder = TimeLadder(T, K)
        v0, u0 = rough_data(grid, m, seed, gamma=norm_params.gamma)
        w1 = linear_part(DuhamelProblem(params.mu, u0, ladder))
        w2 = apply_map(w1, v0, u0, params, ladder)
        q = contraction_quotient(w1, w2, v0, u0, params, ladder, norm_params)
        audit.table.append({"ratio": q, "sweep": sweep, "value": value, "M1": m, "T": T})
    g = norm_params.gamma
    pred = np.array([r["T"] ** g + r["M1"] for r in audit.table])
    obs = np.array([r["ratio"] for r in audit.table])
    c0 = float(np.max(obs / pred))
    audit.grid["C0"] = c0
    for r, p in zip(audit.table, pred):
        r["predictor"] = c0 * float(p)
    return audit
