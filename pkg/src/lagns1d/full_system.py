"""Coupled Picard iteration for the polytropic gas with P = K theta / v, e = c theta.

Around the constant state (v, u, theta) = (1, 0, 1) the equations become

    theta_t - (kappa/c) theta_xx = d_x F + R,     u_t - mu u_xx = d_x G

with sources built from the current iterates. The temperature is solved
first; the velocity source G then uses the new temperature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import generators, spectral
from .audit import safe_ratio
from .duhamel import DuhamelProblem, assemble, linear_part
from .errors import ConfigurationError, DivergenceError, InvariantError, NoAntiderivativeError
from .grid import Field, Grid, TimeLadder, Trajectory
from .isentropic import TAPER_KEEP, check_volume, reconstruct_volume, viscous_flux
from .norms import (
    NormParams,
    bv_norm,
    composite_norms,
    gagliardo_norm,
    lp_norm,
    space_derivative,
    weighted_norm,
)


@dataclass(frozen=True)
class FullParams:
    mu: float = 1.0
    kappa: float = 1.0
    K_gas: float = 0.4
    c_heat: float = 1.0

    def __post_init__(self):
        if not (self.mu > 0 and self.kappa > 0 and self.c_heat > 0):
            raise ConfigurationError(f"mu, kappa and c_heat must be positive: {self}")
        # K_gas = 0 is admitted: it switches the pressure off for decoupling checks
        if not self.K_gas >= 0:
            raise ConfigurationError(f"gas constant must be nonnegative, got {self.K_gas}")

    @property
    def thermal_diffusivity(self) -> float:
        return self.kappa / self.c_heat


@dataclass
class CoupledState:
    k: int
    w: Trajectory
    th: Trajectory
    v: Trajectory
    residual: float = math.inf
    residuals: list = field(default_factory=list)
    ratios: list = field(default_factory=list)


def _tap(a, grid):
    return spectral.taper(a, grid, TAPER_KEEP)


def sources(v: Trajectory, w: Trajectory, th: Trajectory, theta: Trajectory, params: FullParams):
    """``(R, F, G)``; R and F use the input temperature ``th``, G the new one ``theta``."""
    check_volume(v)
    grid = v.grid
    K, c, mu, kappa = params.K_gas, params.c_heat, params.mu, params.kappa
    wx = _tap(spectral.derivative(w.data, grid), grid)
    thx = _tap(spectral.derivative(th.data, grid), grid)
    inv = 1.0 / v.data
    R = _tap(-(K / c) * th.data * wx * inv + (mu / c) * wx**2 * inv, grid)
    F = _tap((kappa / c) * (inv - 1.0) * thx, grid)
    G = -K * (theta.data * inv - 1.0) + viscous_flux(v, w, mu)
    return v.with_data(R), v.with_data(F), v.with_data(G)


def z_distance(du: Trajectory, dth: Trajectory, norm_params: NormParams = NormParams()) -> float:
    """``||du||_{Z1} + ||dth||_{Z2}``."""
    return composite_norms(du, "Z1", norm_params) + composite_norms(dth, "Z2", norm_params)


def coupled_step(state, u0, th0, v0, params: FullParams, ladder, norm_params=NormParams(), jacobi=False):
    """One application of the map ``(w, th) -> (u, theta)``.

    With ``jacobi`` the velocity source uses the input temperature instead
    of the freshly computed one.
    """
    v = state.v
    R, F, _ = sources(v, state.w, state.th, state.th, params)
    theta = 1.0 + assemble(DuhamelProblem(params.thermal_diffusivity, th0 - 1.0, ladder, F, R))
    _, _, G = sources(v, state.w, state.th, state.th if jacobi else theta, params)
    u = assemble(DuhamelProblem(params.mu, u0, ladder, grad_forcing=G))
    res = z_distance(u - state.w, theta - state.th, norm_params)
    ratios = list(state.ratios)
    if state.residuals:
        ratios.append(safe_ratio(res, state.residuals[-1]))
    return CoupledState(state.k + 1, u, theta, reconstruct_volume(v0, u), res, state.residuals + [res], ratios)


def data_size(v0: Field, u0: Field, th0: Field, gamma: float = 0.01) -> float:
    """``||v0-1||_{L1 cap BV} + ||u0||_{W^{2g,1} cap L2} + ||th0-1||_{W^{-2/3,6/5} cap W^{2g-1,1}}``."""
    dv = v0 - 1.0
    try:
        temp = generators.temperature_data_norm(th0 - 1.0, gamma)
    except NoAntiderivativeError:
        # a temperature perturbation with nonzero mean lies outside the data space
        temp = math.inf
    return lp_norm(dv, 1.0) + bv_norm(dv) + velocity_size(u0, gamma) + temp


def velocity_size(u0: Field, gamma: float = 0.01) -> float:
    return lp_norm(u0, 1.0) + gagliardo_norm(u0, 2 * gamma, 1.0) + lp_norm(u0, 2.0)


@dataclass
class FullSolution:
    v: Trajectory
    u: Trajectory
    theta: Trajectory
    state: CoupledState
    M2: float
    converged: bool

    def report(self, norm_params: NormParams = NormParams(), params: FullParams = FullParams()) -> dict:
        v, u, th = self.v, self.u, self.theta
        h = v.grid.h
        mass = np.sum(v.data - 1.0, axis=1) * h
        mom = np.sum(u.data, axis=1) * h
        en = energy(u, th, params)
        return {
            "M2": self.M2,
            "T": v.ladder.T,
            "K": v.ladder.K,
            "n": v.grid.n,
            "L": v.grid.L,
            "iterations": self.state.k,
            "converged": self.converged,
            "residuals": self.state.residuals,
            "ratios": self.state.ratios,
            "box": {
                "Z1(u)": composite_norms(u, "Z1", norm_params),
                "Z2(theta-1)": composite_norms(th - 1.0, "Z2", norm_params),
                "inf_v": float(v.data.min()),
                "inf_theta": float(th.data.min()),
                "theta_x_decay": theta_gradient_decay(th, norm_params).total,
            },
            "drift": {
                "mass": float(np.max(np.abs(mass - mass[0]))),
                "momentum": float(np.max(np.abs(mom - mom[0]))),
                "energy": float(np.max(np.abs(en - en[0]))),
            },
            "energy": en.tolist(),
            "taper_keep": TAPER_KEEP,
        }


def energy(u: Trajectory, theta: Trajectory, params: FullParams) -> np.ndarray:
    """``int (c (theta - 1) + u**2 / 2) dx`` at every node."""
    return np.sum(params.c_heat * (theta.data - 1.0) + 0.5 * u.data**2, axis=1) * u.grid.h


def theta_gradient_decay(theta: Trajectory, norm_params: NormParams = NormParams()):
    return weighted_norm(space_derivative(theta), 1.5 - norm_params.gamma, math.inf, norm_params)


def initial_state(u0, th0, v0, params: FullParams, ladder) -> CoupledState:
    w = linear_part(DuhamelProblem(params.mu, u0, ladder))
    th = 1.0 + linear_part(DuhamelProblem(params.thermal_diffusivity, th0 - 1.0, ladder))
    return CoupledState(0, w, th, reconstruct_volume(v0, w))


def solve_full(
    v0: Field,
    u0: Field,
    th0: Field,
    params: FullParams,
    ladder: TimeLadder,
    tol: float = 1e-9,
    max_iter: int = 60,
    norm_params: NormParams = NormParams(),
    jacobi: bool = False,
) -> FullSolution:
    M2 = data_size(v0, u0, th0, norm_params.gamma)
    state = initial_state(u0, th0, v0, params, ladder)
    converged = False
    while state.k < max_iter:
        state = coupled_step(state, u0, th0, v0, params, ladder, norm_params, jacobi)
        if state.residual <= tol:
            converged = True
            break
        if len(state.ratios) >= 3 and all(r >= 1.0 for r in state.ratios[-3:]):
            raise DivergenceError(
                f"coupled map not contracting (last ratios {state.ratios[-3:]}); M2 = {M2:.4g}, "
                f"try T = {ladder.T / 2:g}",
                data_size=M2,
                suggested_T=ladder.T / 2,
                state=state,
            )
    sol = FullSolution(state.v, state.w, state.th, state, M2, converged)
    if converged and sol.v.data.min() < 0.5:
        raise InvariantError(f"volume lower bound lost at the fixed point: inf v = {sol.v.data.min():.4g}")
    return sol


def rough_data(grid: Grid, M2: float, seed: int = 7, gamma: float = 0.01):
    """Step volume, lacunary velocity and lacunary temperature, each a third of ``M2``."""
    part = M2 / 3.0
    v0 = 1.0 + generators.step(grid, part / 4.0, -1.0, 1.0)
    u = generators.rough_velocity(gamma, seed, 1.0, grid)
    u0 = u * (part / velocity_size(u, gamma))
    th0 = 1.0 + generators.rough_temperature(0.5, seed, part, grid, gamma)
    return v0, u0, th0
