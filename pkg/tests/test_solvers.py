import math

import numpy as np
import pytest

from lagns1d import full_system as fs
from lagns1d import generators as gen
from lagns1d import isentropic as ise
from lagns1d.duhamel import DuhamelProblem, linear_part, pde_residual
from lagns1d.errors import ConfigurationError, DivergenceError, PositivityError
from lagns1d.grid import Field, Grid, TimeLadder, Trajectory
from lagns1d.oracle_fd import FDConfig, fd_solve_full, fd_solve_isentropic, solve_cyclic
from lagns1d.spectral import derivative, shift

SMALL = Grid(20.0, 512)
LAD = TimeLadder(0.25, 64)


# --- isentropic pieces


def test_reconstruct_volume_closed_form():
    g = Grid(math.pi, 64)
    lad = TimeLadder(0.25, 256)
    t = lad.nodes[:, None]
    w = Trajectory(lad, g, t * np.sin(g.x)[None, :])
    v0 = Field.constant(g, 1.0)
    v = ise.reconstruct_volume(v0, w)
    exact = 1.0 + 0.5 * t**2 * np.cos(g.x)[None, :]
    assert np.max(np.abs(v.data - exact)) <= 1e-8


def test_tilde_F_two_level():
    g = Grid(20.0, 256)
    params = ise.IsentropicParams()
    v = Trajectory.constant_in_time(LAD, 1.0 + gen.step(g, 0.1, -1.0, 1.0))
    F = ise.tilde_F(v, Trajectory.zeros(LAD, g), params)
    levels = np.unique(np.round(F.data, 14))
    np.testing.assert_allclose(sorted(levels), sorted([0.0, -(1.1**-1.4 - 1.0)]), atol=1e-14)


def test_custom_pressure_and_bounds():
    assert ise.IsentropicParams(pressure=lambda v: 2 * v).p(np.array([3.0]))[0] == 6.0
    with pytest.raises(ConfigurationError):
        ise.IsentropicParams(nu_exp=3.0)
    with pytest.raises(ConfigurationError):
        ise.IsentropicParams(mu=0.0)


def test_positivity_error_locates_point():
    g = Grid(20.0, 64)
    data = np.ones((len(LAD), g.n))
    data[7, 5] = 0.3
    with pytest.raises(PositivityError) as ei:
        ise.check_volume(Trajectory(LAD, g, data))
    assert ei.value.t == pytest.approx(LAD.nodes[7]) and ei.value.x == pytest.approx(g.x[5])


def test_flat_volume_first_correction_is_linear_response():
    # v - 1 = int w_x is first order in the data, so the pressure makes the
    # first correction u1 - w0 linear in the amplitude (not quadratic)
    g = Grid(20.0, 512)
    params = ise.IsentropicParams()
    v0 = Field.constant(g, 1.0)
    out = []
    for a in (1e-4, 1e-3):
        u0 = a * gen.gaussian(g, 0.0, 1.0)
        w0 = linear_part(DuhamelProblem(params.mu, u0, LAD))
        u1 = ise.apply_map(w0, v0, u0, params, LAD)
        out.append(np.max(np.abs(u1.data - w0.data)) / a)
    assert out[1] == pytest.approx(out[0], rel=1e-4)


def test_isentropic_converges_small_grid():
    v0, u0 = ise.rough_data(SMALL, 1e-2, seed=7)
    assert ise.data_size(v0, u0) == pytest.approx(1e-2, rel=0.02)
    sol = ise.solve(v0, u0, ise.IsentropicParams(), LAD)
    assert sol.converged and sol.state.residual <= 1e-10
    assert max(sol.state.ratios[2:]) <= 0.5
    rep = sol.report()
    assert rep["drift"]["mass"] <= 1e-8 and rep["drift"]["momentum"] <= 1e-8


def test_isentropic_solution_satisfies_pde():
    g = Grid(20.0, 256)
    lad = TimeLadder(0.25, 256)
    u0 = 1e-2 * gen.gaussian(g, 0.0, 1.0)
    v0 = 1.0 + 1e-2 * gen.gaussian(g, 0.5, 1.0)
    params = ise.IsentropicParams()
    sol = ise.solve(v0, u0, params, lad, tol=1e-13)
    F = ise.tilde_F(sol.v, sol.u, params)
    res = pde_residual(sol.u, params.mu, F)
    assert res[lad.K // 2 :].max() < 1e-6


def test_divergence_and_positivity_failures():
    g = Grid(20.0, 256)
    # a stiff linear pressure makes the map expansive at T = 1
    v0 = 1.0 + gen.step(g, 0.01, -1.0, 1.0)
    u0 = gen.rough_velocity(0.01, 1, 1e-2, g)
    stiff = ise.IsentropicParams(pressure=lambda v: 5.0 * v)
    with pytest.raises(DivergenceError) as ei:
        ise.solve(v0, u0, stiff, TimeLadder(1.0, 32))
    assert ei.value.suggested_T == 0.5 and ei.value.data_size > 0
    with pytest.raises(PositivityError):
        ise.solve(v0, u0, ise.IsentropicParams(pressure=lambda v: 20.0 * v), TimeLadder(1.0, 32))


def test_zero_initial_guess_same_fixed_point():
    v0, u0 = ise.rough_data(Grid(20.0, 256), 1e-2, seed=3)
    lad = TimeLadder(0.25, 32)
    a = ise.solve(v0, u0, ise.IsentropicParams(), lad, tol=1e-12)
    b = ise.solve(v0, u0, ise.IsentropicParams(), lad, tol=1e-12, initial="zero")
    assert np.max(np.abs(a.u.data - b.u.data)) < 1e-11


def test_contraction_audit_small():
    a = ise.contraction_audit(Grid(20.0, 256), K=32)
    assert len(a.table) == 7
    assert all(r["ratio"] <= r["predictor"] * (1 + 1e-12) for r in a.table)


# --- full system


def test_sources_closed_form():
    g = Grid(math.pi, 64)
    lad = TimeLadder(0.25, 8)
    t = lad.nodes[:, None]
    w = Trajectory(lad, g, t * np.sin(g.x)[None, :])
    one = Trajectory.zeros(lad, g) + 1.0
    p = fs.FullParams(mu=0.7, K_gas=0.4, c_heat=1.3)
    R, F, G = fs.sources(one, w, one, one, p)
    c = np.cos(g.x)[None, :]
    exact = -(p.K_gas / p.c_heat) * t * c + (p.mu / p.c_heat) * t**2 * c**2
    assert np.max(np.abs(R.data - exact)) < 1e-13
    assert np.max(np.abs(F.data)) < 1e-14 and np.max(np.abs(G.data)) < 1e-14


def test_decoupling_matches_isentropic():
    g = Grid(20.0, 512)
    lad = TimeLadder(0.25, 32)
    v0 = 1.0 + gen.step(g, 0.01, -1.0, 1.0)
    u0 = gen.rough_velocity(0.01, 3, 1e-2, g)
    th0 = Field.constant(g, 1.0)
    P = fs.FullParams(K_gas=0.0)
    st = fs.initial_state(u0, th0, v0, P, lad)
    st = fs.CoupledState(0, st.w, Trajectory.zeros(lad, g) + 1.0, st.v)
    a = fs.coupled_step(st, u0, th0, v0, P, lad)
    b = ise.picard_step(ise.PicardState(0, st.w, st.v), u0, v0, ise.IsentropicParams(pressure=lambda v: 0.0 * v), lad)
    assert np.max(np.abs(a.w.data - b.w.data)) <= 1e-12


def test_full_converges_small_grid():
    v0, u0, th0 = fs.rough_data(SMALL, 1e-2, seed=7)
    sol = fs.solve_full(v0, u0, th0, fs.FullParams(), LAD)
    assert sol.converged and sol.state.residual <= 1e-9
    assert sol.M2 == pytest.approx(1e-2, rel=0.02)


def test_full_energy_drift_smooth():
    g = Grid(20.0, 512)
    u0 = 1e-2 * gen.gaussian(g, 0.0, 1.0)
    v0 = 1.0 + 1e-2 * gen.gaussian(g, 0.0, 1.0)
    th0 = 1.0 + 1e-2 * Field(g, derivative(gen.gaussian(g, 0.0, 1.0).values, g))
    sol = fs.solve_full(v0, u0, th0, fs.FullParams(), LAD, tol=1e-12)
    assert sol.report()["drift"]["energy"] <= 1e-6


def test_full_data_size_nonzero_mean_temperature():
    g = Grid(20.0, 256)
    assert fs.data_size(Field.constant(g, 1.0), Field.zeros(g), 1.0 + gen.gaussian(g)) == math.inf


# --- finite-difference oracle


def test_cyclic_solver():
    rng = np.random.default_rng(0)
    n = 16
    lo, di, up, b = rng.normal(size=n), rng.normal(size=n) + 5, rng.normal(size=n), rng.normal(size=n)
    A = np.diag(di) + np.diag(up[:-1], 1) + np.diag(lo[1:], -1)
    A[0, -1] = lo[0]
    A[-1, 0] = up[-1]
    assert np.max(np.abs(A @ solve_cyclic(lo, di, up, b) - b)) < 1e-12


def test_fd_step_lands_on_T():
    dt, steps = FDConfig(0.1).step(Grid(20.0, 512))
    assert dt * steps == pytest.approx(0.1, rel=1e-14) and dt <= 40 / 512 / 4
    with pytest.raises(ConfigurationError):
        FDConfig(0.1, dt=1.0).step(Grid(20.0, 512))


def test_fd_conserves_mass_and_momentum():
    g = Grid(20.0, 256)
    u0 = 1e-2 * gen.gaussian(g, 0.0, 1.0)
    v0 = 1.0 + 1e-2 * gen.gaussian(g, 1.0, 1.0)
    v, u = fd_solve_isentropic(v0, u0, ise.IsentropicParams(), FDConfig(0.05))
    assert abs(np.sum(u) - np.sum(u0.values)) * g.h < 1e-14
    assert abs(np.sum(v - 1) - np.sum(v0.values - 1)) * g.h < 1e-13


def test_mild_vs_fd_small():
    g = Grid(20.0, 1024)
    u0 = 1e-2 * gen.gaussian(g, 0.0, 1.0)
    v0 = 1.0 + 1e-2 * gen.gaussian(g, 0.0, 1.0)
    vf, uf = fd_solve_isentropic(v0, u0, ise.IsentropicParams(), FDConfig(0.1))
    s = ise.solve(v0, u0, ise.IsentropicParams(), TimeLadder(0.1, 128), tol=1e-12)
    assert np.max(np.abs(uf - s.u.data[-1])) < 1e-5
    assert np.max(np.abs(vf - shift(s.v.data[-1], g, g.h / 2))) < 1e-5


def test_mild_vs_fd_full_small():
    g = Grid(20.0, 1024)
    u0 = 1e-2 * gen.gaussian(g, 0.0, 1.0)
    v0 = 1.0 + 1e-2 * gen.gaussian(g, 0.0, 1.0)
    th0 = 1.0 + 1e-2 * Field(g, derivative(gen.gaussian(g, 0.0, 1.0).values, g))
    vf, uf, tf = fd_solve_full(v0, u0, th0, fs.FullParams(), FDConfig(0.1))
    s = fs.solve_full(v0, u0, th0, fs.FullParams(), TimeLadder(0.1, 128), tol=1e-12)
    assert np.max(np.abs(uf - s.u.data[-1])) < 1e-5
    assert np.max(np.abs(tf - shift(s.theta.data[-1], g, g.h / 2))) < 1e-5
