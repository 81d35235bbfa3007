"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Each test prints its verdict with the measured numbers before asserting,
so the log shows the values whether or not the criterion holds.
"""

import math
import time

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from lagns1d import full_system as fs
from lagns1d import generators as gen
from lagns1d import isentropic as ise
from lagns1d.duhamel import SMOOTHING_KINDS, DuhamelProblem, assemble, smoothing_audit
from lagns1d.grid import Field, Grid, TimeLadder, Trajectory
from lagns1d.heat_kernel import KernelQuery, fractional_apply, kernel_bound_audit, kernel_norm
from lagns1d.norms import (
    bv_norm,
    gagliardo_norm,
    lp_norm,
    negative_sobolev_norm,
    sobolev_norm,
)
from lagns1d.oracle_fd import FDConfig, fd_solve_full, fd_solve_isentropic
from lagns1d.spectral import derivative, shift
from lagns1d.verify import decay_audit_isentropic

GAMMA = 0.01


@pytest.fixture
def verdict(capsys):
    def emit(criterion, checks, elapsed, limit):
        """``checks`` is a list of (label, ok, measured) triples."""
        checks = checks + [("runtime", elapsed < limit, f"{elapsed:.1f}s < {limit:g}s")]
        ok = all(c[1] for c in checks)
        parts = "; ".join(f"{label} {'ok' if good else 'FAILED'} ({shown})" for label, good, shown in checks)
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {parts}")
        failed = [c[0] for c in checks if not c[1]]
        assert not failed, f"criterion {criterion} failed: {', '.join(failed)}"

    return emit


def test_criterion_1_kernel_exactness(verdict):
    t0 = time.time()
    g = Grid(20.0, 4096)
    ts = (1e-3, 1e-2, 1e-1, 1.0)
    mass = max(abs(kernel_norm(KernelQuery(t), g, 1) - 1.0) for t in ts)
    grad = max(abs(kernel_norm(KernelQuery(t, 0, 1), g, 1) - (math.pi * t) ** -0.5) * math.sqrt(t) for t in ts)
    audit = kernel_bound_audit(list(ts), [1.0, 2.0, math.inf], g)
    pointwise = max(r["ratio"] for r in audit.rows(kind="pointwise"))
    worst = max(audit.rows(kind="pointwise"), key=lambda r: r["ratio"])
    verdict(
        1,
        [
            ("|K|_1 = 1 +- 1e-8", mass <= 1e-8, f"max dev {mass:.2e}"),
            ("|K_x|_1 sqrt(t) = pi^-1/2 +- 1e-6", grad <= 1e-6, f"max dev {grad:.2e}"),
            (
                "pointwise constant <= 10",
                pointwise <= 10.0,
                f"max {pointwise:.4g} at j={worst['j']}, m={worst['m']}",
            ),
        ],
        time.time() - t0,
        5.0,
    )


def _sine_mms(n, K, nu, T, with_F):
    g = Grid(math.pi, n)
    lad = TimeLadder(T, K)
    t, x = lad.nodes[:, None], g.x[None, :]
    exact = np.exp(-t) * np.sin(x)
    if with_F:
        # d_x F = -2 e^{-t} sin 2x is closed by R
        F = Trajectory(lad, g, np.exp(-t) * np.cos(2 * x))
        R = Trajectory(lad, g, (nu - 1) * np.exp(-t) * np.sin(x) + 2 * np.exp(-t) * np.sin(2 * x))
    else:
        F, R = None, Trajectory(lad, g, (nu - 1) * np.exp(-t) * np.sin(x))
    f = assemble(DuhamelProblem(nu, Field(g, np.sin(g.x)), lad, F, R))
    return float(np.max(np.abs(f.data - exact)))


def _space_problem(n, K):
    # f* = e^{-t} exp(sin x) has every Fourier mode, so n controls the error
    g = Grid(math.pi, n)
    lad = TimeLadder(0.25, K)
    t, x = lad.nodes[:, None], g.x[None, :]
    ex = np.exp(-t) * np.exp(np.sin(x))
    F = Trajectory(lad, g, 0.3 * ex)
    R = Trajectory(lad, g, ex * (-1 - (np.cos(x) ** 2 - np.sin(x))) - 0.3 * ex * np.cos(x))
    return assemble(DuhamelProblem(1.0, Field(g, np.exp(np.sin(g.x))), lad, F, R))


def test_criterion_2_duhamel_correctness(verdict):
    t0 = time.time()
    nu = 0.5
    e_plain = _sine_mms(1024, 256, nu, 0.25, False)
    e_grad = _sine_mms(1024, 256, nu, 0.25, True)
    eK = [_sine_mms(64, K, nu, 1.0, True) for K in (64, 128, 256)]
    order_K = min(math.log2(a / b) for a, b in zip(eK, eK[1:]))
    ref = _space_problem(128, 32).data
    eh = [np.max(np.abs(_space_problem(n, 32).data - ref[:, :: 128 // n])) for n in (16, 32)]
    order_h = math.log2(eh[0] / eh[1])
    verdict(
        2,
        [
            ("plain-forced error <= 1e-5", e_plain <= 1e-5, f"{e_plain:.2e}"),
            ("grad-forced error <= 1e-5", e_grad <= 1e-5, f"{e_grad:.2e}"),
            ("order in 1/K >= 1", order_K >= 1.0, f"{order_K:.2f}"),
            ("order in h >= 2", order_h >= 2.0, f"{order_h:.2f} (errors {eh[0]:.1e}, {eh[1]:.1e})"),
        ],
        time.time() - t0,
        30.0,
    )


def test_criterion_3_smoothing_audits(verdict):
    t0 = time.time()
    checks = []
    for kind in SMOOTHING_KINDS:
        a = smoothing_audit(kind, 25, n=1024, K=128)
        b = smoothing_audit(kind, 25, n=2048, K=256)
        ra, rb = a.max_ratio, b.max_ratio
        finite = math.isfinite(ra) and math.isfinite(rb) and ra > 0 and rb > 0
        change = max(ra, rb) / min(ra, rb) if finite else math.inf
        checks.append((kind, finite and change <= 2.0, f"{ra:.4g} -> {rb:.4g}"))
    verdict(3, checks, time.time() - t0, 300.0)


def _criterion4_data(g, seed=7):
    v0 = gen.sample("sum(constant(1), step(0.05, -1, 1))", g)
    u0 = gen.rough_velocity(GAMMA, seed, 1e-2, g)
    return v0, u0


def test_criterion_4_isentropic_fixed_point(verdict):
    t0 = time.time()
    g = Grid(20.0, 4096)
    v0, u0 = _criterion4_data(g)
    sol = ise.solve(v0, u0, ise.IsentropicParams(), TimeLadder(0.25, 256), tol=1e-10, max_iter=40)
    rep = sol.report()
    late = max(sol.state.ratios[1:]) if len(sol.state.ratios) > 1 else 0.0
    drift = max(rep["drift"]["mass"], rep["drift"]["momentum"])
    verdict(
        4,
        [
            ("residual <= 1e-10 in <= 40", sol.converged, f"{sol.state.residual:.1e} after {sol.state.k}"),
            ("ratios <= 0.5 from iterate 3", late <= 0.5, f"max {late:.3f}"),
            ("inf v >= 0.9", rep["box"]["inf_v"] >= 0.9, f"{rep['box']['inf_v']:.4f}"),
            ("mass/momentum drift <= 1e-8", drift <= 1e-8, f"{drift:.1e}"),
        ],
        time.time() - t0,
        120.0,
    )


def test_criterion_5_contraction_scaling(verdict):
    t0 = time.time()
    audit = ise.contraction_audit(Grid(20.0, 4096))
    qT = [r["ratio"] for r in audit.rows(sweep="T")]
    qM = [r["ratio"] for r in audit.rows(sweep="scale")]
    dec_T = all(b < a for a, b in zip(qT, qT[1:]))
    dec_M = all(b < a for a, b in zip(qM, qM[1:]))
    verdict(
        5,
        [
            ("decreasing in T (0.4..0.05)", dec_T, ", ".join(f"{q:.5f}" for q in qT)),
            ("decreasing in M1 (1e-2..2.5e-3)", dec_M, ", ".join(f"{q:.5f}" for q in qM)),
        ],
        time.time() - t0,
        300.0,
    )


def test_criterion_6_oracle_equivalence(verdict):
    t0 = time.time()
    g = Grid(20.0, 4096)
    u0 = 1e-2 * gen.gaussian(g, 0.0, 1.0)
    v0 = 1.0 + 1e-2 * gen.gaussian(g, 0.0, 1.0)
    th0 = 1.0 + 1e-2 * Field(g, derivative(gen.gaussian(g, 0.0, 1.0).values, g))
    lad = TimeLadder(0.1, 256)

    vf, uf = fd_solve_isentropic(v0, u0, ise.IsentropicParams(), FDConfig(0.1))
    s = ise.solve(v0, u0, ise.IsentropicParams(), lad, tol=1e-12)
    d_ise = max(np.max(np.abs(uf - s.u.data[-1])), np.max(np.abs(vf - shift(s.v.data[-1], g, g.h / 2))))

    vf, uf, tf = fd_solve_full(v0, u0, th0, fs.FullParams(), FDConfig(0.1))
    s = fs.solve_full(v0, u0, th0, fs.FullParams(), lad, tol=1e-12)
    d_full = max(
        np.max(np.abs(uf - s.u.data[-1])),
        np.max(np.abs(vf - shift(s.v.data[-1], g, g.h / 2))),
        np.max(np.abs(tf - shift(s.theta.data[-1], g, g.h / 2))),
    )
    verdict(
        6,
        [
            ("isentropic Linf diff <= 1e-4", d_ise <= 1e-4, f"{d_ise:.2e}"),
            ("full Linf diff <= 1e-4", d_full <= 1e-4, f"{d_full:.2e}"),
        ],
        time.time() - t0,
        60.0,
    )


def test_criterion_7_decay_rates(verdict):
    t0 = time.time()
    g = Grid(20.0, 4096)
    lad = TimeLadder(0.25, 256)
    slopes, ratios = [], []
    for seed in range(7, 12):
        v0, u0 = _criterion4_data(g, seed)
        sol = ise.solve(v0, u0, ise.IsentropicParams(), lad)
        rep = decay_audit_isentropic(sol.v, sol.u, sol.M1)
        slopes.append(rep.slope["value"])
        ratios.append(rep.entry("ux_Linf")["max_ratio"])
    in_band = all(-1.05 <= s <= -0.85 for s in slopes)
    verdict(
        7,
        [
            ("u_x slope in [-1.05, -0.85]", in_band, "slopes " + ", ".join(f"{s:.3f}" for s in slopes)),
            ("sqrt(t)|u_x| / ((1+1/t)M1) <= 5", max(ratios) <= 5.0, f"max {max(ratios):.3g}"),
        ],
        time.time() - t0,
        300.0,
    )


def test_criterion_8_full_system(verdict):
    t0 = time.time()
    g = Grid(20.0, 4096)
    lad = TimeLadder(0.25, 256)
    params = fs.FullParams()
    consts, conv = [], None
    for seed in range(7, 12):
        v0, u0, th0 = fs.rough_data(g, 1e-2, seed)
        sol = fs.solve_full(v0, u0, th0, params, lad, tol=1e-9, max_iter=60)
        if conv is None:
            conv = sol
        t = lad.nodes[1:]
        sup = np.abs(sol.theta.data[1:] - 1.0).max(axis=1)
        consts.append(float(np.max(t ** (1 - GAMMA) * sup)) / sol.M2)
    spread = max(consts) / min(consts)

    u0 = 1e-2 * gen.gaussian(g, 0.0, 1.0)
    v0 = 1.0 + 1e-2 * gen.gaussian(g, 0.0, 1.0)
    th0 = 1.0 + 1e-2 * Field(g, derivative(gen.gaussian(g, 0.0, 1.0).values, g))
    smooth = fs.solve_full(v0, u0, th0, params, lad, tol=1e-12)
    drift = smooth.report()["drift"]["energy"]

    # K_gas = 0 with theta = 1 against the isentropic step with zero pressure
    v0, u0 = _criterion4_data(g)
    one = Field.constant(g, 1.0)
    P0 = fs.FullParams(K_gas=0.0)
    st = fs.initial_state(u0, one, v0, P0, lad)
    st = fs.CoupledState(0, st.w, Trajectory.zeros(lad, g) + 1.0, st.v)
    a = fs.coupled_step(st, u0, one, v0, P0, lad)
    b = ise.picard_step(
        ise.PicardState(0, st.w, st.v), u0, v0, ise.IsentropicParams(pressure=lambda v: 0.0 * v), lad
    )
    dec = float(np.max(np.abs(a.w.data - b.w.data)))
    verdict(
        8,
        [
            (
                "M2=1e-2 residual <= 1e-9 in <= 60",
                conv.converged,
                f"{conv.state.residual:.1e} after {conv.state.k}",
            ),
            ("smooth energy drift <= 1e-6", drift <= 1e-6, f"{drift:.1e}"),
            ("theta decay C within 2x over 5 seeds", spread <= 2.0, "C " + ", ".join(f"{c:.3g}" for c in consts)),
            ("K_gas=0 decoupling <= 1e-12", dec <= 1e-12, f"{dec:.1e}"),
        ],
        time.time() - t0,
        300.0,
    )


def test_criterion_9_norm_toolbox(verdict):
    t0 = time.time()
    g = Grid(20.0, 4096)
    bv = bv_norm(gen.step(g, 0.1, -1.0, 1.0))

    f = gen.gaussian(g, 0.0, 1.0)
    c = 2 * math.pi / (gamma_fn(2.0) * math.sin(math.pi / 2))
    ref = c * lp_norm(fractional_apply(f, 0.5), 2.0) ** 2
    gag_rel = abs(gagliardo_norm(f, 0.5, 2.0) ** 2 / ref - 1.0)

    x = g.x
    dg = Field(g, -x / 2 * np.exp(-(x**2) / 4) / math.sqrt(4 * math.pi))
    unwind = abs(negative_sobolev_norm(dg, 2 / 3, 1.2) - gagliardo_norm(f - f.mean(), 1 / 3, 1.2))

    rng = np.random.default_rng(2024)
    gs = Grid(20.0, 1024)
    worst_planch = 0.0
    for _ in range(10):
        a, b = rng.normal(size=gs.n), rng.normal(size=gs.n)
        p, q = Field(gs, a - a.mean()), Field(gs, b - b.mean())
        lhs = np.sum(p.values * q.values) * gs.h
        rhs = np.sum(fractional_apply(p, 0.3).values * fractional_apply(q, -0.3).values) * gs.h
        worst_planch = max(worst_planch, abs(lhs - rhs) / abs(lhs))

    small = Grid(20.0, 256)
    norms = {
        "L1": lambda h: lp_norm(h, 1.0),
        "L3": lambda h: lp_norm(h, 3.0),
        "Linf": lambda h: lp_norm(h, math.inf),
        "BV": bv_norm,
        "W^{0.3,1}": lambda h: gagliardo_norm(h, 0.3, 1.0),
        "W^{0.5,2}": lambda h: sobolev_norm(h, 0.5, 2.0),
        "W^{-0.5,1.2}": lambda h: negative_sobolev_norm(h, 0.5, 1.2),
    }
    bad = []
    for name, nrm in norms.items():
        for _ in range(100):
            a = rng.normal(size=small.n) * np.exp(-small.x**2 / rng.uniform(1, 50))
            b = rng.normal(size=small.n) * np.exp(-small.x**2 / rng.uniform(1, 50))
            p, q = Field(small, a - a.mean()), Field(small, b - b.mean())
            lam = rng.uniform(-10, 10)
            if nrm(p + q) > (nrm(p) + nrm(q)) * (1 + 1e-12) + 1e-14:
                bad.append(f"{name} triangle")
            if abs(nrm(p * lam) - abs(lam) * nrm(p)) > 1e-12 * abs(lam) * nrm(p):
                bad.append(f"{name} homogeneity")
    verdict(
        9,
        [
            ("BV of step exact", bv == 0.2, f"{bv!r}"),
            ("Gagliardo vs Fourier within 2%", gag_rel <= 0.02, f"{gag_rel:.2%}"),
            ("negative-norm unwind exact", unwind <= 1e-12 * gagliardo_norm(f, 1 / 3, 1.2), f"{unwind:.1e}"),
            ("Plancherel <= 1e-8 relative", worst_planch <= 1e-8, f"{worst_planch:.1e}"),
            ("triangle/homogeneity x100", not bad, f"{len(bad)} violations" + (f": {bad[:3]}" if bad else "")),
        ],
        time.time() - t0,
        60.0,
    )
