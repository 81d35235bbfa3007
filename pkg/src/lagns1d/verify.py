"""Decay-rate audits of solver output and the product / composition estimates."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .audit import EstimateAudit, safe_ratio
from .duhamel import AUDIT_MAX_LEVEL, random_shape, random_source
from .errors import ConfigurationError
from .grid import Grid, TimeLadder, Trajectory
from .norms import BV, NormParams, space_derivative, weighted_norm


def _node_lp(tr: Trajectory, p):
    a = np.abs(tr.data)
    if math.isinf(p):
        return a.max(axis=1)
    return (np.sum(a**p, axis=1) * tr.grid.h) ** (1.0 / p)


def _node_bv(tr: Trajectory):
    return np.sum(np.abs(np.diff(tr.data, axis=1)), axis=1)


def loglog_slope(t, y):
    """Least-squares slope of log y against log t, with the residual norm."""
    lt, ly = np.log(t), np.log(y)
    A = np.vstack([lt, np.ones_like(lt)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = float(np.sqrt(res[0])) if res.size else 0.0
    return float(coef[0]), resid


@dataclass
class DecayReport:
    """One entry per claim; ratios are taken over interior ladder nodes."""

    M: float
    entries: list = field(default_factory=list)
    slope: dict = field(default_factory=dict)

    def add(self, claim, weight, values, t, M):
        env = (1.0 + 1.0 / t) * M
        env_sqrt = (1.0 + 1.0 / np.sqrt(t)) * M
        ratio = [safe_ratio(a, b) for a, b in zip(values, env)]
        ratio_sqrt = [safe_ratio(a, b) for a, b in zip(values, env_sqrt)]
        entry = {
            "claim": claim,
            "weight": weight,
            "measured_sup": float(np.max(values)),
            "max_ratio": float(max(ratio)),
            "max_ratio_sqrt_envelope": float(max(ratio_sqrt)),
            "ratio_to_M": safe_ratio(float(np.max(values)), M),
        }
        if not all(math.isfinite(entry[k]) for k in ("measured_sup", "max_ratio", "max_ratio_sqrt_envelope")):
            raise FloatingPointError(f"non-finite decay ratio for claim {claim}")
        self.entries.append(entry)
        return entry

    def entry(self, claim):
        for e in self.entries:
            if e["claim"] == claim:
                return e
        raise KeyError(claim)

    def to_json(self) -> dict:
        return {"M": self.M, "entries": self.entries, "slope": self.slope}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    def format_table(self) -> str:
        rows = [("claim", "weight", "sup", "ratio (1+1/t)M", "ratio (1+1/sqrt t)M")]
        for e in self.entries:
            rows.append(
                (
                    e["claim"],
                    e["weight"],
                    f"{e['measured_sup']:.4g}",
                    f"{e['max_ratio']:.4g}",
                    f"{e['max_ratio_sqrt_envelope']:.4g}",
                )
            )
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
        if self.slope:
            lines.append(
                f"slope of {self.slope['quantity']} on [{self.slope['t_min']:.3g}, {self.slope['t_max']:.3g}]: "
                f"{self.slope['value']:.4f} (residual {self.slope['residual']:.2e})"
            )
        return "\n".join(lines)


def slope_window(t, T, t_min=0.01, t_max=0.1):
    """Nodes in [t_min, t_max], excluding the first two nodes and t > T/2."""
    idx = np.arange(t.size)
    return (idx >= 2) & (t >= t_min) & (t <= min(t_max, T / 2))


def _fit_slope(report, t, y, T, quantity, window):
    mask = slope_window(t, T, *window) & (y > 0)
    if mask.sum() < 2:
        report.slope = {"quantity": quantity, "value": math.nan, "residual": math.nan, "t_min": window[0],
                        "t_max": window[1], "nodes": int(mask.sum())}
        return
    s, r = loglog_slope(t[mask], y[mask])
    report.slope = {"quantity": quantity, "value": s, "residual": r, "t_min": float(t[mask][0]),
                    "t_max": float(t[mask][-1]), "nodes": int(mask.sum())}


def decay_audit_isentropic(v, u, M1, params: NormParams = NormParams(), window=(0.01, 0.1)) -> DecayReport:
    g = params.gamma
    t = v.times[1:]
    dv = v - 1.0
    ux = space_derivative(u)
    l1bv = (_node_lp(dv, 1) + _node_bv(dv) + _node_lp(u, 1) + _node_bv(u))[1:]
    sup = np.maximum(_node_lp(dv, math.inf), _node_lp(u, math.inf))[1:]
    uxi = _node_lp(ux, math.inf)[1:]
    rep = DecayReport(M1)
    rep.add("L1_BV", "1", l1bv, t, M1)
    rep.add("Linf", "sqrt(t+1)", np.sqrt(t + 1) * sup, t, M1)
    rep.add("ux_Linf", "sqrt(t)", np.sqrt(t) * uxi, t, M1)
    rep.add("ux_Linf_local", "t^(1-gamma)", t ** (1 - g) * uxi, t, M1)
    rep.add("total", "sum", l1bv + np.sqrt(t + 1) * sup + np.sqrt(t) * uxi, t, M1)
    _fit_slope(rep, t, uxi, v.ladder.T, "ux_Linf", window)
    return rep


def decay_audit_full(v, u, theta, M2, params: NormParams = NormParams(), window=(0.01, 0.1)) -> DecayReport:
    g = params.gamma
    t = v.times[1:]
    dv, dth = v - 1.0, theta - 1.0
    ux, thx = space_derivative(u), space_derivative(theta)
    l1bv = sum(_node_lp(f, 1) + _node_bv(f) for f in (dv, u, dth))[1:]
    sup = np.maximum.reduce([_node_lp(f, math.inf) for f in (dv, u, dth)])[1:]
    uxi = _node_lp(ux, math.inf)[1:]
    thxi = _node_lp(thx, math.inf)[1:]
    th_all = (_node_lp(dth, 1) + _node_bv(dth) + _node_lp(dth, math.inf))[1:]
    rep = DecayReport(M2)
    rep.add("L1_BV", "1", l1bv, t, M2)
    rep.add("Linf", "sqrt(t+1)", np.sqrt(t + 1) * sup, t, M2)
    rep.add("ux_Linf", "sqrt(t)", np.sqrt(t) * uxi, t, M2)
    rep.add("thetax_Linf", "sqrt(t)", np.sqrt(t) * thxi, t, M2)
    rep.add("theta_L1_BV_Linf", "t^(1-gamma)", t ** (1 - g) * th_all, t, M2)
    rep.add("theta_Linf", "t^(1-gamma)", t ** (1 - g) * _node_lp(dth, math.inf)[1:], t, M2)
    rep.add("u_L1", "1", _node_lp(u, 1)[1:], t, M2)
    _fit_slope(rep, t, uxi, v.ladder.T, "ux_Linf", window)
    return rep


# --- product and composition estimates ----------------------------------------


def random_bounded(grid: Grid, ladder: TimeLadder, rng, bound: float) -> Trajectory:
    """Hoelder-in-time field ``sum_i (a_i + b_i t**e_i) phi_i(x)`` scaled to max ``bound``."""
    t = ladder.nodes[:, None] / ladder.T
    data = np.zeros((len(ladder), grid.n))
    for _ in range(2):
        a, b = rng.uniform(-1, 1, size=2)
        e = rng.uniform(0.1, 1.0)
        data += (a + b * t**e) * random_shape(grid, rng)[None, :]
    return Trajectory(ladder, grid, data * (bound / np.max(np.abs(data))))


COMPOSITIONS = {
    "square": lambda z: z**2,
    "inverse": lambda z: 1.0 / (1.0 + z),
}


def product_composition_audit(
    trials: int,
    params: NormParams = NormParams(),
    n: int = 1024,
    K: int = 128,
    L: float = 20.0,
    T: float = 0.25,
    seed: int = 0,
) -> EstimateAudit:
    """Max ratios for the two product estimates and the three composition estimates."""
    if trials < 10:
        raise ConfigurationError(f"product/composition audit needs at least 10 trials, got {trials}")
    grid = Grid(L, n)
    ladder = TimeLadder(T, K)
    audit = EstimateAudit("product_composition", {"L": L, "n": n, "K": K, "T": T, "seed": seed})

    def X(tr, s, p):
        return weighted_norm(tr, s, p, params).total

    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        sigma = rng.uniform(0.0, 1.0)
        p = float(rng.choice((1.0, 2.0, math.inf)))
        g = random_bounded(grid, ladder, rng, rng.uniform(0.1, 2.0))
        h = random_source(grid, ladder, rng, sigma)
        gh = g * h
        audit.add(
            safe_ratio(X(gh, sigma, p), X(g, 0.0, math.inf) * X(h, sigma, p)),
            estimate="product_X", trial=i, sigma=sigma, p=str(p),
        )
        rhs = (X(g, 0.0, BV) + X(g, 0.0, math.inf)) * (X(h, sigma, BV) + X(h, sigma, math.inf))
        audit.add(safe_ratio(X(gh, sigma, BV), rhs), estimate="product_BV", trial=i, sigma=sigma, p="BV")

        a = random_bounded(grid, ladder, rng, rng.uniform(0.05, 0.45))
        b = random_bounded(grid, ladder, rng, rng.uniform(0.05, 0.45))
        d = a - b
        for name, B in COMPOSITIONS.items():
            diff = a.with_data(B(a.data) - B(b.data))
            sa, sb = X(a, 0.0, math.inf), X(b, 0.0, math.inf)
            audit.add(
                safe_ratio(X(diff, 0.0, math.inf), X(d, 0.0, math.inf) * (1 + sa + sb)),
                estimate=f"composition_Linf_{name}", trial=i, sigma=0.0, p="inf",
            )
            audit.add(
                safe_ratio(X(diff, 0.0, 1.0), X(d, 0.0, 1.0) * (1 + sa + sb)),
                estimate=f"composition_L1_{name}", trial=i, sigma=0.0, p="1",
            )
            rhs = (X(d, 0.0, BV) + X(d, 0.0, math.inf)) * (1 + X(a, 0.0, BV) + X(b, 0.0, BV) + sa + sb) ** 2
            audit.add(
                safe_ratio(X(diff, 0.0, BV), rhs),
                estimate=f"composition_BV_{name}", trial=i, sigma=0.0, p="BV",
            )
    audit.grid["max_level"] = AUDIT_MAX_LEVEL
    return audit
