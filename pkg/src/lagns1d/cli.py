"""Command line: ``lagns1d solve | audit <kind> | norms <dump> <norm>``.

Exit codes: 0 success, 2 configuration error, 3 numerical divergence,
4 broken invariant.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import time
from pathlib import Path


from . import duhamel, heat_kernel, io, norms, verify
from .config import SolverConfig, load_config
from .errors import (
    ConfigurationError,
    DivergenceError,
    InsufficientDataError,
    InvariantError,
    NoAntiderivativeError,
    PositivityError,
    PropagationError,
    TruncationError,
)

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_INVARIANT = 0, 2, 3, 4

AUDIT_KINDS = ("kernel", "product", "contraction", "decay") + duhamel.SMOOTHING_KINDS


def _set_threads():
    value = os.environ.get("LAGNS1D_THREADS")
    if not value:
        return
    import numba

    try:
        k = int(value)
    except ValueError:
        raise ConfigurationError(f"LAGNS1D_THREADS must be an integer, got {value!r}") from None
    if k < 1:
        raise ConfigurationError(f"LAGNS1D_THREADS must be >= 1, got {k}")
    numba.set_num_threads(min(k, numba.config.NUMBA_NUM_THREADS))


def _write_json(out: Path, name: str, payload: dict, started: float):
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.json"
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    stamp = {"written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "elapsed_s": time.time() - started}
    (out / f"{name}.timestamp.json").write_text(json.dumps(stamp, sort_keys=True) + "\n")
    return path


def _load(args) -> SolverConfig:
    if args.config is None:
        cfg = SolverConfig()
        if args.seed is not None:
            cfg.seed = args.seed
        return cfg.validate()
    return load_config(args.config, args.seed)


def cmd_solve(args) -> int:
    from . import full_system, isentropic

    cfg = _load(args)
    if args.dry_run:
        print(json.dumps(cfg.to_json(), sort_keys=True, indent=2))
        return EXIT_OK
    started = time.time()
    grid, ladder, np_ = cfg.grid(), cfg.ladder(), cfg.norm_params()
    data = cfg.data(grid)
    params = cfg.physics()
    out = Path(args.out)
    if cfg.system == "isentropic":
        sol = isentropic.solve(data["v0"], data["u0"], params, ladder, cfg.tol, cfg.max_iter, np_)
        report = sol.report(np_)
        report["decay"] = verify.decay_audit_isentropic(sol.v, sol.u, sol.M1, np_).to_json()
        finals = {"v": sol.v, "u": sol.u}
    else:
        sol = full_system.solve_full(
            data["v0"], data["u0"], data["theta0"], params, ladder, cfg.tol, cfg.max_iter, np_
        )
        report = sol.report(np_, params)
        report["decay"] = verify.decay_audit_full(sol.v, sol.u, sol.theta, sol.M2, np_).to_json()
        finals = {"v": sol.v, "u": sol.u, "theta": sol.theta}
    report["system"] = cfg.system
    report["config"] = cfg.to_json()
    path = _write_json(out, "run_report", report, started)
    for name, tr in finals.items():
        io.write_field(out / f"{name}_T.f1d", tr.field(-1), {"name": name, "t": float(tr.times[-1])})
    status = "converged" if report["converged"] else "max_iter reached"
    print(f"{cfg.system}: {status} after {report['iterations']} iterations; report {path}")
    return EXIT_OK if report["converged"] else EXIT_DIVERGED


def cmd_audit(args) -> int:
    from . import isentropic

    kind = args.kind
    if kind not in AUDIT_KINDS:
        raise ConfigurationError(f"unknown audit kind {kind!r}; valid kinds: {', '.join(AUDIT_KINDS)}")
    cfg = _load(args)
    if args.dry_run:
        print(json.dumps({"kind": kind, **cfg.to_json()}, sort_keys=True, indent=2))
        return EXIT_OK
    started = time.time()
    np_ = cfg.norm_params()
    if kind == "kernel":
        grid = cfg.grid()
        audits = [heat_kernel.kernel_bound_audit([1e-3, 1e-2, 1e-1, 1.0], [1.0, 2.0, math.inf], grid)]
    elif kind == "product":
        n, K = cfg.resolution_list()[0]
        audits = [verify.product_composition_audit(max(cfg.trials, 10), np_, n, K, cfg.L, cfg.T, cfg.seed)]
    elif kind == "contraction":
        audits = [isentropic.contraction_audit(cfg.grid(), K=cfg.K, norm_params=np_)]
    elif kind == "decay":
        grid, ladder = cfg.grid(), cfg.ladder()
        data = cfg.data(grid)
        sol = isentropic.solve(data["v0"], data["u0"], cfg.physics(), ladder, cfg.tol, cfg.max_iter, np_)
        rep = verify.decay_audit_isentropic(sol.v, sol.u, sol.M1, np_)
        print(rep.format_table())
        path = _write_json(Path(args.out), "audit_decay", rep.to_json(), started)
        print(f"report {path}")
        return EXIT_OK
    else:
        audits = [
            duhamel.smoothing_audit(kind, cfg.trials, np_, n, K, cfg.L, cfg.T, cfg.seed)
            for n, K in cfg.resolution_list()
        ]
    for a in audits:
        print(a.format_table() if kind == "kernel" else f"{a.id} n={a.grid['n']} K={a.grid.get('K', '-')}: "
              f"max_ratio={a.max_ratio:.6g}")
    payload = {"kind": kind, "audits": [a.to_json() for a in audits]}
    path = _write_json(Path(args.out), f"audit_{kind}", payload, started)
    print(f"report {path}")
    return EXIT_OK


_NORM = re.compile(r"^\s*([a-z_0-9]+)\s*(?:\(([^)]*)\))?\s*$")


def evaluate_norm(f, spec: str) -> float:
    """Evaluate ``lp(p) | linf | bv | gagliardo(s,p) | sobolev(s,p) | negsob(beta,p)``."""
    m = _NORM.match(spec.lower())
    if not m:
        raise ConfigurationError(f"malformed norm spec {spec!r}")
    name, arg = m.group(1), m.group(2)
    try:
        a = [float(x) for x in arg.split(",")] if arg else []
    except ValueError:
        raise ConfigurationError(f"norm arguments must be numbers: {spec!r}") from None
    table = {
        "lp": (1, lambda p: norms.lp_norm(f, p)),
        "l1": (0, lambda: norms.lp_norm(f, 1.0)),
        "linf": (0, lambda: norms.lp_norm(f, math.inf)),
        "bv": (0, lambda: norms.bv_norm(f)),
        "gagliardo": (2, lambda s, p: norms.gagliardo_norm(f, s, p)),
        "sobolev": (2, lambda s, p: norms.sobolev_norm(f, s, p)),
        "negsob": (2, lambda b, p: norms.negative_sobolev_norm(f, b, p)),
    }
    if name not in table:
        raise ConfigurationError(f"unknown norm {name!r}; known: {', '.join(table)}")
    arity, fn = table[name]
    if len(a) != arity:
        raise ConfigurationError(f"{name} takes {arity} arguments, got {len(a)}")
    return float(fn(*a))


def cmd_norms(args) -> int:
    f = io.read_field(args.dump)
    print(repr(evaluate_norm(f, args.norm)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="configuration file")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--dry-run", action="store_true", help="validate and print the resolved config")

    parser = argparse.ArgumentParser(prog="lagns1d", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", parents=[common], help="run a fixed-point solve")
    p.set_defaults(func=cmd_solve)
    p = sub.add_parser("audit", parents=[common], help=f"run an estimate audit ({', '.join(AUDIT_KINDS)})")
    p.add_argument("kind")
    p.set_defaults(func=cmd_audit)
    p = sub.add_parser("norms", help="evaluate a norm of a field dump")
    p.add_argument("dump")
    p.add_argument("norm", help="e.g. bv, lp(2), gagliardo(0.5,2), negsob(0.6667,1.2)")
    p.set_defaults(func=cmd_norms)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _set_threads()
        return args.func(args)
    except (ConfigurationError, InsufficientDataError, TruncationError, NoAntiderivativeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        if exc.suggested_T is not None:
            print(f"suggestion: rerun with T = {exc.suggested_T:g}", file=sys.stderr)
        return EXIT_DIVERGED
    except (PositivityError, PropagationError) as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
