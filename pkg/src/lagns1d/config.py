"""Solver configuration: bracketed sections of ``key = value`` lines.

Example::

    [run]
    system = isentropic
    seed = 0

    [grid]
    L = 20
    n = 4096

    [data]
    v0 = sum(constant(1), step(0.05, -1, 1))
    u0 = rough_velocity(0.01, 7, 0.01)
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import generators
from .errors import ConfigurationError
from .full_system import FullParams
from .grid import Grid, TimeLadder
from .isentropic import IsentropicParams
from .norms import NormParams

SYSTEMS = ("isentropic", "full")

_SCHEMA = {
    "run": {"system": str, "seed": int},
    "physics": {"mu": float, "A": float, "nu_exp": float, "kappa": float, "K_gas": float, "c_heat": float},
    "grid": {"L": float, "n": int},
    "ladder": {"T": float, "K": int, "q": float},
    "data": {"v0": str, "u0": str, "theta0": str},
    "norms": {"gamma": float, "alpha": float},
    "picard": {"tol": float, "max_iter": int},
    "audit": {"trials": int, "resolutions": str},
}


@dataclass
class SolverConfig:
    system: str = "isentropic"
    seed: int = 0
    mu: float = 1.0
    A: float = 1.0
    nu_exp: float = 1.4
    kappa: float = 1.0
    K_gas: float = 0.4
    c_heat: float = 1.0
    L: float = 20.0
    n: int = 4096
    T: float = 0.25
    K: int = 256
    q: float = 3.0
    v0: str = "constant(1)"
    u0: str = "constant(0)"
    theta0: str = "constant(1)"
    gamma: float = 0.01
    alpha: float = 0.005
    tol: float = math.nan
    max_iter: int = 0
    trials: int = 25
    resolutions: str = "512:64, 1024:128, 2048:256"
    source: str = field(default="<defaults>", compare=False)

    def __post_init__(self):
        if math.isnan(self.tol):
            self.tol = 1e-10 if self.system == "isentropic" else 1e-9
        if self.max_iter == 0:
            self.max_iter = 40 if self.system == "isentropic" else 60

    def validate(self) -> "SolverConfig":
        """Construct every object a run needs; raises ConfigurationError on the first problem."""
        if self.system not in SYSTEMS:
            raise ConfigurationError(f"system must be one of {SYSTEMS}, got {self.system!r}")
        self.grid()
        self.ladder()
        self.norm_params()
        self.physics()
        if not self.tol > 0:
            raise ConfigurationError(f"tolerance must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigurationError(f"seed must be a u64, got {self.seed}")
        self.resolution_list()
        names = ("v0", "u0", "theta0") if self.system == "full" else ("v0", "u0")
        for name in names:
            generators.parse_spec(getattr(self, name))
        return self

    def grid(self) -> Grid:
        return Grid(self.L, self.n)

    def ladder(self) -> TimeLadder:
        return TimeLadder(self.T, self.K, self.q)

    def norm_params(self) -> NormParams:
        return NormParams(self.gamma, self.alpha)

    def physics(self):
        if self.system == "isentropic":
            return IsentropicParams(self.mu, self.A, self.nu_exp)
        return FullParams(self.mu, self.kappa, self.K_gas, self.c_heat)

    def resolution_list(self):
        out = []
        for item in self.resolutions.split(","):
            try:
                n, K = item.strip().split(":")
                out.append((int(n), int(K)))
            except ValueError:
                raise ConfigurationError(f"resolutions must read 'n:K, n:K, ...', got {self.resolutions!r}") from None
        return out

    def data(self, grid: Grid):
        fields = {"v0": generators.sample(self.v0, grid), "u0": generators.sample(self.u0, grid)}
        if self.system == "full":
            fields["theta0"] = generators.sample(self.theta0, grid)
        return fields

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("source")
        return d


def load_config(path, seed: int | None = None) -> SolverConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigurationError(f"{path}: unknown section [{section}]; known: {', '.join(_SCHEMA)}")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigurationError(f"{path}: unknown key {key!r} in [{section}]")
            try:
                values[key] = _SCHEMA[section][key](raw.strip())
            except ValueError:
                raise ConfigurationError(f"{path}: [{section}] {key} = {raw!r} is not a valid value") from None
    if seed is not None:
        values["seed"] = seed
    cfg = SolverConfig(**values, source=str(path))
    return cfg.validate()
