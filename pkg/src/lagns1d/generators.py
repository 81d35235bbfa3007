"""Initial-data generators and the plain-text generator grammar.

Grammar::

    constant(c) | gaussian(center, width) | step(height, a, b)
    | rough_velocity(gamma, seed, amplitude)
    | rough_temperature(beta, seed, amplitude)
    | sum(spec, spec, ...)

``gaussian(c, w)`` is the heat kernel at time ``w**2`` centred at ``c``, so
its peak is ``(4 pi w**2)**-0.5``. ``step(height, a, b)`` is ``height`` on
the half-open interval ``[a, b)``.
"""

from __future__ import annotations

import re

import numpy as np

from . import spectral
from .errors import ConfigurationError
from .grid import Field, Grid
from .norms import gagliardo_norm, lp_norm, negative_sobolev_norm

DEFAULT_GAMMA = 0.01
FAMILIES = ("constant", "gaussian", "step", "rough_velocity", "rough_temperature", "sum")
_ARITY = {"constant": 1, "gaussian": 2, "step": 3, "rough_velocity": 3, "rough_temperature": 3}

_TOKEN = re.compile(r"\s*(?:([A-Za-z_]\w*)|([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(.))")


def _tokenize(text):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        name, num, sym = m.groups()
        if name:
            out.append(("name", name))
        elif num:
            out.append(("num", float(num)))
        elif sym and not sym.isspace():
            out.append(("sym", sym))
        pos = m.end()
    return out


def parse_spec(text: str):
    """Parse a generator string into nested ``(family, args)`` tuples."""
    tokens = _tokenize(text)
    pos = 0

    def expect(kind, value=None):
        nonlocal pos
        if pos >= len(tokens):
            raise ConfigurationError(f"unexpected end of generator spec {text!r}")
        tk = tokens[pos]
        if tk[0] != kind or (value is not None and tk[1] != value):
            raise ConfigurationError(f"malformed generator spec {text!r} near token {tk[1]!r}")
        pos += 1
        return tk[1]

    def node():
        nonlocal pos
        name = expect("name")
        if name not in FAMILIES:
            raise ConfigurationError(f"unknown generator family {name!r}; known: {', '.join(FAMILIES)}")
        expect("sym", "(")
        args = []
        while True:
            if pos < len(tokens) and tokens[pos] == ("sym", ")"):
                pos += 1
                break
            if name == "sum":
                args.append(node())
            else:
                args.append(expect("num"))
            if pos < len(tokens) and tokens[pos] == ("sym", ","):
                pos += 1
        if name != "sum" and len(args) != _ARITY[name]:
            raise ConfigurationError(f"{name} takes {_ARITY[name]} arguments, got {len(args)}")
        if name == "sum" and not args:
            raise ConfigurationError("sum() needs at least one term")
        return (name, tuple(args))

    tree = node()
    if pos != len(tokens):
        raise ConfigurationError(f"trailing input in generator spec {text!r}")
    return tree


def sample(spec, grid: Grid) -> Field:
    """Evaluate a generator spec (string or parsed tree) at the grid nodes."""
    tree = parse_spec(spec) if isinstance(spec, str) else spec
    name, args = tree
    if name == "constant":
        return Field.constant(grid, args[0])
    if name == "gaussian":
        return gaussian(grid, *args)
    if name == "step":
        return step(grid, *args)
    if name == "rough_velocity":
        g, seed, amp = args
        return rough_velocity(g, int(seed), amp, grid)
    if name == "rough_temperature":
        b, seed, amp = args
        return rough_temperature(b, int(seed), amp, grid)
    if name == "sum":
        out = Field.zeros(grid)
        for sub in args:
            out = out + sample(sub, grid)
        return out
    raise ConfigurationError(f"unknown generator family {name!r}")


def gaussian(grid: Grid, center: float = 0.0, width: float = 1.0) -> Field:
    if width <= 0:
        raise ConfigurationError(f"gaussian width must be positive, got {width}")
    d = grid.wrap(grid.x - center)
    return Field(grid, np.exp(-(d**2) / (4.0 * width**2)) / np.sqrt(4.0 * np.pi * width**2))


def step(grid: Grid, height: float, a: float, b: float) -> Field:
    if not b > a:
        raise ConfigurationError(f"step support needs a < b, got [{a}, {b})")
    if b - a >= 2 * grid.L:
        return Field.constant(grid, height)
    d = grid.wrap(grid.x - a)
    d = np.where(d < 0, d + 2 * grid.L, d)
    return Field(grid, np.where(d < b - a, float(height), 0.0))


def plateau_window(x, half_width):
    """Smooth cutoff: 1 on [-w/2, w/2], 0 outside [-w, w], C-infinity in between."""

    def psi(r):
        return np.where(r > 0, np.exp(-1.0 / np.where(r > 0, r, 1.0)), 0.0)

    r = np.clip((half_width - np.abs(x)) / (0.5 * half_width), 0.0, 1.0)
    a, b = psi(r), psi(1.0 - r)
    return a / (a + b)


def lacunary(grid: Grid, decay: float, seed: int, max_level=None) -> np.ndarray:
    """Unscaled windowed lacunary sum ``sum_j a_j 2**(-decay j) cos(2**j x + phi_j)``.

    Levels run up to half the Nyquist wavenumber unless ``max_level`` caps
    them; the window confines the support to [-L/2, L/2].
    """
    nyq = np.pi / grid.h
    top = int(np.floor(np.log2(nyq / 2.0)))
    if max_level is not None:
        top = min(top, int(max_level))
    rng = np.random.default_rng(seed)
    levels = np.arange(top + 1)
    amps = rng.uniform(0.5, 1.5, size=levels.size)
    phases = rng.uniform(0.0, 2 * np.pi, size=levels.size)
    x = grid.x
    s = np.zeros(grid.n)
    for j, a, ph in zip(levels, amps, phases):
        s += a * 2.0 ** (-decay * j) * np.cos(2.0**j * x + ph)
    return s * plateau_window(x, grid.L / 2)


def rough_velocity(gamma: float, seed: int, amplitude: float, grid: Grid, max_level=None) -> Field:
    """Lacunary velocity datum scaled to ``||u0||_{L^1} + |u0|_{W^{2 gamma,1}} = amplitude``."""
    if not 0.0 < gamma <= 0.01:
        raise ConfigurationError(f"gamma must lie in (0, 1/100], got {gamma}")
    if amplitude < 0:
        raise ConfigurationError(f"amplitude must be nonnegative, got {amplitude}")
    if amplitude == 0:
        return Field.zeros(grid)
    raw = Field(grid, lacunary(grid, 2.0 * gamma, seed, max_level))
    size = lp_norm(raw, 1.0) + gagliardo_norm(raw, 2.0 * gamma, 1.0)
    return raw * (amplitude / size)


def rough_temperature(
    beta: float, seed: int, amplitude: float, grid: Grid, gamma: float = DEFAULT_GAMMA, max_level=None
) -> Field:
    """Temperature perturbation ``theta0 - 1`` built as the derivative of a lacunary primitive.

    ``beta`` is the decay exponent of the primitive. The result is scaled so
    the sum of its order ``-2/3`` (p = 6/5) and order ``2 gamma - 1`` (p = 1)
    norms equals ``amplitude``.
    """
    if not 0.0 < beta < 1.0:
        raise ConfigurationError(f"beta must lie in (0, 1), got {beta}")
    if amplitude < 0:
        raise ConfigurationError(f"amplitude must be nonnegative, got {amplitude}")
    if amplitude == 0:
        return Field.zeros(grid)
    prim = lacunary(grid, beta, seed, max_level)
    raw = Field(grid, spectral.derivative(prim, grid))
    size = temperature_data_norm(raw, gamma)
    return raw * (amplitude / size)


def temperature_data_norm(g: Field, gamma: float = DEFAULT_GAMMA) -> float:
    return negative_sobolev_norm(g, 2.0 / 3.0, 1.2) + negative_sobolev_norm(g, 1.0 - 2.0 * gamma, 1.0)
