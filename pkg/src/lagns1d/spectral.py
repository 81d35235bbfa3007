"""Fourier-side helpers on the periodic grid.

All routines act along the last axis, so they accept a single field or a
stack of fields (a trajectory's ``(K+1, n)`` array).
"""

from __future__ import annotations

import numpy as np

from .grid import Grid


def derivative(values, grid: Grid, m: int = 1) -> np.ndarray:
    """``m``-th spectral derivative. The Nyquist mode is dropped for odd ``m``."""
    if m == 0:
        return np.array(values, dtype=float)
    coef = np.fft.rfft(values, axis=-1)
    sym = (1j * grid.xi) ** m
    if m % 2:
        sym[-1] = 0.0
    return np.fft.irfft(coef * sym, n=grid.n, axis=-1)


def antiderivative(values, grid: Grid) -> np.ndarray:
    """Mean-zero periodic primitive of a mean-zero field (mean is ignored)."""
    coef = np.fft.rfft(values, axis=-1)
    xi = grid.xi
    inv = np.zeros(xi.shape, dtype=complex)
    inv[1:-1] = 1.0 / (1j * xi[1:-1])
    return np.fft.irfft(coef * inv, n=grid.n, axis=-1)


def taper(values, grid: Grid, keep: float = 2.0 / 3.0) -> np.ndarray:
    """Zero every mode above ``keep`` times the Nyquist wavenumber."""
    coef = np.fft.rfft(values, axis=-1)
    kmax = keep * (grid.n // 2)
    coef[..., np.arange(coef.shape[-1]) > kmax] = 0.0
    return np.fft.irfft(coef, n=grid.n, axis=-1)


def shift(values, grid: Grid, dx: float) -> np.ndarray:
    """Trigonometric interpolant evaluated at ``x_i + dx``."""
    coef = np.fft.rfft(values, axis=-1)
    phase = np.exp(1j * grid.xi * dx)
    phase[-1] = np.cos(grid.xi[-1] * dx)
    return np.fft.irfft(coef * phase, n=grid.n, axis=-1)


class TrigInterpolant:
    """Real trigonometric interpolant of one field, with its primitive."""

    def __init__(self, values, grid: Grid):
        self.grid = grid
        coef = np.fft.rfft(np.asarray(values, dtype=float)) / grid.n
        # one-sided weights for a real interpolant; Nyquist keeps its cosine only
        w = np.full(coef.shape, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        self._a = coef * w
        self._a[-1] = coef[-1].real
        self.mean = coef[0].real

    def _phase(self, x):
        s = np.atleast_1d(np.asarray(x, dtype=float)) + self.grid.L
        return np.exp(1j * np.outer(s, self.grid.xi))

    def __call__(self, x):
        return (self._phase(x) @ self._a).real

    def primitive(self, x):
        """``int_{-L}^x p(s) ds`` up to a constant shared by all ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        xi = self.grid.xi
        b = np.zeros_like(self._a)
        b[1:] = self._a[1:] / (1j * xi[1:])
        return (self._phase(x) @ b).real + self.mean * (x + self.grid.L)
