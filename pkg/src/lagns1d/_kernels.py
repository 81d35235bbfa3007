"""Compiled inner loops for the quadratic-cost norms."""

import numba as nb
import numpy as np


@nb.njit(parallel=True, cache=True)
def gagliardo_rows(v, w, p):
    """Row sums of ``sum_j |v_i - v_j|**p * w[|i-j| mod n]`` over j != i.

    ``w`` holds one weight per periodic offset r = 1..n/2 (index r).
    Pairs (i, i+r) with r < n/2 are counted twice by symmetry.
    """
    n = v.shape[0]
    half = n // 2
    rows = np.zeros(n)
    for i in nb.prange(n):
        acc = 0.0
        vi = v[i]
        for r in range(1, half):
            d = abs(vi - v[(i + r) % n])
            if p == 1.0:
                acc += 2.0 * d * w[r]
            elif p == 2.0:
                acc += 2.0 * d * d * w[r]
            else:
                acc += 2.0 * d**p * w[r]
        d = abs(vi - v[(i + half) % n])
        acc += d**p * w[half]
        rows[i] = acc
    return rows


@nb.njit(cache=True)
def _pair_norm(a, b, p, scale):
    n = a.shape[0]
    if np.isinf(p):
        m = 0.0
        for i in range(n):
            d = abs(a[i] - b[i])
            if d > m:
                m = d
        return m
    acc = 0.0
    if p == 1.0:
        for i in range(n):
            acc += abs(a[i] - b[i])
        return acc * scale
    if p == 2.0:
        for i in range(n):
            d = a[i] - b[i]
            acc += d * d
        return np.sqrt(acc * scale)
    for i in range(n):
        acc += abs(a[i] - b[i]) ** p
    return (acc * scale) ** (1.0 / p)


@nb.njit(cache=True)
def holder_sup(D, t, node_norms, sigma, alpha, p, scale):
    """Max of ``t_j**(sigma+alpha) ||D_k - D_j|| / (t_k - t_j)**alpha`` over 1 <= j < k.

    Pairs whose triangle-inequality bound cannot beat the running maximum
    are skipped; the result is exact.
    """
    nt = D.shape[0]
    best = 0.0
    bj = -1
    bk = -1
    for k in range(2, nt):
        tk = t[k]
        for j in range(k - 1, 0, -1):
            w = t[j] ** (sigma + alpha) / (tk - t[j]) ** alpha
            if w * (node_norms[k] + node_norms[j]) <= best:
                continue
            val = w * _pair_norm(D[k], D[j], p, scale)
            if val > best:
                best = val
                bj = j
                bk = k
    return best, bj, bk
