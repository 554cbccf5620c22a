"""Independent reference computations used by the tests.

These avoid the package's kernels: exact rational arithmetic for the
maximal operator, scipy quadrature for integrals, plain loops over cubes.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy import integrate


def maximal_1d_exact(values, reach: int = 1):
    """Uncentered grid maximal function of a 1D cell array, as Fractions."""
    vals = [Fraction(v) for v in values]
    n = len(vals)
    m = reach * n
    ext = [Fraction(0)] * m + vals + [Fraction(0)] * m
    pre = [Fraction(0)]
    for v in ext:
        pre.append(pre[-1] + v)
    out = []
    for x in range(n):
        c = m + x
        best = Fraction(0)
        for a in range(0, c + 1):
            for b in range(c + 1, len(ext) + 1):
                best = max(best, (pre[b] - pre[a]) / (b - a))
        out.append(best)
    return out


def maximal_2d_exact(values, reach: int = 1):
    vals = np.asarray(values)
    n = vals.shape[0]
    m = reach * n
    N = n + 2 * m
    ext = [[Fraction(0)] * N for _ in range(N)]
    for i in range(n):
        for j in range(n):
            ext[m + i][m + j] = Fraction(vals[i, j])
    S = [[Fraction(0)] * (N + 1) for _ in range(N + 1)]
    for i in range(N):
        for j in range(N):
            S[i + 1][j + 1] = ext[i][j] + S[i][j + 1] + S[i + 1][j] - S[i][j]
    out = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, N + 1):
        for a0 in range(N - k + 1):
            for a1 in range(N - k + 1):
                s = S[a0 + k][a1 + k] - S[a0][a1 + k] - S[a0 + k][a1] + S[a0][a1]
                avg = s / (k * k)
                for i in range(max(a0 - m, 0), min(a0 + k - m, n)):
                    for j in range(max(a1 - m, 0), min(a1 + k - m, n)):
                        if avg > out[i][j]:
                            out[i][j] = avg
    return out


def quad(func, a, b, points=None):
    val, _ = integrate.quad(func, a, b, points=points, limit=500, epsabs=0, epsrel=1e-12)
    return val


def quad_to_inf(func, a):
    val, _ = integrate.quad(func, a, np.inf, limit=500, epsabs=0, epsrel=1e-12)
    return val


def ap_bruteforce(u, p):
    """Plain loop over every cube inside the box."""
    vals = u.values
    n, d = u.domain.cells, u.domain.dimension
    best = 0.0
    for side in range(1, n + 1):
        for lower in itertools.product(range(n - side + 1), repeat=d):
            block = vals[tuple(slice(a, a + side) for a in lower)]
            au = block.mean()
            av = (block ** (-1.0 / (p - 1))).mean()
            best = max(best, au * av ** (p - 1))
    return best


def W_quad(w, t):
    """W(t) by quadrature of the density (breakpoints passed to quad)."""
    pts = [b for b in getattr(w, "breakpoints", ()) if 0 < b < t]
    return quad(lambda s: float(w.density(s)), 0.0, t, points=pts or None)


def layer_cake_quad(f, u, w, p):
    """int_0^inf p t^(p-1) W(u({f > t})) dt by quadrature between values."""
    vals = f.values.ravel()
    masses = u.values.ravel() * u.domain.cell_volume
    levels = np.unique(vals[vals > 0])
    edges = np.concatenate([[0.0], levels])
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mass = math.fsum(masses[vals > lo])
        Wm = W_quad(w, mass)
        total += quad(lambda t: p * t ** (p - 1) * Wm, lo, hi)
    return total
