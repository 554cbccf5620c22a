"""Weighted Lorentz quasi-norms of grid functions by layer cake.

For a simple function with distinct positive values ``t_1 < ... < t_k`` the
level set ``{f > s}`` is constant for ``s`` in ``[t_{i-1}, t_i)``, so

    ||f||^p      = sum_i (t_i^p - t_{i-1}^p) W(u({f >= t_i}))
    ||f||_weak^p = max_i  t_i^p W(u({f >= t_i}))

The strong sum is accumulated exactly (error-free products fed to
``math.fsum``) and rounded once, so ``weak <= strong`` holds in floating
point and not only up to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .measure import GridFunction, WeightU, WeightW, _check_same

_SPLITTER = 134217729.0


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _two_diff(a, b):
    s = a - b
    bb = s - a
    return s, (a - (s - bb)) - (b + bb)


@dataclass(frozen=True)
class LorentzParams:
    """Exponent ``p`` and the weights ``u`` (on the grid) and ``w``."""

    p: float
    u: WeightU
    w: WeightW
    delta2_limit: float = 1e6

    def __post_init__(self):
        if not self.p > 0 or not math.isfinite(self.p):
            raise InvalidArgument(f"p must be positive, got {self.p}")
        object.__setattr__(self, "p", float(self.p))
        from .classes import delta2_constant

        lo = min(self.u.domain.cell_volume, float(self.u.cell_masses().min()))
        hi = max(self.u.total(), lo)
        c = delta2_constant(self.w, r_min=lo, r_max=hi)
        if not c <= self.delta2_limit:
            raise InvalidArgument(f"w fails the doubling condition on [{lo:g}, {hi:g}] (constant {c:g})")

    @property
    def domain(self):
        return self.u.domain

    def at_cells(self, cells: int) -> "LorentzParams":
        return LorentzParams(self.p, self.u.at_cells(cells), self.w, self.delta2_limit)


@dataclass(frozen=True)
class LayerDecomposition:
    """Distinct positive values (ascending) and ``W(u({f >= t_i}))``."""

    levels: np.ndarray
    u_measures: np.ndarray
    W_values: np.ndarray

    def to_dict(self) -> dict:
        return {"levels": self.levels.tolist(), "u_measures": self.u_measures.tolist(),
                "W": self.W_values.tolist()}


def layers(f: GridFunction, P: LorentzParams) -> LayerDecomposition:
    _check_same(f.domain, P.u.domain)
    vals = f.values.ravel()
    pos = vals > 0
    v = vals[pos]
    masses = P.u.cell_masses().ravel()[pos]
    order = np.argsort(-v, kind="stable")
    v = v[order]
    masses = masses[order]
    # u({f >= t}) accumulated from the top, so it never decreases downward
    cum = np.cumsum(masses)
    ends = np.flatnonzero(np.append(v[1:] != v[:-1], True)) if v.size else np.array([], int)
    levels = v[ends][::-1].copy()
    umeas = cum[ends][::-1].copy()
    Wv = P.w.cumulative_array(umeas) if umeas.size else np.array([])
    return LayerDecomposition(levels, umeas, np.asarray(Wv, dtype=float))


def _strong_power(levels, Wv, p) -> float:
    a = levels ** p
    prev = np.concatenate([[0.0], a[:-1]])
    dh, dl = _two_diff(a, prev)
    p1, e1 = _two_prod(dh, Wv)
    p2, e2 = _two_prod(dl, Wv)
    return math.fsum(np.concatenate([p1, e1, p2, e2]))


def lambda_norm_p(f: GridFunction, P: LorentzParams) -> float:
    """``||f||^p`` in the weighted Lorentz space."""
    lay = layers(f, P)
    if lay.levels.size == 0:
        return 0.0
    return _strong_power(lay.levels, lay.W_values, P.p)


def lambda_norm(f: GridFunction, P: LorentzParams) -> float:
    return lambda_norm_p(f, P) ** (1.0 / P.p)


def lambda_weak_norm_p(f: GridFunction, P: LorentzParams) -> float:
    lay = layers(f, P)
    if lay.levels.size == 0:
        return 0.0
    return float(np.max(lay.levels ** P.p * lay.W_values))


def lambda_weak_norm(f: GridFunction, P: LorentzParams) -> float:
    """``sup_t t W(u({f > t}))^(1/p)``, attained at a value of ``f``."""
    return lambda_weak_norm_p(f, P) ** (1.0 / P.p)


def lp_norm_p(f: GridFunction, u: WeightU, p: float) -> float:
    """``int f^p u`` on the grid (the ``w = 1`` case)."""
    _check_same(f.domain, u.domain)
    return math.fsum((f.values ** p * u.values).ravel()) * f.domain.cell_volume
