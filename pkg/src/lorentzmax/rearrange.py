"""Distribution functions, decreasing rearrangements and the Hardy operator."""
from __future__ import annotations

import math

import numpy as np

from .errors import InvalidArgument
from .measure import GridFunction


class DecreasingStep:
    """Right-continuous nonincreasing step function on [0, inf).

    Takes ``values[i]`` on ``[breakpoints[i-1], breakpoints[i])`` (with
    ``breakpoints[-1] = 0``) and vanishes from ``breakpoints[-1]`` on.
    """

    __slots__ = ("breakpoints", "values", "_cum")

    def __init__(self, breakpoints, values):
        b = np.array(breakpoints, dtype=float).ravel()
        v = np.array(values, dtype=float).ravel()
        if b.shape != v.shape:
            raise InvalidArgument("breakpoints and values must have the same length")
        if b.size and (b[0] <= 0 or np.any(np.diff(b) <= 0)):
            raise InvalidArgument("breakpoints must be positive and increasing")
        if np.any(v < 0) or np.any(np.diff(v) > 0) or not np.all(np.isfinite(v)):
            raise InvalidArgument("values must be finite, nonnegative and nonincreasing")
        b.setflags(write=False)
        v.setflags(write=False)
        self.breakpoints = b
        self.values = v
        widths = np.diff(b, prepend=0.0)
        self._cum = np.concatenate([[0.0], np.cumsum(v * widths)])

    def __repr__(self):
        return f"DecreasingStep({len(self.values)} steps, support={self.support:g})"

    def __len__(self):
        return len(self.values)

    @property
    def support(self) -> float:
        return float(self.breakpoints[-1]) if self.breakpoints.size else 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right")
        out = np.append(self.values, 0.0)[idx]
        return out if out.ndim else float(out)

    def integral(self, t):
        """``int_0^t g``."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right")
        left = np.append(np.concatenate([[0.0], self.breakpoints]), np.nan)[idx]
        val = np.append(self.values, 0.0)[idx]
        out = self._cum[idx] + val * (t - left)
        return out if out.ndim else float(out)

    def measure_above(self, s: float) -> float:
        """``|{g > s}|``."""
        count = int(np.count_nonzero(self.values > s))
        return float(self.breakpoints[count - 1]) if count else 0.0

    def scaled(self, c: float) -> "DecreasingStep":
        return DecreasingStep(self.breakpoints, self.values * float(c))


def distribution(f: GridFunction, t: float) -> float:
    """``|{f > t}|``."""
    if t < 0:
        raise InvalidArgument(f"t must be nonnegative, got {t}")
    return int(np.count_nonzero(f.values > t)) * f.domain.cell_volume


def rearrangement(f: GridFunction) -> DecreasingStep:
    """Decreasing rearrangement ``f*`` as an exact step function."""
    vals = f.values.ravel()
    order = np.argsort(-vals, kind="stable")
    v = vals[order]
    v = v[v > 0]
    if v.size == 0:
        return DecreasingStep([], [])
    # last index of each run of equal values
    ends = np.flatnonzero(np.append(v[1:] != v[:-1], True))
    counts = ends + 1
    return DecreasingStep(counts * f.domain.cell_volume, v[ends])


def hardy(g: DecreasingStep, t) -> float:
    """Hardy average ``(1/t) int_0^t g``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise InvalidArgument("the Hardy operator needs t > 0")
    out = g.integral(t_arr) / t_arr
    return out if np.ndim(out) else float(out)


def mass(g: DecreasingStep) -> float:
    widths = np.diff(g.breakpoints, prepend=0.0)
    return math.fsum(g.values * widths)
