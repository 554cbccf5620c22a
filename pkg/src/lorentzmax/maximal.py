"""Uncentered Hardy-Littlewood maximal operator on a grid.

``Mf`` at a cell is the largest average of the zero-extended ``f`` over a
grid-aligned cube containing that cell. Cubes have sides ``1 .. n + 2m``
cells and lower corners anywhere on the enlarged grid ``[-m, n + m)^d``;
by default ``m = n``, i.e. cubes may stick out of the box by one box width.

Two routes produce the same floats:

* :func:`maximal_naive` enumerates every cube (per side in 1D, with an
  exact sliding maximum; cube by cube in 2D);
* :func:`maximal_fast` uses convex-hull bridges on the prefix-sum graph in
  1D and one separable van Herk/Gil-Werman pass per cube side in 2D.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidArgument
from .measure import GridDomain, GridFunction, GridSet


@dataclass(frozen=True)
class CubeSpec:
    """Grid-aligned cube: lower corner (cell indices, may be negative) and
    side length in cells."""

    lower: tuple
    side: int

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(int(i) for i in np.atleast_1d(self.lower)))
        if int(self.side) != self.side or self.side < 1:
            raise InvalidArgument(f"cube side must be a positive integer, got {self.side}")
        object.__setattr__(self, "side", int(self.side))

    def volume(self, domain: GridDomain) -> float:
        return (self.side * domain.h) ** domain.dimension

    def inside(self, domain: GridDomain) -> bool:
        return all(0 <= lo and lo + self.side <= domain.cells for lo in self.lower)

    def cells(self, domain: GridDomain) -> GridSet:
        """The box cells covered by the cube."""
        self._check_dim(domain)
        mask = np.zeros(domain.shape, bool)
        sl = tuple(slice(max(lo, 0), max(min(lo + self.side, domain.cells), 0)) for lo in self.lower)
        mask[sl] = True
        return GridSet(domain, mask)

    def bounds(self, domain: GridDomain) -> list[float]:
        """Physical box ``[lo0, hi0, (lo1, hi1)]``."""
        out = []
        for lo in self.lower:
            a = -domain.half_width + lo * domain.h
            out += [a, a + self.side * domain.h]
        return out

    def _check_dim(self, domain):
        if len(self.lower) != domain.dimension:
            raise InvalidArgument("cube and grid dimensions differ")


def cube_average(f: GridFunction, cube: CubeSpec) -> float:
    """Average of the zero-extended ``f`` over ``cube``."""
    cube._check_dim(f.domain)
    return float(f.values[cube.cells(f.domain).mask].sum()) / cube.side ** f.domain.dimension


def _prefix_sums(f: GridFunction, margin: int) -> np.ndarray:
    n = f.domain.cells
    d = f.domain.dimension
    padded = np.zeros((n + 2 * margin,) * d)
    padded[(slice(margin, margin + n),) * d] = f.values
    S = padded
    for ax in range(d):
        S = np.cumsum(S, axis=ax)
    return np.pad(S, [(1, 0)] * d)


def _margin(f: GridFunction, reach: int) -> int:
    if int(reach) != reach or reach < 0:
        raise InvalidArgument(f"reach must be a nonnegative integer, got {reach}")
    return int(reach) * f.domain.cells


def maximal_naive(f: GridFunction, reach: int = 1) -> GridFunction:
    """Grid maximal function by enumerating every cube.

    ``reach`` is how many box widths a cube may extend past the box.
    """
    m = _margin(f, reach)
    S = _prefix_sums(f, m)
    n = f.domain.cells
    if f.domain.dimension == 1:
        vals = _kernels.maximal_1d_enumerate(S, n, m)
    else:
        vals = _kernels.maximal_2d_enumerate(S, n, m)
    return GridFunction(f.domain, vals)


def maximal_fast(f: GridFunction, reach: int = 1) -> GridFunction:
    """Same operator and output as :func:`maximal_naive`, faster."""
    m = _margin(f, reach)
    S = _prefix_sums(f, m)
    n = f.domain.cells
    if f.domain.dimension == 1:
        vals = _kernels.maximal_1d_hull(S, n, m)
    else:
        vals = _kernels.maximal_2d_sliding(S, n, m)
    return GridFunction(f.domain, vals)


def maximal(f: GridFunction) -> GridFunction:
    return maximal_fast(f)


def level_set(f: GridFunction, lam: float) -> GridSet:
    """Cells where ``f > lam``."""
    if not lam > 0:
        raise InvalidArgument(f"level must be positive, got {lam}")
    return GridSet(f.domain, f.values > lam)
