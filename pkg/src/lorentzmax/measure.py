"""Grids, grid functions, the weight ``u`` on R^d and the weight ``w`` on R+.

A grid covers the box ``[-L, L]^d`` (d = 1 or 2) with ``n`` cells per
axis; functions are piecewise constant on cells and vanish outside the box.
Weights ``w`` on the half line are parametric so that their primitive
``W(t)`` and the tails ``int_r^inf w(t) t^-p dt`` are available in closed
form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainMismatch, InvalidArgument

#: Value returned by tail integrals (and the B_p constant) that diverge.
DIVERGENT = math.inf


def is_divergent(value: float) -> bool:
    return math.isinf(value)


@dataclass(frozen=True)
class GridDomain:
    """Uniform grid on ``[-half_width, half_width]^dimension``."""

    dimension: int
    half_width: float
    cells: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise InvalidArgument(f"dimension must be 1 or 2, got {self.dimension}")
        if not self.half_width > 0 or not math.isfinite(self.half_width):
            raise InvalidArgument(f"half_width must be positive, got {self.half_width}")
        if int(self.cells) != self.cells or self.cells < 1:
            raise InvalidArgument(f"cells must be a positive integer, got {self.cells}")
        object.__setattr__(self, "half_width", float(self.half_width))
        object.__setattr__(self, "cells", int(self.cells))

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.cells

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dimension

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells,) * self.dimension

    @property
    def size(self) -> int:
        return self.cells ** self.dimension

    @property
    def volume(self) -> float:
        return (2.0 * self.half_width) ** self.dimension

    def edges(self) -> np.ndarray:
        return -self.half_width + self.h * np.arange(self.cells + 1)

    def axis_centers(self) -> np.ndarray:
        return -self.half_width + self.h * (np.arange(self.cells) + 0.5)

    def centers(self) -> np.ndarray:
        """Cell centers: shape (n,) in 1D, (n, n, 2) in 2D."""
        c = self.axis_centers()
        if self.dimension == 1:
            return c
        return np.stack(np.meshgrid(c, c, indexing="ij"), axis=-1)

    def radius(self) -> np.ndarray:
        """Euclidean norm of every cell center, shaped like the grid."""
        c = self.centers()
        return np.abs(c) if self.dimension == 1 else np.hypot(c[..., 0], c[..., 1])

    def refine(self, factor: int = 2) -> "GridDomain":
        return GridDomain(self.dimension, self.half_width, self.cells * factor)

    def with_cells(self, cells: int) -> "GridDomain":
        return GridDomain(self.dimension, self.half_width, cells)

    def index_of(self, point) -> tuple[int, ...]:
        """Cell index containing ``point`` (cells are half open)."""
        pt = np.atleast_1d(np.asarray(point, dtype=float))
        if pt.shape != (self.dimension,):
            raise InvalidArgument(f"expected a point in R^{self.dimension}")
        idx = np.floor((pt + self.half_width) / self.h).astype(int)
        if np.any(idx < 0) or np.any(idx >= self.cells):
            raise InvalidArgument(f"point {pt.tolist()} lies outside the box")
        return tuple(int(i) for i in idx)

    def box_mask(self, box: Sequence[float]) -> np.ndarray:
        """Cells whose center lies in the half-open box.

        ``box`` is ``[lo, hi]`` in 1D and ``[lo0, hi0, lo1, hi1]`` in 2D.
        """
        box = [float(b) for b in box]
        if len(box) != 2 * self.dimension:
            raise InvalidArgument(f"a box in R^{self.dimension} needs {2 * self.dimension} numbers")
        c = self.axis_centers()
        masks = [(c >= box[2 * i]) & (c < box[2 * i + 1]) for i in range(self.dimension)]
        if self.dimension == 1:
            return masks[0]
        return masks[0][:, None] & masks[1][None, :]


def _check_same(a: GridDomain, b: GridDomain):
    if a != b:
        raise DomainMismatch(f"grids differ: {a} vs {b}")


class GridFunction:
    """Nonnegative piecewise-constant function on a grid, zero outside."""

    __slots__ = ("domain", "values")

    def __init__(self, domain: GridDomain, values):
        arr = np.array(values, dtype=float)
        if arr.shape != domain.shape:
            if arr.size == domain.size:
                arr = arr.reshape(domain.shape)
            else:
                raise InvalidArgument(f"expected {domain.shape} values, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgument("grid function values must be finite")
        if np.any(arr < 0):
            raise InvalidArgument("grid function values must be nonnegative")
        arr.setflags(write=False)
        self.domain = domain
        self.values = arr

    @classmethod
    def zeros(cls, domain: GridDomain) -> "GridFunction":
        return cls(domain, np.zeros(domain.shape))

    @classmethod
    def constant(cls, domain: GridDomain, c: float) -> "GridFunction":
        return cls(domain, np.full(domain.shape, float(c)))

    @classmethod
    def from_boxes(cls, domain: GridDomain, pieces: Iterable[tuple[float, Sequence[float]]]):
        """Sum of ``value * indicator(box)`` over ``(value, box)`` pieces."""
        vals = np.zeros(domain.shape)
        for value, box in pieces:
            vals = vals + float(value) * domain.box_mask(box)
        return cls(domain, vals)

    @classmethod
    def sample(cls, domain: GridDomain, func) -> "GridFunction":
        """Evaluate ``func`` at the cell centers."""
        return cls(domain, np.broadcast_to(func(domain.centers()), domain.shape))

    def __repr__(self):
        return f"GridFunction({self.domain}, max={self.values.max(initial=0.0):g})"

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same(self.domain, other.domain)
        return GridFunction(self.domain, self.values + other.values)

    def __mul__(self, c) -> "GridFunction":
        if isinstance(c, GridFunction):
            _check_same(self.domain, c.domain)
            return GridFunction(self.domain, self.values * c.values)
        return GridFunction(self.domain, self.values * float(c))

    __rmul__ = __mul__

    def restrict(self, E: "GridSet") -> "GridFunction":
        """``indicator(E) * self``."""
        _check_same(self.domain, E.domain)
        return GridFunction(self.domain, np.where(E.mask, self.values, 0.0))

    def integral(self) -> float:
        return float(math.fsum(self.values.ravel())) * self.domain.cell_volume

    def max(self) -> float:
        return float(self.values.max())

    def is_zero(self) -> bool:
        return not np.any(self.values > 0)

    def support(self) -> "GridSet":
        return GridSet(self.domain, self.values > 0)

    def refine(self, factor: int = 2) -> "GridFunction":
        """Same function on a grid with ``factor`` times more cells per axis."""
        v = self.values
        for ax in range(self.domain.dimension):
            v = np.repeat(v, factor, axis=ax)
        return GridFunction(self.domain.refine(factor), v)


class GridSet:
    """Union of grid cells."""

    __slots__ = ("domain", "mask")

    def __init__(self, domain: GridDomain, mask):
        arr = np.array(mask, dtype=bool)
        if arr.shape != domain.shape:
            raise InvalidArgument(f"expected a {domain.shape} mask, got {arr.shape}")
        arr.setflags(write=False)
        self.domain = domain
        self.mask = arr

    @classmethod
    def empty(cls, domain: GridDomain) -> "GridSet":
        return cls(domain, np.zeros(domain.shape, bool))

    @classmethod
    def full(cls, domain: GridDomain) -> "GridSet":
        return cls(domain, np.ones(domain.shape, bool))

    @classmethod
    def from_boxes(cls, domain: GridDomain, boxes: Iterable[Sequence[float]]) -> "GridSet":
        mask = np.zeros(domain.shape, bool)
        for box in boxes:
            mask |= domain.box_mask(box)
        return cls(domain, mask)

    def __repr__(self):
        return f"GridSet({self.domain}, cells={self.count})"

    def __eq__(self, other):
        return (isinstance(other, GridSet) and self.domain == other.domain
                and np.array_equal(self.mask, other.mask))

    __hash__ = None

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def measure(self) -> float:
        """Lebesgue measure."""
        return self.count * self.domain.cell_volume

    def is_empty(self) -> bool:
        return not self.mask.any()

    def __or__(self, other: "GridSet") -> "GridSet":
        _check_same(self.domain, other.domain)
        return GridSet(self.domain, self.mask | other.mask)

    def __and__(self, other: "GridSet") -> "GridSet":
        _check_same(self.domain, other.domain)
        return GridSet(self.domain, self.mask & other.mask)

    def __sub__(self, other: "GridSet") -> "GridSet":
        _check_same(self.domain, other.domain)
        return GridSet(self.domain, self.mask & ~other.mask)

    def issubset(self, other: "GridSet") -> bool:
        _check_same(self.domain, other.domain)
        return not np.any(self.mask & ~other.mask)

    def indicator(self) -> GridFunction:
        return GridFunction(self.domain, self.mask.astype(float))

    def refine(self, factor: int = 2) -> "GridSet":
        m = self.mask
        for ax in range(self.domain.dimension):
            m = np.repeat(m, factor, axis=ax)
        return GridSet(self.domain.refine(factor), m)


class WeightU(GridFunction):
    """Strictly positive grid weight ``u``.

    ``spec`` remembers how the weight was built (if it came from a
    parametric family) so that it can be rebuilt on another grid;
    ``clamp_radius`` is the radius below which ``|x|^alpha`` was frozen.
    """

    __slots__ = ("spec", "clamp_radius")

    def __init__(self, domain: GridDomain, values, spec: dict | None = None,
                 clamp_radius: float | None = None):
        super().__init__(domain, values)
        if not np.all(self.values > 0):
            raise InvalidArgument("a weight u must be strictly positive on every cell")
        self.spec = dict(spec) if spec is not None else None
        self.clamp_radius = clamp_radius

    @classmethod
    def constant(cls, domain: GridDomain, c: float = 1.0) -> "WeightU":
        return cls(domain, np.full(domain.shape, float(c)), spec={"kind": "power", "alpha": 0.0})

    @classmethod
    def power(cls, domain: GridDomain, alpha: float) -> "WeightU":
        """``|x|^alpha`` at cell centers, with |x| clamped below by the
        smallest positive center radius (cells sitting on the origin).
        A single-cell grid has no positive radius; half a cell is used."""
        alpha = float(alpha)
        r = domain.radius()
        rmin = float(r[r > 0].min()) if np.any(r > 0) else domain.h / 2
        clamped = np.maximum(r, rmin)
        vals = np.ones(domain.shape) if alpha == 0 else clamped ** alpha
        return cls(domain, vals, spec={"kind": "power", "alpha": alpha}, clamp_radius=rmin)

    @classmethod
    def from_spec(cls, domain: GridDomain, spec: dict) -> "WeightU":
        kind = spec.get("kind")
        if kind == "power":
            return cls.power(domain, spec.get("alpha", 0.0))
        if kind == "constant":
            return cls.constant(domain, spec.get("value", 1.0))
        raise InvalidArgument(f"unknown u kind {kind!r}")

    def at_cells(self, cells: int) -> "WeightU":
        """This weight on the same box with ``cells`` cells per axis."""
        if cells == self.domain.cells:
            return self
        dom = self.domain.with_cells(cells)
        if self.spec is not None:
            if self.spec["kind"] == "power" and self.spec["alpha"] == 0.0:
                return WeightU(dom, np.full(dom.shape, float(self.values.flat[0])), spec=self.spec)
            return WeightU.from_spec(dom, self.spec)
        if cells % self.domain.cells:
            raise InvalidArgument("a gridded weight can only be carried to a multiple of its resolution")
        f = self.refine(cells // self.domain.cells)
        return WeightU(dom, f.values)

    def measure(self, E: GridSet) -> float:
        return measure_u(self, E)

    def cell_masses(self) -> np.ndarray:
        return self.values * self.domain.cell_volume

    def total(self) -> float:
        return self.integral()


def measure_u(u: WeightU, E: GridSet) -> float:
    """``u(E)``: sum of ``u * h^d`` over the cells of ``E``."""
    _check_same(u.domain, E.domain)
    return float(math.fsum(u.values[E.mask])) * u.domain.cell_volume


# ---------------------------------------------------------------------------
# weights on the half line

def _power_integral(a: float, b: float, beta: float) -> float:
    """int_a^b t^beta dt for 0 <= a <= b (a > 0 unless beta > -1)."""
    if b <= a:
        return 0.0
    if a == 0.0:
        return b ** (beta + 1.0) / (beta + 1.0)
    s = beta + 1.0
    if s == 0.0:
        return math.log(b / a)
    return a ** s * math.expm1(s * math.log(b / a)) / s


def _power_tail(r: float, beta: float) -> float:
    """int_r^inf t^beta dt for r > 0."""
    if beta >= -1.0:
        return DIVERGENT
    return r ** (beta + 1.0) / -(beta + 1.0)


class WeightW:
    """A weight on (0, inf) with closed-form primitive and tails."""

    def density(self, t):
        raise NotImplementedError

    def cumulative(self, t: float) -> float:
        raise NotImplementedError

    def tail_integral(self, p: float, r: float) -> float:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_spec(spec: dict) -> "WeightW":
        kind = spec.get("kind")
        if kind == "power":
            return PowerWeight(spec.get("alpha", 0.0))
        if kind == "piecewise":
            return PiecewiseTailWeight(spec["breakpoints"], spec["values"], spec["tail_alpha"])
        raise InvalidArgument(f"unknown w kind {kind!r}")

    def cumulative_array(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.vectorize(self.cumulative, otypes=[float])(t)


@dataclass(frozen=True)
class PowerWeight(WeightW):
    """``w(t) = t^alpha`` with ``alpha > -1``."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > -1.0:
            raise InvalidArgument(f"power weight needs alpha > -1, got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def tail_alpha(self) -> float:
        return self.alpha

    def density(self, t):
        return np.asarray(t, dtype=float) ** self.alpha

    def cumulative(self, t: float) -> float:
        if t < 0:
            raise InvalidArgument(f"W(t) needs t >= 0, got {t}")
        return _power_integral(0.0, float(t), self.alpha)

    def cumulative_array(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise InvalidArgument("W(t) needs t >= 0")
        return t ** (self.alpha + 1.0) / (self.alpha + 1.0)

    def tail_integral(self, p: float, r: float) -> float:
        _check_tail_args(p, r)
        return _power_tail(float(r), self.alpha - p)

    def to_spec(self) -> dict:
        return {"kind": "power", "alpha": self.alpha}


@dataclass(frozen=True)
class PiecewiseTailWeight(WeightW):
    """Constant ``values[i]`` on ``[breakpoints[i-1], breakpoints[i])`` (with
    ``breakpoints[-1] = 0``), then ``t^tail_alpha`` past the last breakpoint."""

    breakpoints: tuple
    values: tuple
    tail_alpha: float

    def __post_init__(self):
        b = tuple(float(x) for x in self.breakpoints)
        v = tuple(float(x) for x in self.values)
        if not b or len(b) != len(v):
            raise InvalidArgument("need as many values as breakpoints (at least one)")
        if b[0] <= 0 or any(b1 <= b0 for b0, b1 in zip(b, b[1:])):
            raise InvalidArgument("breakpoints must be positive and increasing")
        if any(not x > 0 or not math.isfinite(x) for x in v):
            raise InvalidArgument("piecewise values must be positive and finite")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "tail_alpha", float(self.tail_alpha))

    def density(self, t):
        t = np.asarray(t, dtype=float)
        b = np.asarray(self.breakpoints)
        idx = np.searchsorted(b, t, side="right")
        vals = np.append(np.asarray(self.values), np.nan)[np.minimum(idx, len(b))]
        with np.errstate(divide="ignore"):
            tail = np.where(t > 0, t, 1.0) ** self.tail_alpha
        return np.where(idx >= len(b), tail, vals)

    def cumulative(self, t: float) -> float:
        if t < 0:
            raise InvalidArgument(f"W(t) needs t >= 0, got {t}")
        t = float(t)
        terms = []
        lo = 0.0
        for b, c in zip(self.breakpoints, self.values):
            if t <= lo:
                break
            terms.append(c * (min(t, b) - lo))
            lo = b
        if t > self.breakpoints[-1]:
            terms.append(_power_integral(self.breakpoints[-1], t, self.tail_alpha))
        return math.fsum(terms)

    def tail_integral(self, p: float, r: float) -> float:
        _check_tail_args(p, r)
        r = float(r)
        last = self.breakpoints[-1]
        tail = _power_tail(max(r, last), self.tail_alpha - p)
        if is_divergent(tail):
            return DIVERGENT
        terms = [tail]
        lo = 0.0
        for b, c in zip(self.breakpoints, self.values):
            a = max(lo, r)
            if b > a:
                terms.append(c * _power_integral(a, b, -p))
            lo = b
        return math.fsum(terms)

    def to_spec(self) -> dict:
        return {"kind": "piecewise", "breakpoints": list(self.breakpoints),
                "values": list(self.values), "tail_alpha": self.tail_alpha}


def _check_tail_args(p, r):
    if not p > 0:
        raise InvalidArgument(f"p must be positive, got {p}")
    if not r > 0:
        raise InvalidArgument(f"r must be positive, got {r}")


def w_cumulative(w: WeightW, t: float) -> float:
    """``W(t) = int_0^t w``."""
    return w.cumulative(t)


def w_tail_integral(w: WeightW, p: float, r: float) -> float:
    """``int_r^inf w(t) / t^p dt``, or ``DIVERGENT``."""
    return w.tail_integral(p, r)
