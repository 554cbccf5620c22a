"""Weight-class constants and the multi-cube ratio search.

Constants for ``u`` (A_p, A_1) are maxima over the grid-aligned cubes that
fit in the box, where ``u`` is known. Constants for ``w`` (B_p, B_{p,inf},
Delta_2) are sampled on geometric grids in ``r``; they use the closed-form
primitives of the parametric weights.

The family ratio is

    W(u(U Q_j)) / W(u(U S_j))  /  max_j (|Q_j| / |S_j|)^q,

and :func:`raposo_search` looks for families that make it large.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import InvalidArgument
from .maximal import CubeSpec, maximal_fast
from .measure import DIVERGENT, GridDomain, GridSet, WeightU, WeightW, is_divergent

#: default r-grid for the constants of w: 2^-40 .. 2^40
R_GRID = 2.0 ** np.arange(-40, 41)


# ---------------------------------------------------------------------------
# A_p and A_1

@numba.njit(cache=True)
def _ap_1d(Su, Sv, n, e):
    best = 0.0
    for k in range(1, n + 1):
        for a in range(n - k + 1):
            au = (Su[a + k] - Su[a]) / k
            av = (Sv[a + k] - Sv[a]) / k
            v = au * av ** e
            if v > best:
                best = v
    return best


@numba.njit(cache=True)
def _ap_2d(Su, Sv, n, e):
    best = 0.0
    for k in range(1, n + 1):
        kk = float(k * k)
        for a0 in range(n - k + 1):
            for a1 in range(n - k + 1):
                b0 = a0 + k
                b1 = a1 + k
                au = ((Su[b0, b1] - Su[a0, b1]) - (Su[b0, a1] - Su[a0, a1])) / kk
                av = ((Sv[b0, b1] - Sv[a0, b1]) - (Sv[b0, a1] - Sv[a0, a1])) / kk
                v = au * av ** e
                if v > best:
                    best = v
    return best


def _prefix(values: np.ndarray) -> np.ndarray:
    S = values
    for ax in range(values.ndim):
        S = np.cumsum(S, axis=ax)
    return np.pad(S, [(1, 0)] * values.ndim)


def ap_constant(u: WeightU, p: float) -> float:
    """``max_Q avg_Q(u) * avg_Q(u^(-1/(p-1)))^(p-1)`` over cubes in the box."""
    if not p > 1:
        raise InvalidArgument(f"A_p needs p > 1, got {p}")
    v = u.values ** (-1.0 / (p - 1.0))
    Su, Sv = _prefix(u.values), _prefix(v)
    kernel = _ap_1d if u.domain.dimension == 1 else _ap_2d
    return float(kernel(Su, Sv, u.domain.cells, p - 1.0))


def a1_constant(u: WeightU) -> float:
    """``max Mu / u`` over the cells of the box."""
    return float(np.max(maximal_fast(u).values / u.values))


# ---------------------------------------------------------------------------
# constants of w

def bp_constant(w: WeightW, p: float, r_grid=None) -> float:
    """``sup_r r^p int_r^inf w(t) t^-p dt / W(r)``, or ``DIVERGENT``."""
    if not p > 0:
        raise InvalidArgument(f"p must be positive, got {p}")
    r_grid = R_GRID if r_grid is None else np.asarray(r_grid, dtype=float)
    best = 0.0
    for r in r_grid:
        tail = w.tail_integral(p, float(r))
        if is_divergent(tail):
            return DIVERGENT
        best = max(best, r ** p * tail / w.cumulative(float(r)))
    return best


def bpinf_constant(w: WeightW, p: float, r_grid=None) -> float:
    """``sup_{r < t} (W(t)/t^p) / (W(r)/r^p)`` on a geometric grid."""
    if not 0 < p <= 1:
        raise InvalidArgument(f"B_p,inf is defined here for 0 < p <= 1, got {p}")
    r_grid = R_GRID if r_grid is None else np.sort(np.asarray(r_grid, dtype=float))
    g = w.cumulative_array(r_grid) / r_grid ** p
    # best over pairs: each g[j] against the smallest g[i] with i < j
    running_min = np.minimum.accumulate(g)
    if g.size < 2:
        return 1.0
    return float(max(1.0, np.max(g[1:] / running_min[:-1])))


def delta2_constant(w: WeightW, r_min: float = 2.0 ** -40, r_max: float = 2.0 ** 40,
                    per_octave: int = 4) -> float:
    """``sup_r W(2r)/W(r)`` over a geometric grid on ``[r_min, r_max]``."""
    if not 0 < r_min <= r_max:
        raise InvalidArgument("need 0 < r_min <= r_max")
    octaves = max(math.log2(r_max / r_min), 0.0)
    k = int(math.ceil(octaves * per_octave))
    r = r_min * 2.0 ** (np.arange(k + 1) / per_octave)
    extra = []
    if hasattr(w, "breakpoints"):
        # the ratio changes slope where r or 2r hits a breakpoint
        b = np.asarray(w.breakpoints)
        extra = [x for x in np.concatenate([b, b / 2]) if r_min <= x <= r_max]
    r = np.concatenate([r, extra])
    return float(np.max(w.cumulative_array(2 * r) / w.cumulative_array(r)))


# ---------------------------------------------------------------------------
# cube families

@dataclass(frozen=True)
class CubeFamily:
    """Pairs ``(Q_j, S_j)`` with ``S_j`` a nonempty subset of ``Q_j``."""

    domain: GridDomain
    pairs: tuple

    def __post_init__(self):
        pairs = tuple((q, s) for q, s in self.pairs)
        if not pairs:
            raise InvalidArgument("a cube family needs at least one pair")
        for q, s in pairs:
            if not q.inside(self.domain):
                raise InvalidArgument(f"cube {q} does not fit in the box")
            if s.domain != self.domain:
                raise InvalidArgument("subset lives on another grid")
            if s.is_empty():
                raise InvalidArgument("every S_j must be nonempty")
            if not s.issubset(q.cells(self.domain)):
                raise InvalidArgument("every S_j must lie in its Q_j")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self):
        return len(self.pairs)

    def union_q(self) -> GridSet:
        out = GridSet.empty(self.domain)
        for q, _ in self.pairs:
            out = out | q.cells(self.domain)
        return out

    def union_s(self) -> GridSet:
        out = GridSet.empty(self.domain)
        for _, s in self.pairs:
            out = out | s
        return out

    def max_density_ratio(self) -> float:
        """``max_j |Q_j| / |S_j|``."""
        d = self.domain.dimension
        return max(q.side ** d / s.count for q, s in self.pairs)

    def to_dict(self) -> dict:
        return {"cells": self.domain.cells,
                "pairs": [{"lower": list(q.lower), "side": q.side,
                           "S": [list(map(int, ix)) for ix in np.argwhere(s.mask)]}
                          for q, s in self.pairs]}

    @classmethod
    def from_dict(cls, domain: GridDomain, data: dict) -> "CubeFamily":
        pairs = []
        for item in data["pairs"]:
            mask = np.zeros(domain.shape, bool)
            for ix in item["S"]:
                mask[tuple(ix)] = True
            pairs.append((CubeSpec(tuple(item["lower"]), item["side"]), GridSet(domain, mask)))
        return cls(domain, tuple(pairs))


def raposo_ratio(u: WeightU, w: WeightW, fam: CubeFamily, q: float) -> float:
    """``W(u(U Q_j)) / W(u(U S_j)) / max_j (|Q_j|/|S_j|)^q``."""
    if not q > 0:
        raise InvalidArgument(f"q must be positive, got {q}")
    if fam.domain != u.domain:
        raise InvalidArgument("family and weight live on different grids")
    num = w.cumulative(u.measure(fam.union_q()))
    den = w.cumulative(u.measure(fam.union_s()))
    return num / den / fam.max_density_ratio() ** q


@dataclass(frozen=True)
class RaposoCertificate:
    family: CubeFamily
    q: float
    ratio: float
    level: int
    trial: int = -1

    def verify(self, u: WeightU, w: WeightW) -> bool:
        """Recompute the ratio from the stored family."""
        return raposo_ratio(u, w, self.family, self.q) == self.ratio

    def to_dict(self) -> dict:
        return {"q": self.q, "ratio": self.ratio, "level": self.level, "trial": self.trial,
                "family": self.family.to_dict()}


# ---------------------------------------------------------------------------
# search

DENSITIES = (0.5, 0.25, 0.125, 0.0625)


@dataclass
class _State:
    """Mutable family used by the search: cubes as (lower, side), S as masks."""

    lowers: list
    sides: list
    masks: list = field(default_factory=list)


class _Evaluator:
    def __init__(self, u: WeightU, w: WeightW, q: float, max_cubes: int = 8):
        self.u = u
        self.max_cubes = max_cubes
        self.w = w
        self.q = q
        self.dom = u.domain
        self.d = self.dom.dimension
        self.n = self.dom.cells
        self.masses = u.values

    def qmask(self, lower, side):
        m = np.zeros(self.dom.shape, bool)
        m[tuple(slice(lo, lo + side) for lo in lower)] = True
        return m

    def ratio(self, st: _State) -> float:
        uq = np.zeros(self.dom.shape, bool)
        us = np.zeros(self.dom.shape, bool)
        dens = 0.0
        for lo, side, m in zip(st.lowers, st.sides, st.masks):
            uq[tuple(slice(a, a + side) for a in lo)] = True
            us |= m
            dens = max(dens, side ** self.d / int(m.sum()))
        cv = self.dom.cell_volume
        num = self.w.cumulative(math.fsum(self.masses[uq]) * cv)
        den = self.w.cumulative(math.fsum(self.masses[us]) * cv)
        return num / den / dens ** self.q

    def consolidate(self, st: _State) -> _State:
        """Replace each S_j by Q_j intersected with the union of the S's.

        The union of the S's is unchanged and no |S_j| shrinks, so the
        ratio never decreases.
        """
        us = np.zeros(self.dom.shape, bool)
        for m in st.masks:
            us |= m
        masks = [self.qmask(lo, side) & us for lo, side in zip(st.lowers, st.sides)]
        return _State(list(st.lowers), list(st.sides), masks)

    def family(self, st: _State) -> CubeFamily:
        pairs = tuple((CubeSpec(tuple(lo), side), GridSet(self.dom, m))
                      for lo, side, m in zip(st.lowers, st.sides, st.masks))
        return CubeFamily(self.dom, pairs)


def _random_state(ev: _Evaluator, rng: np.random.Generator, max_cubes: int) -> _State:
    n, d = ev.n, ev.d
    J = int(rng.integers(1, max_cubes + 1))
    st = _State([], [], [])
    for _ in range(J):
        side = int(min(n, max(1, math.floor(math.exp(rng.uniform(0, math.log(n + 1)))))))
        lower = tuple(int(rng.integers(0, n - side + 1)) for _ in range(d))
        dens = DENSITIES[int(rng.integers(len(DENSITIES)))]
        vol = side ** d
        count = max(1, int(round(dens * vol)))
        m = np.zeros(ev.dom.shape, bool)
        kind = rng.random()
        if kind < 0.25:
            # one cell: the extreme case of a sparse subset
            m[tuple(int(rng.integers(a, a + side)) for a in lower)] = True
        elif kind < 0.625:
            # scattered subset of exactly `count` cells
            flat = rng.choice(vol, size=count, replace=False)
            local = np.zeros(vol, bool)
            local[flat] = True
            m[tuple(slice(a, a + side) for a in lower)] = local.reshape((side,) * d)
        else:
            # a sub-cube of roughly the requested density
            s = max(1, int(round(side * dens ** (1.0 / d))))
            off = tuple(int(rng.integers(0, side - s + 1)) for _ in range(d))
            m[tuple(slice(a + o, a + o + s) for a, o in zip(lower, off))] = True
        st.lowers.append(lower)
        st.sides.append(side)
        st.masks.append(m)
    return ev.consolidate(st)


def _moves(ev: _Evaluator, st: _State):
    """Candidate neighbours of ``st`` in a fixed order."""
    n, d = ev.n, ev.d
    u = ev.masses
    for j, (lo, side, m) in enumerate(zip(st.lowers, st.sides, st.masks)):
        # shrink S_j by one cell: the heaviest and the lightest
        if m.sum() > 1:
            idx = np.flatnonzero(m.ravel())
            weights = u.ravel()[idx]
            for pick in (idx[np.argmax(weights)], idx[np.argmin(weights)]):
                m2 = m.copy().ravel()
                m2[pick] = False
                yield _replace(st, j, lo, side, m2.reshape(m.shape))
        # keep only the lightest cell, or the lighter half, of S_j
        if m.sum() > 1:
            idx = np.flatnonzero(m.ravel())
            order = idx[np.argsort(u.ravel()[idx], kind="stable")]
            for keep in sorted({1, len(order) // 2}):
                m2 = np.zeros(m.size, bool)
                m2[order[:keep]] = True
                yield _replace(st, j, lo, side, m2.reshape(m.shape))
        # grow S_j by its lightest missing cell
        qm = ev.qmask(lo, side)
        free = np.flatnonzero((qm & ~m).ravel())
        if free.size:
            pick = free[np.argmin(u.ravel()[free])]
            m2 = m.copy().ravel()
            m2[pick] = True
            yield _replace(st, j, lo, side, m2.reshape(m.shape))
        # move / resize Q_j; S_j is clipped to the new cube
        steps = {1, max(1, side // 2), side}
        shapes = []
        for ax in range(d):
            for s in sorted(steps):
                for sign in (-1, 1):
                    lo2 = list(lo)
                    lo2[ax] += sign * s
                    shapes.append((tuple(lo2), side))
        for side2 in sorted({side - 1, side + 1, side * 2, side // 2}):
            if side2 >= 1:
                shapes.append((lo, side2))
                shapes.append((tuple(a + side - side2 for a in lo), side2))
        for lo2, side2 in shapes:
            if side2 > n or any(a < 0 or a + side2 > n for a in lo2):
                continue
            qm2 = ev.qmask(lo2, side2)
            m2 = m & qm2
            if not m2.any():
                continue
            yield _replace(st, j, lo2, side2, m2)
        # add a second cube around S_j: Q_j reflected through the bounding
        # box of S_j, or shifted by half a side
        if len(st.lowers) < ev.max_cubes:
            pts = np.argwhere(m)
            a, b = pts.min(axis=0), pts.max(axis=0) + 1
            extra = [tuple(int(a[i] + b[i] - lo[i] - side) for i in range(d))]
            for ax in range(d):
                for sign in (-1, 1):
                    lo2 = list(lo)
                    lo2[ax] += sign * max(1, side // 2)
                    extra.append(tuple(lo2))
            for lo2 in extra:
                if lo2 == tuple(lo) or any(x < 0 or x + side > n for x in lo2):
                    continue
                m2 = m & ev.qmask(lo2, side)
                if m2.any():
                    yield _State(st.lowers + [lo2], st.sides + [side], st.masks + [m2])
        # drop the pair entirely
        if len(st.lowers) > 1:
            yield _State(st.lowers[:j] + st.lowers[j + 1:], st.sides[:j] + st.sides[j + 1:],
                         st.masks[:j] + st.masks[j + 1:])


def _global_moves(ev: _Evaluator, st: _State):
    """Grow or shrink every cube at once, so that all density ratios move
    together: each cube keeps its S_j and extends (or retracts) on the side
    away from S_j's centre."""
    n = ev.n
    for delta in (1, -1):
        lowers, sides, masks = [], [], []
        for lo, side, m in zip(st.lowers, st.sides, st.masks):
            centre = np.argwhere(m).mean(axis=0)
            side2 = side + delta
            lo2 = []
            for i, a in enumerate(lo):
                mid = a + side / 2.0
                # extend below when S_j sits in the upper half of the cube
                lo2.append(a - delta if centre[i] + 0.5 >= mid else a)
            lo2 = tuple(min(max(x, 0), n - side2) for x in lo2) if side2 <= n else None
            if side2 < 1 or lo2 is None:
                break
            m2 = m & ev.qmask(lo2, side2)
            if not m2.any():
                break
            lowers.append(lo2)
            sides.append(side2)
            masks.append(m2)
        else:
            yield _State(lowers, sides, masks)


def _replace(st, j, lo, side, m):
    lowers, sides, masks = list(st.lowers), list(st.sides), list(st.masks)
    lowers[j], sides[j], masks[j] = tuple(lo), int(side), m
    return _State(lowers, sides, masks)


def _greedy(ev: _Evaluator, st: _State, max_rounds: int):
    best = ev.ratio(st)
    for _ in range(max_rounds):
        improved = False
        for cand in itertools.chain(_moves(ev, st), _global_moves(ev, st)):
            cand = ev.consolidate(cand)
            r = ev.ratio(cand)
            if r > best:
                best, st, improved = r, cand, True
        if not improved:
            break
    return st, best


def default_q_grid(p: float, points: int = 8) -> list[float]:
    """``points`` equispaced exponents strictly inside ``(0, p)``."""
    return [p * i / (points + 1) for i in range(1, points + 1)]


def raposo_search(u: WeightU, w: WeightW, p: float, budget: int, seed: int,
                  q_grid=None, max_cubes: int = 8, max_rounds: int = 64) -> list[RaposoCertificate]:
    """Best family found for each exponent ``q``.

    Trial ``t`` at exponent index ``i`` draws from a generator seeded by
    ``(seed, t, i)``, so a larger budget only adds trials and the best ratio
    never decreases.
    """
    if int(budget) != budget or budget < 1:
        raise InvalidArgument(f"budget must be a positive integer, got {budget}")
    if not p > 0:
        raise InvalidArgument(f"p must be positive, got {p}")
    q_grid = default_q_grid(p) if q_grid is None else [float(q) for q in q_grid]
    if any(not q > 0 for q in q_grid):
        raise InvalidArgument("every q must be positive")
    evs = [_Evaluator(u, w, q, max_cubes) for q in q_grid]
    best = [(-1.0, None, -1) for _ in q_grid]
    for t in range(int(budget)):
        # local optima found for one exponent are offered to all of them
        found = []
        for qi, ev in enumerate(evs):
            rng = np.random.default_rng([int(seed), t, qi])
            found.append(_greedy(ev, _random_state(ev, rng, max_cubes), max_rounds)[0])
        for qi, ev in enumerate(evs):
            for st in found:
                r = ev.ratio(st)
                if r > best[qi][0]:
                    best[qi] = (r, st, t)
    out = []
    for (_, st, t), ev in zip(best, evs):
        fam = ev.family(st)
        out.append(RaposoCertificate(fam, ev.q, raposo_ratio(u, w, fam, ev.q), u.domain.cells, t))
    return out


# ---------------------------------------------------------------------------
# exhaustive oracle for tiny grids

@numba.njit(cache=True)
def _exhaustive_kernel(cube_bits, cube_vol, Wmask, q):
    """max over nonempty T and thresholds R of the ratio of the family
    {(Q, Q & T): Q meets T, |Q|/|Q & T| <= R}."""
    nq = cube_bits.shape[0]
    best = 0.0
    best_T = 0
    best_R = 0.0
    ratios = np.empty(nq)
    inter = np.empty(nq, np.int64)
    order = np.empty(nq, np.int64)
    for T in range(1, Wmask.shape[0]):
        m = 0
        for i in range(nq):
            x = cube_bits[i] & T
            if x != 0:
                c = 0
                y = x
                while y:
                    y &= y - 1
                    c += 1
                ratios[m] = cube_vol[i] / c
                inter[m] = i
                m += 1
        if m == 0:
            continue
        idx = np.argsort(ratios[:m])
        for k in range(m):
            order[k] = inter[idx[k]]
        uq = 0
        us = 0
        k = 0
        while k < m:
            R = ratios[idx[k]]
            while k < m and ratios[idx[k]] == R:
                i = order[k]
                uq |= cube_bits[i]
                us |= cube_bits[i] & T
                k += 1
            val = Wmask[uq] / Wmask[us] / R ** q
            if val > best:
                best = val
                best_T = T
                best_R = R
    return best, best_T, best_R


def raposo_exhaustive(u: WeightU, w: WeightW, q: float, max_cells: int = 20):
    """Exact supremum of :func:`raposo_ratio` over every family of cubes in
    the box, for grids with at most ``max_cells`` cells.

    Returns ``(ratio, family)`` with a maximizing family.
    """
    dom = u.domain
    N = dom.size
    if N > max_cells:
        raise InvalidArgument(f"exhaustive search is limited to {max_cells} cells, got {N}")
    n, d = dom.cells, dom.dimension
    cubes, bits, vols = [], [], []
    for side in range(1, n + 1):
        for lower in np.ndindex(*((n - side + 1,) * d)):
            c = CubeSpec(tuple(lower), side)
            mask = c.cells(dom).mask.ravel()
            cubes.append(c)
            bits.append(int(np.dot(mask, 1 << np.arange(N, dtype=np.int64))))
            vols.append(float(side ** d))
    # u-measure and W of every subset of cells
    masses = u.values.ravel() * dom.cell_volume
    allm = np.arange(1 << N, dtype=np.int64)
    umeas = np.zeros(1 << N)
    for i in range(N):
        umeas += np.where((allm >> i) & 1, masses[i], 0.0)
    Wmask = w.cumulative_array(umeas)
    best, T, R = _exhaustive_kernel(np.array(bits, np.int64), np.array(vols), Wmask, float(q))
    tmask = np.array([(T >> i) & 1 for i in range(N)], bool).reshape(dom.shape)
    pairs = []
    for c, b, v in zip(cubes, bits, vols):
        inter = b & T
        if inter and v / bin(inter).count("1") <= R:
            pairs.append((c, GridSet(dom, c.cells(dom).mask & tmask)))
    return float(best), CubeFamily(dom, tuple(pairs))
