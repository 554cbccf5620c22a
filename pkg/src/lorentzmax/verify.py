"""Numerical checks of the maximal-function inequalities on grids.

Every check returns empirical constants; nothing here asserts a specific
value for an implied constant. :func:`equivalence_report` compares the
weak- and strong-type operator-norm estimates of ``M`` on the weighted
Lorentz space across refinement levels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyFunction, InvalidArgument
from .lorentz import LorentzParams, lambda_norm, lambda_weak_norm
from .maximal import maximal_fast
from .measure import GridDomain, GridFunction, GridSet, PowerWeight
from .rearrange import hardy, rearrangement

#: per-doubling factor above which an estimate counts as growing
GROWTH_FACTOR = 2.0 ** 0.125
#: total growth below which an estimate counts as stable
STABLE_GROWTH = 1.25


def phi(x: float) -> float:
    """``x (1 + log(1/x))`` on ``(0, 1]``."""
    if not 0 < x <= 1:
        raise InvalidArgument(f"phi is defined on (0, 1], got {x}")
    return x * (1.0 - math.log(x))


def default_tgrid(domain: GridDomain, points: int = 64) -> np.ndarray:
    """Geometric grid from one cell to 7/8 of the box volume."""
    return np.geomspace(domain.cell_volume, 0.875 * domain.volume, points)


def riesz_sandwich(f: GridFunction, tgrid=None) -> tuple[float, float]:
    """Smallest and largest value of ``(Mf)*(t) / Pf*(t)`` over ``tgrid``."""
    if f.is_zero():
        raise EmptyFunction("the sandwich ratio needs a nonzero function")
    tgrid = default_tgrid(f.domain) if tgrid is None else np.asarray(tgrid, dtype=float)
    if np.any(tgrid <= 0):
        raise InvalidArgument("t values must be positive")
    fstar = rearrangement(f)
    mstar = rearrangement(maximal_fast(f))
    ratios = mstar(tgrid) / hardy(fstar, tgrid)
    return float(ratios.min()), float(ratios.max())


def _check_lambda(lam: float):
    if not 0 < lam < 1:
        raise InvalidArgument(f"lambda must lie in (0, 1), got {lam}")


def truncated_maximal(E: GridSet, lam: float) -> tuple[GridFunction, GridFunction]:
    """``(M chi_E, chi_{M chi_E > lam} M chi_E)``."""
    m = maximal_fast(E.indicator())
    return m, GridFunction(E.domain, np.where(m.values > lam, m.values, 0.0))


def lemma21_check(E: GridSet, lam: float, P: LorentzParams) -> tuple[float, float]:
    """``(||g||^p, (1 + log(1/lam)) ||chi_E||^p)`` with ``g`` the truncated
    maximal function of ``chi_E``."""
    _check_lambda(lam)
    if E.is_empty():
        return 0.0, 0.0
    _, g = truncated_maximal(E, lam)
    lhs = lambda_norm(g, P) ** P.p
    base = (1.0 - math.log(lam)) * lambda_norm(E.indicator(), P) ** P.p
    return lhs, base


def lemma22_check(E: GridSet, lam: float) -> float:
    """``min M(g) / (lam (1 - log lam))`` over the cells where ``M chi_E > lam``."""
    _check_lambda(lam)
    if E.is_empty():
        raise InvalidArgument("E must be nonempty")
    m, g = truncated_maximal(E, lam)
    level = m.values > lam
    if not level.any():
        raise InvalidArgument("the level set is empty")
    mg = maximal_fast(g).values
    return float(mg[level].min() / (lam * (1.0 - math.log(lam))))


def corollary_inclusion_check(E: GridSet, lam: float, c: float) -> bool:
    """Whether ``{M chi_E > lam}`` lies in ``{M g > c lam (1 - log lam)}``."""
    _check_lambda(lam)
    if not c > 0:
        raise InvalidArgument(f"c must be positive, got {c}")
    m, g = truncated_maximal(E, lam)
    level = m.values > lam
    mg = maximal_fast(g).values
    return bool(np.all(mg[level] > c * lam * (1.0 - math.log(lam))))


def prop24_integral(E: GridSet, r: float, P: LorentzParams) -> float:
    """``int_0^1 lam^(r-1) W(u({M chi_E > lam}))^(r/p) d lam``.

    ``M chi_E`` takes finitely many values ``v_1 < ... < v_k`` on the box,
    so the level set is constant for ``lam`` in ``[v_(i-1), v_i)`` and the
    integral is a finite sum of power-function pieces.
    """
    if not r > 0:
        raise InvalidArgument(f"r must be positive, got {r}")
    if E.is_empty():
        return 0.0
    m = maximal_fast(E.indicator()).values.ravel()
    masses = P.u.cell_masses().ravel()
    order = np.argsort(-m, kind="stable")
    v = m[order]
    cum = np.cumsum(masses[order])
    ends = np.flatnonzero(np.append(v[1:] != v[:-1], True))
    levels = np.minimum(v[ends][::-1], 1.0)
    umeas = cum[ends][::-1]
    Wr = P.w.cumulative_array(umeas) ** (r / P.p)
    steps = np.diff(levels ** r, prepend=0.0)
    return math.fsum(steps * Wr) / r


# ---------------------------------------------------------------------------
# operator-norm estimates

def _random_cubes(rng, n: int, d: int, count: int) -> np.ndarray:
    mask = np.zeros((n,) * d, bool)
    for _ in range(count):
        side = int(min(n, max(1, math.floor(math.exp(rng.uniform(0, math.log(n + 1)))))))
        lower = [int(rng.integers(0, n - side + 1)) for _ in range(d)]
        mask[tuple(slice(a, a + side) for a in lower)] = True
    return mask


def witness(domain: GridDomain, seed: int, index: int) -> tuple[str, GridFunction]:
    """Witness function number ``index``.

    0 is the indicator of the central cell; odd indices are indicators of
    unions of up to 8 random cubes; other even indices are 3-level simple
    functions. Cube sides are log-uniform in cells, so the same witness
    index has the same shape relative to the grid at every resolution.
    """
    n, d = domain.cells, domain.dimension
    if index == 0:
        vals = np.zeros(domain.shape)
        vals[(n // 2,) * d] = 1.0
        return "center-cell", GridFunction(domain, vals)
    rng = np.random.default_rng([int(seed), int(index)])
    if index % 2:
        mask = _random_cubes(rng, n, d, int(rng.integers(1, 9)))
        return f"cubes-{index}", GridFunction(domain, mask.astype(float))
    vals = np.zeros(domain.shape)
    for level in sorted(rng.uniform(0.1, 1.0, size=3), reverse=True):
        mask = _random_cubes(rng, n, d, int(rng.integers(1, 4)))
        vals = np.where(mask & (vals == 0), level, vals)
    if not vals.any():
        vals[(n // 2,) * d] = 1.0
    return f"levels-{index}", GridFunction(domain, vals)


@dataclass(frozen=True)
class OpnormEstimate:
    estimate: float
    witness: str
    kind: str
    level: int

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "witness": self.witness, "kind": self.kind,
                "level": self.level}


def _witness_ratios(P: LorentzParams, trials: int, seed: int):
    """(witness id, weak ratio, strong ratio) for every witness."""
    rows = []
    for i in range(int(trials)):
        wid, f = witness(P.domain, seed, i)
        mf = maximal_fast(f)
        nf = lambda_norm(f, P)
        rows.append((wid, lambda_weak_norm(mf, P) / nf, lambda_norm(mf, P) / nf))
    return rows


def _best(rows, col: int):
    best = max(range(len(rows)), key=lambda i: (rows[i][col], -i))
    return rows[best][col], rows[best][0]


def opnorm_estimate(P: LorentzParams, kind: str, trials: int, seed: int) -> OpnormEstimate:
    """Largest ``||Mf|| / ||f||`` over the witnesses (weak or strong norm of ``Mf``)."""
    if kind not in ("weak", "strong"):
        raise InvalidArgument(f"kind must be 'weak' or 'strong', got {kind!r}")
    if int(trials) != trials or trials < 1:
        raise InvalidArgument(f"trials must be a positive integer, got {trials}")
    rows = _witness_ratios(P, trials, seed)
    est, wid = _best(rows, 1 if kind == "weak" else 2)
    return OpnormEstimate(float(est), wid, kind, P.domain.cells)


def classify_growth(levels, values) -> str:
    """GROWING, STABLE or UNCLEAR for estimates along refinement levels.

    Growing means every per-doubling factor exceeds ``GROWTH_FACTOR`` over
    at least three doublings; stable means the estimate never rises more
    than ``STABLE_GROWTH`` above its first value.
    """
    levels = np.asarray(levels, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.size >= 2:
        doublings = np.log2(levels[1:] / levels[:-1])
        factors = (values[1:] / values[:-1]) ** (1.0 / doublings)
        if np.log2(levels[-1] / levels[0]) >= 3 and np.all(factors > GROWTH_FACTOR):
            return "GROWING"
    if np.max(values) / values[0] < STABLE_GROWTH:
        return "STABLE"
    return "UNCLEAR"


@dataclass
class EquivalenceReport:
    p: float
    weights: dict
    rows: list = field(default_factory=list)
    weak_class: str = ""
    strong_class: str = ""
    verdict: str = ""
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"p": self.p, "weights": self.weights, "rows": self.rows,
                "weak_class": self.weak_class, "strong_class": self.strong_class,
                "verdict": self.verdict, "flags": self.flags}


def _is_boundary(P: LorentzParams) -> bool:
    return isinstance(P.w, PowerWeight) and P.w.alpha == P.p - 1.0


def equivalence_report(P: LorentzParams, levels, trials: int, seed: int) -> EquivalenceReport:
    """Weak and strong operator-norm estimates at each refinement level.

    Both kinds use the same witnesses, so the weak estimate never exceeds
    the strong one in a row.
    """
    levels = [int(n) for n in levels]
    if not levels:
        raise InvalidArgument("at least one refinement level is needed")
    rep = EquivalenceReport(P.p, {"u": P.u.spec, "w": P.w.to_spec()})
    for n in levels:
        Pn = P.at_cells(n)
        rows = _witness_ratios(Pn, trials, seed)
        weak, wid_weak = _best(rows, 1)
        strong, wid_strong = _best(rows, 2)
        rep.rows.append({"level": n, "weak": weak, "strong": strong,
                         "weak_witness": wid_weak, "strong_witness": wid_strong})
    rep.weak_class = classify_growth(levels, [r["weak"] for r in rep.rows])
    rep.strong_class = classify_growth(levels, [r["strong"] for r in rep.rows])
    if _is_boundary(P):
        rep.flags.append("BOUNDARY")
        rep.verdict = "BOUNDARY"
    elif rep.weak_class == rep.strong_class == "STABLE":
        rep.verdict = "BOTH-STABLE"
    elif rep.weak_class == rep.strong_class == "GROWING":
        rep.verdict = "BOTH-GROWING"
    elif {rep.weak_class, rep.strong_class} == {"STABLE", "GROWING"}:
        rep.flags.append("DISCRETIZATION-ANOMALY")
        rep.verdict = "SPLIT"
    else:
        rep.verdict = "INCONCLUSIVE"
    return rep
