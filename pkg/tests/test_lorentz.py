import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lorentzmax import (GridDomain, GridFunction, GridSet, InvalidArgument, LorentzParams,
                        PiecewiseTailWeight, PowerWeight, WeightU, lambda_norm, lambda_norm_p,
                        lambda_weak_norm, layers, rearrangement)
from lorentzmax.lorentz import lambda_weak_norm_p, lp_norm_p

from oracles import layer_cake_quad, quad


def params(p=2.0, u_alpha=0.0, w=None, dim=1, L=4.0, n=32):
    d = GridDomain(dim, L, n)
    return LorentzParams(p, WeightU.power(d, u_alpha), w or PowerWeight(0.0))


def random_case(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(1, 3))
    n = int(rng.integers(2, 40 if dim == 1 else 10))
    p = float(rng.choice([0.5, 1.0, 1.5, 2.0, 3.7]))
    w = PowerWeight(float(rng.uniform(-0.9, 3.0)))
    P = params(p, float(rng.uniform(-0.9, 2.0)), w, dim, float(rng.uniform(0.5, 5)), n)
    d = P.domain
    k = int(rng.integers(1, 6))
    levels = rng.uniform(0.0, 5.0, k)
    vals = rng.choice(np.concatenate([[0.0], levels]), size=d.shape)
    return GridFunction(d, vals), P, rng


# --- examples -----------------------------------------------------------------------

@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 3.0])
def test_indicator(p):
    P = params(p, 0.5, PowerWeight(1.0))
    E = GridSet.from_boxes(P.domain, [[-1, 0.5], [2, 3]])
    expected = P.w.cumulative(P.u.measure(E)) ** (1 / p)
    chi = E.indicator()
    assert lambda_norm(chi, P) == pytest.approx(expected, rel=1e-15)
    assert lambda_weak_norm(chi, P) == pytest.approx(expected, rel=1e-15)


def test_lebesgue_unit_interval():
    P = params(2.0)
    f = GridFunction.from_boxes(P.domain, [(1.0, [0, 1])])
    assert lambda_norm(f, P) == 1.0


@pytest.mark.parametrize("p", [0.7, 2.0, 3.0])
def test_two_layers(p):
    P = params(p, 1.0, PowerWeight(0.5))
    A = GridSet.from_boxes(P.domain, [[0, 1]])
    B = GridSet.from_boxes(P.domain, [[-2, -1], [1, 1.5]])
    f = A.indicator() * 2.0 + B.indicator()
    W = lambda E: P.w.cumulative(P.u.measure(E))
    strong = (W(A | B) + (2 ** p - 1) * W(A)) ** (1 / p)
    weak = max(W(A | B) ** (1 / p), 2 * W(A) ** (1 / p))
    assert lambda_norm(f, P) == pytest.approx(strong, rel=1e-14)
    assert lambda_weak_norm(f, P) == pytest.approx(weak, rel=1e-14)


def test_zero_function():
    P = params()
    z = GridFunction.zeros(P.domain)
    assert lambda_norm(z, P) == 0.0 and lambda_weak_norm(z, P) == 0.0


def test_layers():
    P = params(2.0)
    f = GridFunction.from_boxes(P.domain, [(2.0, [0, 1]), (1.0, [1, 3])])
    lay = layers(f, P)
    assert lay.levels.tolist() == [1.0, 2.0]
    assert lay.u_measures.tolist() == [3.0, 1.0]


def test_params_validation():
    d = GridDomain(1, 2.0, 16)
    with pytest.raises(InvalidArgument):
        LorentzParams(0.0, WeightU.constant(d), PowerWeight(0.0))
    with pytest.raises(InvalidArgument):
        LorentzParams(-1.0, WeightU.constant(d), PowerWeight(0.0))
    # W jumps by 18 orders of magnitude between r = 1 and r = 2
    bad = PiecewiseTailWeight((1.0, 2.0), (1e-9, 1e9), 0.0)
    with pytest.raises(InvalidArgument):
        LorentzParams(2.0, WeightU.constant(d), bad)


# --- oracles --------------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(15))
def test_strong_norm_matches_quadrature(seed):
    f, P, _ = random_case(seed)
    assert lambda_norm_p(f, P) == pytest.approx(layer_cake_quad(f, P.u, P.w, P.p), rel=1e-9)


@given(st.integers(0, 2 ** 32 - 1))
def test_weak_below_strong_exactly(seed):
    f, P, _ = random_case(seed)
    assert lambda_weak_norm_p(f, P) <= lambda_norm_p(f, P)
    assert lambda_weak_norm(f, P) <= lambda_norm(f, P)


@given(st.integers(0, 2 ** 32 - 1))
def test_lebesgue_u_equals_rearrangement_integral(seed):
    f, P, _ = random_case(seed)
    P = LorentzParams(P.p, WeightU.constant(P.domain), P.w)
    g = rearrangement(f)
    # int_0^inf p t^(p-1) W(|{f* > t}|) dt from the step function f*
    edges = np.concatenate([[0.0], g.values[::-1]])
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        Wm = P.w.cumulative(g.measure_above(lo))
        total += quad(lambda t: P.p * t ** (P.p - 1) * Wm, lo, hi)
    assert lambda_norm_p(f, P) == pytest.approx(total, rel=1e-9)


@given(st.integers(0, 2 ** 32 - 1))
def test_lebesgue_w_reduces_to_weighted_lp(seed):
    f, P, _ = random_case(seed)
    P = LorentzParams(P.p, P.u, PowerWeight(0.0))
    assert math.isclose(lambda_norm_p(f, P), lp_norm_p(f, P.u, P.p), rel_tol=1e-9)


@given(st.integers(0, 2 ** 32 - 1), st.one_of(st.just(0.0), st.floats(1e-6, 50.0)))
def test_scaling(seed, c):
    f, P, _ = random_case(seed)
    assert math.isclose(lambda_norm(f * c, P), c * lambda_norm(f, P), rel_tol=1e-13, abs_tol=1e-300)
    assert math.isclose(lambda_weak_norm(f * c, P), c * lambda_weak_norm(f, P), rel_tol=1e-13,
                        abs_tol=1e-300)


def test_scaling_exact_for_square():
    P = params(2.0, 0.0)
    f = GridFunction.from_boxes(P.domain, [(0.3, [0, 1]), (0.7, [-2, 0.5])])
    assert lambda_norm(f * 2.0, P) == 2.0 * lambda_norm(f, P)


@given(st.integers(0, 2 ** 32 - 1))
def test_monotone(seed):
    f, P, rng = random_case(seed)
    g = f + GridFunction(P.domain, rng.uniform(0, 1, P.domain.shape) * (rng.random(P.domain.shape) < 0.3))
    assert lambda_norm(f, P) <= lambda_norm(g, P) * (1 + 1e-14)
    assert lambda_weak_norm(f, P) <= lambda_weak_norm(g, P) * (1 + 1e-14)
