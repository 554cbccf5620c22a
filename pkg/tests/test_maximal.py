import numpy as np
import pytest
from hypothesis import given, strategies as st

from lorentzmax import (CubeSpec, GridDomain, GridFunction, GridSet, InvalidArgument, cube_average,
                        level_set, maximal, maximal_fast, maximal_naive)

from oracles import maximal_1d_exact, maximal_2d_exact


def dyadic_values(rng, shape, zero_fraction=0.4):
    vals = rng.integers(0, 17, size=shape) / 8.0
    vals[rng.random(shape) < zero_fraction] = 0.0
    return vals


def chi_unit(L=4.0, n=64):
    d = GridDomain(1, L, n)
    return GridFunction.from_boxes(d, [(1.0, [0, 1])])


# --- examples ------------------------------------------------------------------

def test_constant_with_cubes_inside_the_box():
    f = GridFunction.constant(GridDomain(2, 1.0, 8), 0.375)
    for fn in (maximal_naive, maximal_fast):
        assert np.all(fn(f, reach=0).values == 0.375)


def test_indicator_profile_at_two():
    f = chi_unit()
    h = f.domain.h
    mf = maximal_naive(f).values
    # the cell ending at x = 2 sees the optimum [0, 2]
    assert mf[f.domain.index_of([2 - h / 2])] == 0.5
    # the cell starting at x = 2 is within h of the point value
    assert abs(mf[f.domain.index_of([2 + h / 2])] - 0.5) <= h


def test_indicator_closed_form_profile():
    f = chi_unit(L=4.0, n=256)
    h = f.domain.h
    x = f.domain.axis_centers()
    exact = np.where(x >= 1, 1 / np.maximum(x, 1e-300),
                     np.where(x <= 0, 1 / (1 - np.minimum(x, 0)), 1.0))
    for fn in (maximal_naive, maximal_fast):
        assert np.max(np.abs(fn(f).values - exact)) <= h


@pytest.mark.parametrize("dim", [1, 2])
def test_zero_function(dim):
    f = GridFunction.zeros(GridDomain(dim, 1.0, 8))
    assert not np.any(maximal_naive(f).values) and not np.any(maximal_fast(f).values)


# --- fast == naive == exact ---------------------------------------------------------

@pytest.mark.parametrize("seed", range(40))
def test_1d_matches_exact_rationals(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 13))
    vals = dyadic_values(rng, n)
    f = GridFunction(GridDomain(1, 1.0, n), vals)
    exact = np.array([float(v) for v in maximal_1d_exact(vals)])
    assert np.array_equal(maximal_naive(f).values, exact)
    assert np.array_equal(maximal_fast(f).values, exact)


@pytest.mark.parametrize("seed", range(6))
def test_2d_matches_exact_rationals(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    vals = dyadic_values(rng, (n, n))
    f = GridFunction(GridDomain(2, 1.0, n), vals)
    exact = np.array([[float(v) for v in row] for row in maximal_2d_exact(vals)])
    assert np.array_equal(maximal_naive(f).values, exact)
    assert np.array_equal(maximal_fast(f).values, exact)


@pytest.mark.parametrize("seed", range(100))
def test_1d_fast_equals_naive(seed):
    rng = np.random.default_rng([1, seed])
    n = int(rng.integers(1, 257))
    kind = seed % 3
    if kind == 0:
        vals = rng.random(n)
    elif kind == 1:
        vals = dyadic_values(rng, n, 0.6)
    else:  # long constant runs
        vals = np.repeat(rng.random(max(1, n // 16)), 16)[:n]
        vals = np.pad(vals, (0, n - vals.size))
    f = GridFunction(GridDomain(1, 3.0, n), vals)
    assert np.array_equal(maximal_fast(f).values, maximal_naive(f).values)


@pytest.mark.parametrize("seed", range(10))
def test_2d_fast_equals_naive(seed):
    rng = np.random.default_rng([2, seed])
    n = int(rng.integers(1, 25))
    vals = rng.random((n, n)) * (rng.random((n, n)) < 0.5)
    f = GridFunction(GridDomain(2, 1.0, n), vals)
    assert np.array_equal(maximal_fast(f).values, maximal_naive(f).values)


def test_maximal_alias():
    f = chi_unit()
    assert np.array_equal(maximal(f).values, maximal_fast(f).values)


# --- properties ---------------------------------------------------------------------

dims = st.sampled_from([1, 2])
seeds = st.integers(0, 2 ** 32 - 1)


def random_pair(seed, dim, dyadic=True):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 33 if dim == 1 else 9))
    d = GridDomain(dim, 1.0, n)
    make = (lambda: dyadic_values(rng, d.shape)) if dyadic else (lambda: rng.random(d.shape))
    return GridFunction(d, make()), GridFunction(d, make()), rng


@given(seeds, dims)
def test_sublinear(seed, dim):
    f, g, _ = random_pair(seed, dim, dyadic=False)
    lhs = maximal_fast(f + g).values
    rhs = maximal_fast(f).values + maximal_fast(g).values
    assert np.all(lhs <= rhs * (1 + 1e-12))


@given(seeds, dims, st.integers(-6, 6))
def test_homogeneous_exact_for_powers_of_two(seed, dim, k):
    f, _, _ = random_pair(seed, dim, dyadic=False)
    c = 2.0 ** k
    assert np.array_equal(maximal_fast(f * c).values, c * maximal_fast(f).values)


@given(seeds, dims, st.one_of(st.just(0.0), st.floats(1e-6, 100.0)))
def test_homogeneous(seed, dim, c):
    f, _, _ = random_pair(seed, dim, dyadic=False)
    np.testing.assert_allclose(maximal_fast(f * c).values, c * maximal_fast(f).values,
                               rtol=1e-13, atol=0)


@given(seeds, dims)
def test_monotone(seed, dim):
    f, g, _ = random_pair(seed, dim)
    big = f + g
    assert np.all(maximal_fast(f).values <= maximal_fast(big).values)


@given(seeds, dims)
def test_bounds_exact_on_dyadic_values(seed, dim):
    f, _, _ = random_pair(seed, dim)
    mf = maximal_fast(f).values
    assert np.all(f.values <= mf) and np.all(mf <= f.values.max())


@given(seeds, dims)
def test_bounds_up_to_rounding(seed, dim):
    f, _, _ = random_pair(seed, dim, dyadic=False)
    mf = maximal_fast(f).values
    assert np.all(f.values <= mf * (1 + 1e-13)) and np.all(mf <= f.values.max() * (1 + 1e-13))


@given(seeds, dims)
def test_refinement_never_decreases(seed, dim):
    f, _, _ = random_pair(seed, dim)
    coarse = maximal_fast(f).values
    fine = maximal_fast(f.refine(2)).values
    for ax in range(dim):
        coarse = np.repeat(coarse, 2, axis=ax)
    assert np.all(fine >= coarse)


@given(seeds, dims)
def test_reach_one_loses_nothing(seed, dim):
    f, _, _ = random_pair(seed, dim, dyadic=(dim == 2))
    assert np.array_equal(maximal_fast(f, reach=1).values, maximal_naive(f, reach=2).values)


# --- level sets and cubes ---------------------------------------------------------------

def test_level_set_above_max_is_empty():
    f = chi_unit()
    assert level_set(f, 1.0).is_empty()
    assert level_set(f, 3.0).is_empty()


def test_level_set_of_indicator():
    f = chi_unit()
    assert level_set(f, 0.5) == GridSet.from_boxes(f.domain, [[0, 1]])


def test_level_set_of_maximal_indicator():
    f = chi_unit()
    h = f.domain.h
    S = level_set(maximal_fast(f), 0.5)
    # the two boundary cells of (-1, 2) attain exactly 1/2 and drop out
    assert S == GridSet.from_boxes(f.domain, [[-1 + h, 2 - h]])


def test_level_set_needs_positive_level():
    with pytest.raises(InvalidArgument):
        level_set(chi_unit(), 0.0)


def test_cube_spec():
    d = GridDomain(2, 1.0, 4)
    q = CubeSpec((-1, 2), 3)
    assert not q.inside(d)
    assert q.cells(d).count == 4
    assert q.volume(d) == pytest.approx(2.25)
    assert q.bounds(d) == [-1.5, 0.0, 0.0, 1.5]
    with pytest.raises(InvalidArgument):
        CubeSpec((0,), 0)
    f = GridFunction.constant(d, 2.0)
    assert cube_average(f, q) == pytest.approx(8 / 9)
    with pytest.raises(InvalidArgument):
        cube_average(f, CubeSpec((0,), 1))


def test_reach_must_be_natural():
    with pytest.raises(InvalidArgument):
        maximal_fast(chi_unit(), reach=-1)
