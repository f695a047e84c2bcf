import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigvalsh_tridiagonal

from bandspectra.eigensolver import (
    SymTridiagonal,
    count_in_interval,
    default_tol,
    eigenvalues,
    sturm_count,
    sturm_counts,
)


def free(n):
    return SymTridiagonal(np.zeros(n), np.ones(n - 1))


def free_eigs(n):
    return np.sort(2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1)))


def random_tridiagonal(rng, n):
    return SymTridiagonal(rng.normal(size=n), rng.normal(size=n - 1))


# -- sturm_count ---------------------------------------------------------------


def test_sturm_count_2x2():
    m = SymTridiagonal([0.0, 0.0], [1.0])
    assert sturm_count(m, 0.0) == 1


def test_sturm_count_free_n3():
    # eigenvalues -sqrt2, 0, sqrt2
    assert sturm_count(free(3), 1.0) == 2


def test_sturm_count_below_spectrum_is_zero():
    rng = np.random.default_rng(3)
    m = random_tridiagonal(rng, 40)
    assert sturm_count(m, -m.gershgorin_radius() - 1.0) == 0
    assert sturm_count(m, m.gershgorin_radius() + 1.0) == 40


def test_sturm_count_zero_pivot_counts_tie_as_below():
    # x = 1 is an exact eigenvalue of [[0,1],[1,0]]: second pivot is exactly 0
    m = SymTridiagonal([0.0, 0.0], [1.0])
    assert sturm_count(m, 1.0) == 2
    # and (a, b] intervals still partition
    assert count_in_interval(m, -2.0, 1.0) == 2
    assert count_in_interval(m, 1.0, 3.0) == 0


def test_sturm_count_zero_matrix():
    # every pivot is zero and the substitute must not be zero either
    m = SymTridiagonal([0.0, 0.0, 0.0], [0.0, 0.0])
    assert sturm_count(m, 0.0) == 3
    assert sturm_count(m, -1e-300) == 0
    assert list(eigenvalues(m, 1e-12).values) == pytest.approx([0.0] * 3, abs=1e-12)


def test_sturm_count_rejects_nonfinite():
    with pytest.raises(ValueError):
        sturm_count(free(3), np.inf)


def test_sturm_counts_matches_scalar():
    rng = np.random.default_rng(0)
    m = random_tridiagonal(rng, 60)
    xs = rng.uniform(-4, 4, size=50)
    assert list(sturm_counts(m, xs)) == [sturm_count(m, x) for x in xs]
    assert list(sturm_counts(m, xs, jobs=4)) == [sturm_count(m, x) for x in xs]


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-5, 5), min_size=1, max_size=30),
    st.data(),
)
def test_sturm_count_monotone(diag, data):
    n = len(diag)
    off = data.draw(st.lists(st.floats(-3, 3), min_size=n - 1, max_size=n - 1))
    m = SymTridiagonal(diag, off)
    r = m.gershgorin_radius() + 1.0
    xs = np.linspace(-r, r, 101)
    c = sturm_counts(m, xs)
    assert c[0] == 0 and c[-1] == n
    assert np.all(np.diff(c) >= 0)


# -- count_in_interval ---------------------------------------------------------


def test_count_in_interval_examples():
    assert count_in_interval(free(3), -1.0, 1.0) == 1
    assert count_in_interval(free(3), 0.5, 0.5) == 0
    assert count_in_interval(free(100), -2.0, 2.0) == 100


def test_count_in_interval_rejects_reversed():
    with pytest.raises(ValueError):
        count_in_interval(free(3), 1.0, 0.0)


# -- eigenvalues ---------------------------------------------------------------


def test_eigenvalues_1x1():
    assert eigenvalues(SymTridiagonal([3.5], []), 1e-12).values[0] == pytest.approx(3.5, abs=1e-12)


def test_eigenvalues_free_n3():
    vals = eigenvalues(free(3), 1e-12).values
    np.testing.assert_allclose(vals, [-np.sqrt(2), 0.0, np.sqrt(2)], atol=1e-12)


@pytest.mark.parametrize("n", [2, 17, 250])
def test_eigenvalues_free_closed_form(n):
    el = eigenvalues(free(n), 1e-11)
    assert np.max(np.abs(el.values - free_eigs(n))) <= 1e-11


def test_eigenvalues_against_lapack():
    rng = np.random.default_rng(11)
    for n in (5, 64, 300):
        m = random_tridiagonal(rng, n)
        ours = eigenvalues(m).values
        ref = eigvalsh_tridiagonal(m.diag, m.offdiag)
        assert np.max(np.abs(ours - ref)) <= 2 * default_tol(m)


def test_eigenvalues_multiplicity_from_decoupled_blocks():
    # zero off-diagonals: eigenvalues are the diagonal, repeated values included
    d = [1.0, -2.0, 1.0, 1.0, 0.5]
    vals = eigenvalues(SymTridiagonal(d, [0.0] * 4), 1e-12).values
    np.testing.assert_allclose(vals, sorted(d), atol=1e-12)


def test_eigenvalues_independent_of_jobs():
    rng = np.random.default_rng(5)
    m = random_tridiagonal(rng, 333)
    a = eigenvalues(m, jobs=1).values
    b = eigenvalues(m, jobs=7).values
    assert np.array_equal(a, b)


def test_eigenvalues_rejects_bad_tol():
    with pytest.raises(ValueError):
        eigenvalues(free(3), 0.0)


def test_symtridiagonal_validation():
    with pytest.raises(ValueError):
        SymTridiagonal([], [])
    with pytest.raises(ValueError):
        SymTridiagonal([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        SymTridiagonal([1.0, np.nan], [1.0])


# -- properties ----------------------------------------------------------------


def test_gershgorin_encloses_eigenvalues():
    rng = np.random.default_rng(2)
    for _ in range(20):
        m = random_tridiagonal(rng, int(rng.integers(1, 80)))
        vals = eigenvalues(m).values
        r = m.gershgorin_radius()
        assert vals.min() >= -r and vals.max() <= r


def test_cauchy_interlacing():
    rng = np.random.default_rng(8)
    for _ in range(25):
        n = int(rng.integers(2, 120))
        m = random_tridiagonal(rng, n)
        sub = SymTridiagonal(m.diag[:-1], m.offdiag[:-1])
        big = eigenvalues(m, 1e-12).values
        small = eigenvalues(sub, 1e-12).values
        slack = 1e-10
        assert np.all(big[:-1] <= small + slack)
        assert np.all(small <= big[1:] + slack)


def test_interval_count_consistent_with_list():
    rng = np.random.default_rng(21)
    checked = 0
    for _ in range(40):
        n = int(rng.integers(1, 500))
        m = random_tridiagonal(rng, n)
        el = eigenvalues(m)
        a, b = np.sort(rng.uniform(-4, 4, size=2))
        near = np.min(np.abs(np.concatenate([el.values - a, el.values - b])))
        if near <= el.tol:
            continue
        expected = int(np.sum((el.values > a) & (el.values <= b)))
        assert count_in_interval(m, a, b) == expected
        checked += 1
    assert checked >= 30
