import numpy as np
import pytest
from scipy.optimize import linprog

from crconvex.lp import Unbounded, simplex_max


def highs_max(c, A, b):
    res = linprog(-np.asarray(c), A_ub=A, b_ub=b, bounds=[(0, None)] * len(c), method="highs")
    assert res.status == 0
    return -res.fun


def test_textbook_problem():
    # max 3x + 5y  s.t.  x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
    res = simplex_max([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18], perturb=0)
    assert res.value == pytest.approx(36)
    assert np.allclose(res.x, [2, 6])


def test_degenerate_problem_terminates():
    # many constraints through the same vertex
    A = [[1, 1], [1, 2], [2, 1], [1, 0], [0, 1], [3, 3]]
    b = [2, 3, 3, 1, 1, 6]
    res = simplex_max([1, 1], A, b, perturb=0)
    assert res.value == pytest.approx(2)


def test_unbounded():
    with pytest.raises(Unbounded):
        simplex_max([1, 1], [[1, -1]], [1])


def test_requires_feasible_origin():
    with pytest.raises(ValueError):
        simplex_max([1], [[1]], [-1])


@pytest.mark.parametrize("seed", range(25))
def test_random_lps_match_highs(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(5, 80), rng.integers(2, 12)
    A = rng.normal(size=(m, n))
    A = np.vstack([A, np.eye(n)])  # keeps the problem bounded
    b = np.concatenate([rng.uniform(0, 10, m), rng.uniform(1, 5, n)])
    c = rng.normal(size=n)
    res = simplex_max(c, A, b)
    want = highs_max(c, A, b)
    assert res.value == pytest.approx(want, rel=1e-7, abs=1e-7)
    assert np.all(A @ res.x <= b + 1e-7)


@pytest.mark.parametrize("seed", range(5))
def test_cutting_plane_shaped_lps(seed):
    # many nearly parallel rows, as produced by clustered cuts near an optimum
    rng = np.random.default_rng(100 + seed)
    n = 7
    base = rng.normal(size=(40, n - 1))
    rows = np.vstack([base + 1e-6 * rng.normal(size=base.shape) for _ in range(6)])
    A = np.hstack([np.ones((len(rows), 1)), -rows * 500])
    b = rng.uniform(1000, 2000, len(rows))
    A = np.vstack([A, np.hstack([np.zeros((n - 1, 1)), np.eye(n - 1)])])
    b = np.concatenate([b, np.ones(n - 1)])
    res = simplex_max(np.eye(n)[0], A, b)
    assert res.value == pytest.approx(highs_max(np.eye(n)[0], A, b), rel=1e-8)


def test_perturbation_never_underestimates():
    rng = np.random.default_rng(7)
    A = rng.normal(size=(30, 4))
    A = np.vstack([A, np.eye(4)])
    b = np.abs(rng.normal(size=34)) + 0.1
    c = rng.normal(size=4)
    exact = highs_max(c, A, b)
    assert simplex_max(c, A, b).value >= exact - 1e-9
