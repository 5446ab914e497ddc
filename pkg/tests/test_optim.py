"""Solvers against independent oracles.

Simplex projection is checked against a bisection solver (different
algorithm, same optimum). Log-optimal weights are checked by grid search and
by the first-order optimality conditions. The geometric median is checked by
direct objective comparison and known symmetric configurations.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankfolio.optim import (RELATIVE_FLOOR, geometric_median,
                             log_optimal_portfolio, project_to_simplex)


# --- independent oracles ----------------------------------------------------

def project_bisect(v: np.ndarray) -> np.ndarray:
    """Simplex projection via bisection on the threshold theta.

    g(theta) = sum(max(v - theta, 0)) is continuous and strictly decreasing
    where positive; the projection uses the theta with g(theta) = 1.
    """
    v = np.asarray(v, dtype=np.float64)
    lo, hi = v.max() - 1.0, v.max()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.maximum(v - mid, 0.0).sum() > 1.0:
            lo = mid
        else:
            hi = mid
    return np.maximum(v - 0.5 * (lo + hi), 0.0)


def log_wealth(relatives: np.ndarray, w: np.ndarray) -> float:
    return float(np.log(relatives @ w).sum())


def grid_best_two_assets(relatives: np.ndarray, step: float = 1e-4) -> float:
    ws = np.arange(0.0, 1.0 + step / 2, step)
    values = np.log(np.outer(relatives[:, 0], ws)
                    + np.outer(relatives[:, 1], 1.0 - ws)).sum(axis=0)
    return float(values.max())


# --- simplex projection ------------------------------------------------------

def test_projection_matches_bisection_oracle():
    rng = np.random.default_rng(42)
    for n in (2, 3, 5, 10, 50):
        for _ in range(20):
            v = rng.normal(0, 3, size=n)
            w = project_to_simplex(v)
            np.testing.assert_allclose(w, project_bisect(v), atol=1e-9)


def test_projection_known_values():
    np.testing.assert_allclose(project_to_simplex(np.array([0.5, 0.5])),
                               [0.5, 0.5])
    # all mass on the dominant coordinate
    np.testing.assert_allclose(project_to_simplex(np.array([5.0, 1.0])),
                               [1.0, 0.0])
    # symmetric offset splits evenly
    np.testing.assert_allclose(project_to_simplex(np.array([2.0, 2.0])),
                               [0.5, 0.5])
    # hand-solved: theta = (3 + 2 - 1)/2 = 2
    np.testing.assert_allclose(project_to_simplex(np.array([3.0, 2.0, -1.0])),
                               [1.0, 0.0, 0.0])


vectors = st.lists(
    st.floats(min_value=-50, max_value=50, allow_nan=False, width=64),
    min_size=1, max_size=12,
).map(np.array)


@given(vectors)
def test_property_projection_on_simplex(v):
    w = project_to_simplex(v)
    assert w.min() >= 0.0
    assert abs(w.sum() - 1.0) <= 1e-9


@given(vectors)
def test_property_projection_idempotent_and_ordered(v):
    w = project_to_simplex(v)
    np.testing.assert_allclose(project_to_simplex(w), w, atol=1e-9)
    order = np.argsort(v, kind="stable")
    assert (np.diff(w[order]) >= -1e-12).all()


@given(vectors, st.floats(min_value=-10, max_value=10, allow_nan=False))
def test_property_projection_translation_invariant(v, c):
    np.testing.assert_allclose(project_to_simplex(v + c),
                               project_to_simplex(v), atol=1e-8)


# --- log-optimal portfolio ----------------------------------------------------

def random_relatives(rng, m, n):
    return np.exp(rng.normal(0.0, 0.05, size=(m, n)))


def test_log_optimal_two_assets_vs_grid():
    rng = np.random.default_rng(123)
    for _ in range(10):
        rel = random_relatives(rng, 30, 2)
        w = log_optimal_portfolio(rel)
        assert log_wealth(rel, w) >= grid_best_two_assets(rel) - 1e-6


def test_log_optimal_first_order_conditions():
    # at the constrained optimum every active coordinate's partial derivative
    # equals the row count and inactive coordinates cannot exceed it
    rng = np.random.default_rng(5)
    for n in (3, 4, 6):
        rel = random_relatives(rng, 40, n)
        w = log_optimal_portfolio(rel)
        grad = (rel / (rel @ w)[:, None]).sum(axis=0)
        m = rel.shape[0]
        active = w > 1e-8
        np.testing.assert_allclose(grad[active], m, rtol=1e-5)
        assert (grad[~active] <= m * (1 + 1e-5)).all()


def test_log_optimal_never_trails_a_corner():
    rng = np.random.default_rng(9)
    for _ in range(20):
        rel = random_relatives(rng, 25, 4)
        w = log_optimal_portfolio(rel)
        corners = np.log(rel).sum(axis=0)
        assert log_wealth(rel, w) >= corners.max() - 1e-9


def test_log_optimal_dominant_asset_takes_all():
    # one asset strictly dominates every day: the optimum is that corner
    rel = np.array([[1.10, 1.01], [1.05, 1.02], [1.20, 0.99]])
    w = log_optimal_portfolio(rel)
    np.testing.assert_allclose(w, [1.0, 0.0], atol=1e-6)


def test_log_optimal_symmetric_pair_splits_evenly():
    # alternating mirrored days make the problem symmetric in the two assets
    rel = np.array([[1.1, 0.9], [0.9, 1.1]] * 10)
    w = log_optimal_portfolio(rel)
    np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-6)


def test_log_optimal_single_asset():
    np.testing.assert_array_equal(
        log_optimal_portfolio(np.array([[1.1], [0.9]])), [1.0])


def test_log_optimal_validation():
    with pytest.raises(ValueError):
        log_optimal_portfolio(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        log_optimal_portfolio(np.empty((0, 3)))


def test_log_optimal_floor_warning_on_nonpositive_rows():
    rel = np.array([[0.0, 0.0], [0.0, 0.0]])
    with pytest.warns(RuntimeWarning, match="floor"):
        log_optimal_portfolio(rel)


def test_log_optimal_deterministic():
    rng = np.random.default_rng(77)
    rel = random_relatives(rng, 50, 5)
    w1 = log_optimal_portfolio(rel)
    w2 = log_optimal_portfolio(rel.copy())
    np.testing.assert_array_equal(w1, w2)


# --- geometric median ---------------------------------------------------------

def l1_objective(points: np.ndarray, y: np.ndarray) -> float:
    return float(np.linalg.norm(points - y, axis=1).sum())


def test_median_single_point():
    np.testing.assert_allclose(geometric_median(np.array([[3.0, 4.0]])),
                               [3.0, 4.0])


def test_median_two_points_is_midpoint():
    pts = np.array([[0.0, 0.0], [2.0, 4.0]])
    np.testing.assert_allclose(geometric_median(pts), [1.0, 2.0], atol=1e-8)


def test_median_equilateral_triangle_is_centroid():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    np.testing.assert_allclose(geometric_median(pts), pts.mean(axis=0),
                               atol=1e-8)


def test_median_rectangle_is_center():
    pts = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 2.0], [4.0, 2.0]])
    np.testing.assert_allclose(geometric_median(pts), [2.0, 1.0], atol=1e-8)


def test_median_three_collinear_is_middle_point():
    # with an odd count on a line the L1-median is the middle data point
    pts = np.array([[0.0, 0.0], [1.0, 1.0], [10.0, 10.0]])
    np.testing.assert_allclose(geometric_median(pts), [1.0, 1.0], atol=1e-7)


def test_median_majority_coincident_point_wins():
    # when more than half the mass sits on one point, that point is the median
    pts = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [5.0, 5.0]])
    np.testing.assert_allclose(geometric_median(pts), [1.0, 1.0], atol=1e-9)


def test_median_objective_not_worse_than_candidates():
    rng = np.random.default_rng(31)
    for _ in range(20):
        pts = rng.normal(0, 1, size=(rng.integers(2, 12), 3))
        y = geometric_median(pts)
        fy = l1_objective(pts, y)
        assert fy <= l1_objective(pts, pts.mean(axis=0)) + 1e-7
        for p in pts:
            assert fy <= l1_objective(pts, p) + 1e-7
        for _ in range(5):
            assert fy <= l1_objective(pts, y + rng.normal(0, 0.1, 3)) + 1e-7


def test_median_validation():
    with pytest.raises(ValueError):
        geometric_median(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        geometric_median(np.empty((0, 2)))
