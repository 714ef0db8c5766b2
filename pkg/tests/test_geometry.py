import math

import numpy as np
import pytest

from distcoreset.geometry import (
    Objective,
    WeightedPointSet,
    closest_center,
    cost,
    distance,
)

REL = 1e-9


def test_distance_examples():
    assert distance((0, 0), (0, 0)) == 0.0
    assert distance((0, 0), (3, 4)) == 5.0
    assert distance((1, 1), (2, 2)) == pytest.approx(math.sqrt(2), rel=REL)


def test_distance_symmetry_and_identity():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p, q = rng.standard_normal(4), rng.standard_normal(4)
        assert distance(p, q) == distance(q, p)
        assert distance(p, p) == 0.0
        assert distance(p, q) > 0.0


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        distance((0, 0), (0, 0, 0))


def test_closest_center_examples():
    assert closest_center((0, 0), [(0, 0), (5, 5)]) == (0, 0.0)
    # symmetric tie breaks to the lowest index
    assert closest_center((1, 0), [(0, 0), (2, 0)]) == (0, 1.0)
    assert closest_center((4, 0), [(0, 0), (5, 0)]) == (1, 1.0)


def test_closest_center_empty_errors():
    with pytest.raises(ValueError):
        closest_center((0, 0), np.empty((0, 2)))


def test_cost_examples():
    P = WeightedPointSet.unit([[0, 0], [3, 4]])
    assert cost(P, [(0, 0)], Objective.KMEANS) == pytest.approx(25.0, rel=REL)
    assert cost(P, [(0, 0)], Objective.KMEDIAN) == pytest.approx(5.0, rel=REL)
    heavy = WeightedPointSet([[1, 0]], [2.0])
    assert cost(heavy, [(0, 0)], Objective.KMEANS) == pytest.approx(2.0, rel=REL)


def test_cost_nonnegative_and_additive():
    rng = np.random.default_rng(1)
    for obj in Objective:
        pts = rng.standard_normal((40, 3))
        w = rng.random(40)
        X = rng.standard_normal((4, 3))
        whole = WeightedPointSet(pts, w)
        left = WeightedPointSet(pts[:25], w[:25])
        right = WeightedPointSet(pts[25:], w[25:])
        assert cost(whole, X, obj) >= 0.0
        assert cost(left, X, obj) + cost(right, X, obj) == pytest.approx(
            cost(whole, X, obj), rel=REL
        )


def test_cost_scales_linearly_in_weights():
    rng = np.random.default_rng(2)
    pts = rng.standard_normal((30, 2))
    w = rng.random(30)
    X = rng.standard_normal((3, 2))
    for obj in Objective:
        base = cost(WeightedPointSet(pts, w), X, obj)
        scaled = cost(WeightedPointSet(pts, 2.5 * w), X, obj)
        assert scaled == pytest.approx(2.5 * base, rel=REL)


def test_negative_weights_flow_through_cost():
    P = WeightedPointSet([[1, 0], [2, 0]], [1.0, -1.0])
    assert cost(P, [(0, 0)], Objective.KMEANS) == pytest.approx(1.0 - 4.0, rel=REL)


def test_weighted_point_set_validation():
    with pytest.raises(ValueError):
        WeightedPointSet([[0, 0]], [1.0, 2.0])
    with pytest.raises(ValueError):
        WeightedPointSet([[np.inf, 0]], [1.0])
    with pytest.raises(ValueError):
        WeightedPointSet([[0, 0]], [np.nan])


def test_squared_distance_perturbation_bound():
    # geometric bound behind the k-means analysis, for eps up to 0.1
    from distcoreset.verify import check_tech_bound

    report = check_tech_bound(20_000, np.random.default_rng(3), eps_max=0.1)
    assert report.hypothesis_cases > 500
    assert report.violation is None
