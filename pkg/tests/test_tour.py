import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ritsim.bounds import BETA_TSP, few_bound
from ritsim.tour import (
    emhp_heuristic, exact_open_path, nearest_neighbour_order, path_length, strip_path, two_opt,
)


def test_trivial_inputs():
    assert emhp_heuristic((0, 0), np.empty((0, 2))).length == 0.0
    plan = emhp_heuristic((0, 0), [(3.0, 4.0)])
    assert plan.length == pytest.approx(5.0) and list(plan.order) == [0]
    assert strip_path((0, 0), [(3.0, 4.0)]).length == pytest.approx(5.0)


def test_strip_two_corners():
    plan = strip_path((0, 0), [(0.0, 0.0), (1.0, 1.0)], square=(0.0, 0.0, 1.0))
    assert plan.length <= math.sqrt(2) * 2 + 1.75


@pytest.mark.parametrize("n", [10, 100, 1000])
def test_few_bound_in_square(n):
    rng = np.random.default_rng(n)
    side = 18.0
    for _ in range(5):
        pts = rng.uniform(-9, 9, (n, 2))
        start = tuple(rng.uniform(-9, 9, 2))
        square = (-9.0, -9.0, side)
        hop = max(math.dist(start, p) for p in pts)
        assert strip_path(start, pts, square).length <= few_bound(n, side) + hop
        assert emhp_heuristic(start, pts, square).length <= strip_path(start, pts, square).length + 1e-9


def test_heuristic_vs_exact_for_seven_points():
    rng = np.random.default_rng(7)
    ratios = []
    for _ in range(200):
        pts = rng.uniform(0, 1, (7, 2))
        start = tuple(rng.uniform(0, 1, 2))
        h, opt = emhp_heuristic(start, pts).length, exact_open_path(start, pts).length
        assert h >= opt - 1e-12
        ratios.append(h / opt)
    assert np.mean(np.array(ratios) <= 1.25) >= 0.95


def test_bhh_trend():
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 1, (1000, 2))
    plan = emhp_heuristic((0.5, 0.5), pts, square=(0.0, 0.0, 1.0))
    ratio = plan.length / math.sqrt(1000)
    assert BETA_TSP <= ratio <= 1.25 * BETA_TSP


@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=2, max_size=40),
       st.tuples(st.floats(-10, 10), st.floats(-10, 10)))
def test_two_opt_never_lengthens(points, start):
    pts = np.array(points)
    initial = nearest_neighbour_order(start, pts)
    improved, evaluated = two_opt(start, pts, initial)
    assert sorted(improved) == list(range(len(pts)))
    assert path_length(start, pts, improved) <= path_length(start, pts, initial) + 1e-9
    assert evaluated <= 50 * len(pts) ** 2


def test_two_opt_respects_budget():
    pts = np.random.default_rng(0).uniform(0, 1, (50, 2))
    _, evaluated = two_opt((0, 0), pts, np.arange(50), budget=10)
    assert evaluated == 10


def test_nearest_neighbour_visits_near_cluster_first():
    near = [(1.0, 0.0), (1.1, 0.1)]
    far = [(10.0, 10.0), (10.1, 10.2)]
    order = nearest_neighbour_order((0.0, 0.0), far + near)
    assert set(order[:2]) == {2, 3}


def test_exact_limit():
    with pytest.raises(ValueError):
        exact_open_path((0, 0), np.zeros((10, 2)))
