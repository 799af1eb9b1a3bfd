import math
import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ritsim.graph import (
    SOURCE, build_reachability_graph, longest_path, longest_path_bruteforce, path_ids,
)


def random_items(rng, n, rho=3.0, spread=10.0):
    return np.column_stack([rng.uniform(rho, rho + spread, n), rng.uniform(0, 2 * math.pi, n)])


def is_valid_path(dag, path):
    return path[0] == SOURCE and all(dag.has_edge(a, b) for a, b in zip(path, path[1:]))


def test_empty():
    dag = build_reachability_graph(0.0, [], 0.5, 3.0)
    assert longest_path(dag) == [SOURCE] == longest_path_bruteforce(dag)


def test_single_reachable_item():
    dag = build_reachability_graph(0.0, [(5.0, 0.1)], 0.5, 3.0)
    assert longest_path(dag) == [SOURCE, 1] == longest_path_bruteforce(dag)


def test_co_angular_edge_and_chain():
    items = [(4.0 + k, 1.2) for k in range(6)]
    dag = build_reachability_graph(1.2, items, 0.9, 3.0)
    assert dag.has_edge(1, 2)
    assert path_ids(dag, longest_path(dag)) == list(range(6))


def test_boundary_edge_is_present():
    v, rho = 0.5, 3.0
    dag = build_reachability_graph(0.0, [(5.0, 0.0), (5.0 + v * math.pi * rho, math.pi)], v, rho)
    assert dag.has_edge(1, 2)


def test_equal_radii_get_no_edge():
    dag = build_reachability_graph(0.0, [(5.0, 1.0), (5.0, 1.0)], 0.5, 3.0)
    assert not dag.has_edge(1, 2) and not dag.has_edge(2, 1)


def test_edge_set_matches_pairwise_condition():
    rng = np.random.default_rng(5)
    for _ in range(20):
        items = random_items(rng, 8)
        v, rho, phi = 0.7, 3.0, rng.uniform(0, 2 * math.pi)
        dag = build_reachability_graph(phi, items, v, rho)
        expected = set()
        for j in range(9):
            for k in range(1, 9):
                if j == k:
                    continue
                dr = dag.radii[k] - dag.radii[j]
                d = abs(dag.thetas[k] - dag.thetas[j]) % (2 * math.pi)
                d = min(d, 2 * math.pi - d)
                if (j == SOURCE or dr > 0) and dr >= v * d * rho:
                    expected.add((j, k))
        assert set(dag.edges) == expected
        assert all(dag.radii[k] > dag.radii[j] for j, k in dag.edges if j != SOURCE)


def test_tie_break_picks_lexicographically_smallest():
    # From the source two 2-item paths exist: (a, c) and (b, c); a has the smaller radius.
    v, rho = 0.5, 3.0
    items = [(4.0, 0.5), (4.2, -0.5), (8.0, 0.0)]
    dag = build_reachability_graph(0.0, items, v, rho)
    assert path_ids(dag, longest_path_bruteforce(dag)) == [0, 2]
    assert path_ids(dag, longest_path(dag)) == [0, 2]


def test_dp_matches_bruteforce_random():
    rng = np.random.default_rng(77)
    for _ in range(500):
        n = int(rng.integers(0, 9))
        v = rng.uniform(0.05, 0.95)
        items = random_items(rng, n)
        if n and rng.random() < 0.2:
            items[:, 0] = np.round(items[:, 0])  # exercise radius ties
        dag = build_reachability_graph(rng.uniform(0, 2 * math.pi), items, v, 3.0)
        dp, bf = longest_path(dag), longest_path_bruteforce(dag)
        assert is_valid_path(dag, dp)
        assert dp == bf


@given(
    items=st.lists(st.tuples(st.floats(3.0, 15.0), st.floats(0, 2 * math.pi, exclude_max=True)), max_size=8),
    phi=st.floats(0, 2 * math.pi, exclude_max=True),
    v=st.floats(0.01, 0.99),
)
def test_dp_path_is_valid_and_maximal(items, phi, v):
    dag = build_reachability_graph(phi, items, v, 3.0)
    dp = longest_path(dag)
    assert is_valid_path(dag, dp)
    assert len(dp) == len(longest_path_bruteforce(dag))


def test_bruteforce_size_limit():
    dag = build_reachability_graph(0.0, random_items(np.random.default_rng(0), 15), 0.5, 3.0)
    with pytest.raises(ValueError):
        longest_path_bruteforce(dag)


def test_radius_below_perimeter_rejected():
    with pytest.raises(ValueError):
        build_reachability_graph(0.0, [(2.0, 0.0)], 0.5, 3.0)


def test_large_graph_runtime():
    rng = np.random.default_rng(1)
    dag = build_reachability_graph(0.0, random_items(rng, 10_000, spread=2000.0), 0.8, 3.0)
    longest_path(dag)  # compile
    t0 = time.perf_counter()
    path = longest_path(dag)
    assert time.perf_counter() - t0 < 1.0
    assert is_valid_path(dag, path)
