"""Reachability DAG for a perimeter-bound vehicle and its longest path.

A target with (virtual) radius ``r`` and angle ``theta`` reaches the perimeter
``(r - rho) / v`` time units from now. Target ``k`` can be served after target
``j`` iff the vehicle can cover the perimeter arc between them in the time
separating their perimeter arrivals, i.e. ``r_k - r_j >= v * dtheta * rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from .geometry import TWO_PI, wrapped_angle

SOURCE = 0
SOURCE_ID = -1
BRUTEFORCE_MAX_VERTICES = 15


@dataclass(frozen=True, eq=False)
class ReachabilityDag:
    """Vertex 0 is the vehicle; vertices ``1..n`` are items sorted by ``(radius, id)``."""

    ids: np.ndarray
    radii: np.ndarray
    thetas: np.ndarray
    v: float
    rho: float

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def n_items(self) -> int:
        return len(self.ids) - 1

    def has_edge(self, j: int, k: int) -> bool:
        if k == SOURCE or j == k:
            return False
        dr = self.radii[k] - self.radii[j]
        if j != SOURCE and dr <= 0.0:
            return False
        return bool(dr >= self.v * wrapped_angle(self.thetas[k], self.thetas[j]) * self.rho)

    def successors(self, j: int) -> np.ndarray:
        k = np.arange(1, len(self))
        dr = self.radii[1:] - self.radii[j]
        ok = dr >= self.v * wrapped_angle(self.thetas[1:], self.thetas[j]) * self.rho
        if j != SOURCE:
            ok &= dr > 0.0
        return k[ok]

    @cached_property
    def edges(self) -> list[tuple[int, int]]:
        """All edges as vertex-index pairs. Quadratic; meant for small graphs."""
        return [(j, int(k)) for j in range(len(self)) for k in self.successors(j)]

    def key(self, vertex: int) -> tuple[float, int]:
        return (float(self.radii[vertex]), int(self.ids[vertex]))


def build_reachability_graph(phi: float, items, v: float, rho: float, ids=None) -> ReachabilityDag:
    """DAG over ``items`` (``(r, theta)`` pairs) for a vehicle at perimeter angle ``phi``.

    Radii may exceed the generation radius; an unarrived target is represented
    by its virtual radius ``D + v * (t_arrival - now)``.
    """
    items = np.asarray(items, dtype=float).reshape(-1, 2)
    ids = np.arange(len(items)) if ids is None else np.asarray(ids, dtype=np.int64)
    if len(ids) != len(items):
        raise ValueError("ids and items differ in length")
    if len(items) and items[:, 0].min() < rho:
        raise ValueError("item radii must be >= rho")
    order = np.lexsort((ids, items[:, 0]))
    return ReachabilityDag(
        ids=np.concatenate(([SOURCE_ID], ids[order])),
        radii=np.concatenate(([rho], items[order, 0])),
        thetas=np.concatenate(([phi], np.mod(items[order, 1], 2.0 * math.pi))),
        v=float(v),
        rho=float(rho),
    )


@njit(cache=True)
def _wrapped(a, b):
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d, math.pi)


@njit(cache=True)
def _far_index(R, base, gap, lo):
    # First index from which every radius is at least `gap` above `base`,
    # evaluated with the same float expression as the edge test.
    n = len(R)
    hi = max(np.searchsorted(R, base + gap), lo)
    while hi > lo and R[hi - 1] - base >= gap:
        hi -= 1
    while hi < n and R[hi] - base < gap:
        hi += 1
    return hi


@njit(cache=True)
def _longest_chain(R, TH, phi, v, rho):
    n = len(R)
    far_gap = v * math.pi * rho
    best_from = np.zeros(n, dtype=np.int64)  # items on the longest path starting at i
    suffix_max = np.zeros(n + 1, dtype=np.int64)
    lo_of = np.empty(n + 1, dtype=np.int64)
    hi_of = np.empty(n + 1, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        lo = i + 1
        while lo < n and R[lo] <= R[i]:
            lo += 1
        hi = _far_index(R, R[i], far_gap, lo)
        lo_of[i], hi_of[i] = lo, hi
        best = suffix_max[hi]
        for k in range(lo, hi):
            if best_from[k] > best and R[k] - R[i] >= v * _wrapped(TH[k], TH[i]) * rho:
                best = best_from[k]
        best_from[i] = best + 1
        suffix_max[i] = max(best_from[i], suffix_max[i + 1])

    # The source sits at radius rho; index n stands for it.
    lo_of[n], hi_of[n] = 0, _far_index(R, rho, far_gap, 0)
    need = suffix_max[hi_of[n]]
    for k in range(0, hi_of[n]):
        if best_from[k] > need and R[k] - rho >= v * _wrapped(TH[k], phi) * rho:
            need = best_from[k]

    path = np.empty(need, dtype=np.int64)
    cur, base, theta = n, rho, phi
    for step in range(need):
        nxt = -1
        for k in range(lo_of[cur], hi_of[cur]):
            if best_from[k] == need and R[k] - base >= v * _wrapped(TH[k], theta) * rho:
                nxt = k
                break
        if nxt < 0:
            nxt = hi_of[cur]
            while best_from[nxt] != need:
                nxt += 1
        path[step] = nxt
        need -= 1
        cur, base, theta = nxt, R[nxt], TH[nxt]
    return path


def longest_path(dag: ReachabilityDag) -> list[int]:
    """Path from the source visiting the most items.

    Ties go to the lexicographically smallest sequence of ``(radius, id)``
    keys, found greedily from the source over a reverse dynamic program.
    Items at least ``v*pi*rho`` above a vertex are always its successors, so
    only a narrow radius window needs an explicit edge test.
    """
    if dag.n_items == 0:
        return [SOURCE]
    chain = _longest_chain(
        np.ascontiguousarray(dag.radii[1:]), np.ascontiguousarray(dag.thetas[1:]),
        float(dag.thetas[0]), dag.v, dag.rho,
    )
    return [SOURCE] + (chain + 1).tolist()


def longest_path_bruteforce(dag: ReachabilityDag) -> list[int]:
    """Exhaustive search over all simple paths from the source."""
    if len(dag) > BRUTEFORCE_MAX_VERTICES:
        raise ValueError(f"brute force is limited to {BRUTEFORCE_MAX_VERTICES} vertices, got {len(dag)}")
    adj = {j: [k for k in range(len(dag)) if dag.has_edge(j, k)] for j in range(len(dag))}
    best = [SOURCE]
    best_key = None

    def visit(path):
        nonlocal best, best_key
        key = [dag.key(x) for x in path[1:]]
        if len(path) > len(best) or (len(path) == len(best) and (best_key is None or key < best_key)):
            best, best_key = list(path), key
        for k in adj[path[-1]]:
            if k not in path:
                path.append(k)
                visit(path)
                path.pop()

    visit([SOURCE])
    return best


def path_ids(dag: ReachabilityDag, path) -> list[int]:
    """Item ids along a path, without the source."""
    return [int(dag.ids[k]) for k in path[1:]]
