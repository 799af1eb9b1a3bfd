"""Open Hamiltonian paths from a fixed start point.

The main heuristic is nearest-neighbour construction followed by 2-opt; a
serpentine strip path is computed alongside and the shorter of the two is
returned, so the result always inherits the strip path's worst-case bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

TWO_OPT_BUDGET_FACTOR = 50
_EPS = 1e-12


@dataclass(frozen=True)
class TourPlan:
    order: np.ndarray  # indices into the input points
    length: float  # including the hop from the start point

    def __len__(self) -> int:
        return len(self.order)


def path_length(start, points, order) -> float:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(order) == 0:
        return 0.0
    seq = np.vstack([np.asarray(start, dtype=float)[None, :], pts[np.asarray(order)]])
    return float(np.sum(np.hypot(*np.diff(seq, axis=0).T)))


@njit(cache=True)
def _nearest_neighbour(sx, sy, xs, ys):
    n = len(xs)
    used = np.zeros(n, dtype=np.bool_)
    order = np.empty(n, dtype=np.int64)
    cx, cy = sx, sy
    for step in range(n):
        best = -1
        best_d = np.inf
        for k in range(n):
            if not used[k]:
                d = (xs[k] - cx) ** 2 + (ys[k] - cy) ** 2
                if d < best_d:
                    best_d = d
                    best = k
        used[best] = True
        order[step] = best
        cx, cy = xs[best], ys[best]
    return order


@njit(cache=True)
def _dist(px, py, a, b):
    return math.sqrt((px[a] - px[b]) ** 2 + (py[a] - py[b]) ** 2)


@njit(cache=True)
def _two_opt(px, py, idx, budget):
    # px, py, idx hold the path with the fixed start at index 0; modified in place.
    # Returns the number of evaluated moves and the number applied.
    n = len(px) - 1
    evaluated = 0
    applied = 0
    improved = True
    while improved and evaluated < budget:
        improved = False
        i = 1
        while i < n and evaluated < budget:
            j = i + 1
            while j <= n:
                evaluated += 1
                delta = _dist(px, py, i - 1, j) - _dist(px, py, i - 1, i)
                if j < n:
                    delta += _dist(px, py, i, j + 1) - _dist(px, py, j, j + 1)
                if delta < -_EPS:
                    lo, hi = i, j
                    while lo < hi:
                        px[lo], px[hi] = px[hi], px[lo]
                        py[lo], py[hi] = py[hi], py[lo]
                        idx[lo], idx[hi] = idx[hi], idx[lo]
                        lo += 1
                        hi -= 1
                    applied += 1
                    improved = True
                    j = i + 1
                else:
                    j += 1
                if evaluated >= budget:
                    break
            i += 1
    return evaluated, applied


def two_opt(start, points, order, budget: int | None = None) -> tuple[np.ndarray, int]:
    """Improve an open path with fixed start by first-improvement 2-opt.

    Moves are scanned by increasing ``i`` then ``j``; after an accepted move
    the scan of the same ``i`` restarts. Stops at a local optimum or once
    ``budget`` moves (default ``50 n^2``) have been evaluated.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    order = np.asarray(order, dtype=np.int64)
    n = len(order)
    if n < 2:
        return order.copy(), 0
    budget = TWO_OPT_BUDGET_FACTOR * n * n if budget is None else int(budget)
    px = np.concatenate(([float(start[0])], pts[order, 0]))
    py = np.concatenate(([float(start[1])], pts[order, 1]))
    idx = np.concatenate(([-1], order))
    evaluated, _ = _two_opt(px, py, idx, budget)
    return idx[1:].copy(), evaluated


def bounding_square(points) -> tuple[float, float, float]:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    lo = pts.min(axis=0)
    side = float(np.max(pts.max(axis=0) - lo))
    return (float(lo[0]), float(lo[1]), side if side > 0 else 1.0)


def strip_path(start, points, square=None) -> TourPlan:
    """Serpentine sweep over ``ceil(sqrt(n/2))`` horizontal strips of ``square``.

    ``square`` is ``(x0, y0, side)`` with ``(x0, y0)`` the lower-left corner;
    by default the bounding square of the points. Both sweep directions
    (bottom-up and top-down) are tried and the shorter is kept.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n == 0:
        return TourPlan(np.empty(0, dtype=np.int64), 0.0)
    x0, y0, side = bounding_square(pts) if square is None else square
    k = max(1, math.ceil(math.sqrt(n / 2)))
    h = side / k
    strip = np.clip(np.floor((pts[:, 1] - y0) / h), 0, k - 1).astype(np.int64)
    best = None
    for upward in (True, False):
        rank = strip if upward else (k - 1 - strip)
        xkey = np.where(rank % 2 == 0, pts[:, 0], -pts[:, 0])
        order = np.lexsort((np.arange(n), xkey, rank))
        plan = TourPlan(order, path_length(start, pts, order))
        if best is None or plan.length < best.length:
            best = plan
    return best


def nearest_neighbour_order(start, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return np.empty(0, dtype=np.int64)
    return _nearest_neighbour(float(start[0]), float(start[1]), np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]))


def emhp_heuristic(start, points, square=None, budget: int | None = None) -> TourPlan:
    """Short open path from ``start`` through every point."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return TourPlan(np.empty(0, dtype=np.int64), 0.0)
    order, _ = two_opt(start, pts, nearest_neighbour_order(start, pts), budget)
    plan = TourPlan(order, path_length(start, pts, order))
    fallback = strip_path(start, pts, square)
    return plan if plan.length <= fallback.length else fallback


def exact_open_path(start, points) -> TourPlan:
    """Optimal open path by enumeration (small inputs only)."""
    from itertools import permutations

    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n > 9:
        raise ValueError("exact enumeration is limited to 9 points")
    if n == 0:
        return TourPlan(np.empty(0, dtype=np.int64), 0.0)
    perms = np.array(list(permutations(range(n))), dtype=np.int64)
    d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    hop = np.hypot(*(pts - np.asarray(start, dtype=float)).T)
    lengths = hop[perms[:, 0]] + d[perms[:, :-1], perms[:, 1:]].sum(axis=1)
    best = int(np.argmin(lengths))
    return TourPlan(perms[best], float(lengths[best]))
