"""Interception kinematics and the set predicates used by the policies.

Points are plain ``(x, y)`` tuples or ``(n, 2)`` arrays; targets are given in
polar form ``(r, theta)`` and move toward the origin at speed ``v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class InterceptSolution:
    time_to_intercept: float
    intercept_point: tuple[float, float]
    radius: float  # target radius at the intercept instant
    feasible: bool  # intercept happens at or outside the perimeter


def wrapped_angle(a, b):
    """Angular distance on the circle, in [0, pi]."""
    d = np.mod(np.abs(np.asarray(a, dtype=float) - b), TWO_PI)
    out = np.minimum(np.minimum(d, TWO_PI - d), math.pi)
    return float(out) if out.ndim == 0 else out


def _root(px, py, r0, theta, v):
    # Largest root of (1 - v^2) T^2 - 2 v (c - r0) T - |q0 - p|^2 = 0, written
    # without cancellation. The constant term is <= 0 so this root is >= 0.
    c = px * math.cos(theta) + py * math.sin(theta)
    a = 1.0 - v * v
    half_b = v * (c - r0)
    k = (r0 * math.cos(theta) - px) ** 2 + (r0 * math.sin(theta) - py) ** 2
    s = math.sqrt(half_b * half_b + a * k)
    if half_b >= 0.0:
        return (half_b + s) / a
    if s - half_b == 0.0:
        return 0.0
    return k / (s - half_b)


def intercept_time(vehicle, target_radius: float, target_angle: float, v: float, rho: float | None = None) -> InterceptSolution:
    """Earliest time at which a unit-speed vehicle meets an inward-moving target.

    ``feasible`` is False when the target would already be inside the
    perimeter ``rho`` at that time; with ``rho=None`` it is always True.
    """
    px, py = float(vehicle[0]), float(vehicle[1])
    T = _root(px, py, float(target_radius), float(target_angle), float(v))
    r = target_radius - v * T
    point = (r * math.cos(target_angle), r * math.sin(target_angle))
    feasible = True if rho is None else r >= rho
    return InterceptSolution(T, point, r, feasible)


def intercept_times(vehicle, radii, thetas, v: float) -> np.ndarray:
    """Vectorised :func:`intercept_time`, returning only the times."""
    px, py = float(vehicle[0]), float(vehicle[1])
    radii = np.asarray(radii, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    c = px * np.cos(thetas) + py * np.sin(thetas)
    a = 1.0 - v * v
    half_b = v * (c - radii)
    k = (radii * np.cos(thetas) - px) ** 2 + (radii * np.sin(thetas) - py) ** 2
    s = np.sqrt(half_b * half_b + a * k)
    with np.errstate(divide="ignore", invalid="ignore"):
        alt = np.where(s - half_b > 0.0, k / (s - half_b), 0.0)
    return np.where(half_b >= 0.0, (half_b + s) / a, alt)


def intercept_time_bisection(vehicle, target_radius: float, target_angle: float, v: float, tol: float = 1e-12) -> float:
    """Reference root of ``|q(T) - p| - T = 0`` by bisection.

    The residual is strictly decreasing (the target speed is below one), so
    the root is unique and bracketed by ``[0, |q(0) - p| / (1 - v)]``.
    """
    px, py = float(vehicle[0]), float(vehicle[1])
    ux, uy = math.cos(target_angle), math.sin(target_angle)

    def f(T):
        r = target_radius - v * T
        return math.hypot(r * ux - px, r * uy - py) - T

    lo, hi = 0.0, f(0.0) / (1.0 - v)
    if hi <= 0.0:
        return 0.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def capture_radius(x: float, v: float, rho: float, theta: float, capital_d: float) -> float:
    """Radius below which a target at angle ``theta`` is catchable from ``(x, 0)``."""
    return min(capital_d, rho + v * math.sqrt(max(rho * rho + x * x - 2.0 * x * rho * math.cos(theta), 0.0)))


def in_capturable_set(x: float, v: float, rho: float, target_r: float, target_theta: float, capital_d: float) -> bool:
    return target_r < capture_radius(x, v, rho, target_theta, capital_d)


def is_reachable(phi: float, target_r, target_theta, v: float, rho: float):
    """Whether a perimeter-bound vehicle at angle ``phi`` can meet the target at the perimeter.

    Boundary cases count as reachable. Accepts arrays for the target.
    """
    out = np.asarray(target_r) - rho >= v * np.asarray(wrapped_angle(target_theta, phi)) * rho
    return bool(out) if out.ndim == 0 else out


def static_path_length(points) -> float:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("need at least one point")
    if len(pts) == 1:
        return 0.0
    return float(np.sum(np.hypot(*np.diff(pts, axis=0).T)))


def annulus_to_rectangle(r: float, theta: float, rho: float) -> tuple[float, float]:
    """Unroll the annulus: arc length along the perimeter and height above it."""
    return (theta * rho, r - rho)


def rectangle_to_annulus(x: float, y: float, rho: float) -> tuple[float, float]:
    return (y + rho, x / rho)


@dataclass(frozen=True)
class SequentialIntercept:
    total_time: float
    legs: tuple[InterceptSolution, ...]
    valid: bool  # False if some target would have passed the origin


def sequential_intercept_time(vehicle, targets, v: float) -> SequentialIntercept:
    """Intercept ``targets`` (polar ``(r, theta)`` at time 0) one after another.

    Each leg starts where the previous capture happened, against the target's
    position advanced by the time already spent.
    """
    pos = (float(vehicle[0]), float(vehicle[1]))
    elapsed = 0.0
    legs = []
    valid = True
    for r0, theta in targets:
        sol = intercept_time(pos, r0 - v * elapsed, theta, v)
        if sol.radius < 0.0:
            valid = False
        legs.append(sol)
        elapsed += sol.time_to_intercept
        pos = sol.intercept_point
    return SequentialIntercept(elapsed, tuple(legs), valid)


def polar_to_xy(r, theta):
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
