"""Closed-form capture-fraction bounds and related constants.

Degenerate parameters (zero arrival rate or zero target speed) do not raise:
the fraction bounds saturate at 1 and :func:`is_degenerate` reports the case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

ALPHA = 6.0 * math.sqrt(2.0)
IMPROVED_CONSTANT = 3.988  # limiting ratio times sqrt(pi) when the BHH tour length is used
BETA_TSP = 0.7120
FEW_SLOPE = math.sqrt(2.0)
FEW_OFFSET = 1.75

# Abramowitz & Stegun 7.1.26, |error| <= 1.5e-7.
_AS_P = 0.3275911
_AS_A = (0.254829592, -0.284496736, 1.421413741, -1.453152027, 1.061405429)


class TheoremInapplicable(ValueError):
    """Raised when a bound's geometric precondition ``D - rho >= v*pi*rho`` fails."""


def erf(x: float) -> float:
    if x == 0.0:
        return 0.0
    if x < 0.0:
        return -erf(-x)
    t = 1.0 / (1.0 + _AS_P * x)
    a1, a2, a3, a4, a5 = _AS_A
    poly = t * (a1 + t * (a2 + t * (a3 + t * (a4 + t * a5))))
    return 1.0 - poly * math.exp(-x * x)


def is_degenerate(lam: float, v: float) -> bool:
    return lam == 0.0 or v == 0.0


def upper_bound(lam: float, v: float, rho: float) -> float:
    """Policy-independent ceiling on the capture fraction."""
    if is_degenerate(lam, v):
        return 1.0
    return min(1.0, (1.0 + v) * math.sqrt(2.0 / (v * lam * math.pi * rho)))


def fcfs_lower_bound(lam: float, rho: float) -> float:
    return 1.0 / (1.0 + 2.0 * lam * rho)


def la_precondition(v: float, rho: float, capital_d: float) -> bool:
    return capital_d - rho >= v * math.pi * rho


def la_lower_bound(lam: float, rho: float) -> float:
    """Explicit look-ahead bound; valid only when :func:`la_precondition` holds."""
    s = lam * rho
    return 1.0 / (math.pi * math.sqrt(s) * erf(math.sqrt(s * math.pi)) + math.exp(-s * math.pi))


def la_relative_factor(v: float, rho: float, capital_d: float) -> float:
    if not la_precondition(v, rho, capital_d):
        raise TheoremInapplicable(f"D - rho = {capital_d - rho:g} < v*pi*rho = {v * math.pi * rho:g}")
    return 1.0 - v * math.pi * rho / (capital_d - rho)


def la_relative_bound(v: float, rho: float, capital_d: float, ncla_fraction: float) -> float:
    return la_relative_factor(v, rho, capital_d) * ncla_fraction


def rmhp_lower_bound(lam: float, v: float, rho: float) -> float:
    if is_degenerate(lam, v):
        return 1.0
    return min(1.0, (1.0 - v) / (ALPHA * math.sqrt(v * lam * rho * (1.0 + math.sqrt(v)))))


def travel_time_lower_bound(lam: float, v: float, rho: float) -> float:
    """Lower bound on the expected time to reach the nearest outstanding target."""
    if v == 0.0:
        return 0.0
    return math.sqrt(math.pi * v * rho / (2.0 * lam)) / (1.0 + v)


def few_bound(n: int, side: float) -> float:
    """Length any set of ``n`` points in a square of this side can be toured within."""
    return side * math.sqrt(2.0 * n) + FEW_OFFSET * side


@dataclass(frozen=True)
class OptimalityRatio:
    ratio: float
    improved_ratio: float
    informative: bool  # False when either bound is saturated at 1


def optimality_ratio(lam: float, v: float, rho: float) -> OptimalityRatio:
    """Upper bound over the RMHP lower bound, on the unsaturated branches.

    The second field rescales the tour constant so that the small-speed limit
    becomes ``IMPROVED_CONSTANT / sqrt(pi)`` instead of ``12 / sqrt(pi)``.
    """
    up = upper_bound(lam, v, rho)
    low = rmhp_lower_bound(lam, v, rho)
    informative = up < 1.0 and low < 1.0 and not is_degenerate(lam, v)
    if is_degenerate(lam, v):
        return OptimalityRatio(math.nan, math.nan, False)
    raw_up = (1.0 + v) * math.sqrt(2.0 / (v * lam * math.pi * rho))
    raw_low = (1.0 - v) / (ALPHA * math.sqrt(v * lam * rho * (1.0 + math.sqrt(v))))
    ratio = raw_up / raw_low
    improved = ratio * (IMPROVED_CONSTANT / math.sqrt(2.0)) / ALPHA
    return OptimalityRatio(ratio, improved, informative)


@dataclass(frozen=True)
class BoundReport:
    lam: float
    v: float
    rho: float
    capital_d: float
    upper: float
    fcfs_lower: float
    la_lower: float | None  # None where the look-ahead precondition fails
    la_factor: float | None
    rmhp_lower: float
    travel_time_lb: float
    ratio: OptimalityRatio
    degenerate: bool

    @property
    def status(self) -> str:
        if self.degenerate:
            return "degenerate"
        if self.la_factor is None:
            return "theorem inapplicable"
        return "ok"


def bound_report(lam: float, v: float, rho: float, capital_d: float) -> BoundReport:
    applicable = la_precondition(v, rho, capital_d)
    return BoundReport(
        lam=lam,
        v=v,
        rho=rho,
        capital_d=capital_d,
        upper=upper_bound(lam, v, rho),
        fcfs_lower=fcfs_lower_bound(lam, rho),
        la_lower=la_lower_bound(lam, rho) if applicable else None,
        la_factor=la_relative_factor(v, rho, capital_d) if applicable else None,
        rmhp_lower=rmhp_lower_bound(lam, v, rho),
        travel_time_lb=travel_time_lower_bound(lam, v, rho) if lam > 0 else math.inf,
        ratio=optimality_ratio(lam, v, rho),
        degenerate=is_degenerate(lam, v),
    )
