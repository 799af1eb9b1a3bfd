"""Problem parameters, target lifecycle and the seeded Poisson arrival process."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one experiment.

    ``lam`` is the arrival rate (the config-file key is ``lambda``), ``v`` the
    target speed as a fraction of the unit vehicle speed, ``rho`` the perimeter
    radius and ``capital_d`` the radius at which targets are generated.
    ``warmup`` defaults to a fifth of the horizon.
    """

    lam: float
    v: float
    rho: float = 3.0
    capital_d: float = 20.0
    horizon: float = 20000.0
    warmup: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.warmup is None:
            object.__setattr__(self, "warmup", 0.2 * self.horizon)
        if not self.lam >= 0.0 or not math.isfinite(self.lam):
            raise ValueError(f"arrival rate must be finite and >= 0, got {self.lam}")
        if not 0.0 <= self.v < 1.0:
            raise ValueError(f"target speed must lie in [0, 1), got {self.v}")
        if not 0.0 < self.rho < self.capital_d:
            raise ValueError(
                f"need 0 < rho < capital_d, got rho={self.rho}, capital_d={self.capital_d}"
            )
        if not self.horizon > 0.0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")
        if not 0.0 <= self.warmup < self.horizon:
            raise ValueError(
                f"warmup must lie in [0, horizon), got warmup={self.warmup}, horizon={self.horizon}"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def travel_time(self) -> float:
        """Time a target needs to go from the outer circle to the perimeter."""
        if self.v == 0.0:
            return math.inf
        return (self.capital_d - self.rho) / self.v


class TargetState(enum.IntEnum):
    PENDING = 0
    ACTIVE = 1
    CAPTURED = 2
    ESCAPED = 3


_ALLOWED = {
    TargetState.PENDING: {TargetState.ACTIVE},
    TargetState.ACTIVE: {TargetState.CAPTURED, TargetState.ESCAPED},
    TargetState.CAPTURED: set(),
    TargetState.ESCAPED: set(),
}


def check_transition(old: TargetState, new: TargetState) -> None:
    if new not in _ALLOWED[TargetState(old)]:
        raise RuntimeError(f"illegal target transition {TargetState(old).name} -> {TargetState(new).name}")


@dataclass
class Target:
    id: int
    theta: float
    arrival_time: float
    state: TargetState = TargetState.PENDING
    resolved_time: float | None = None

    def activate(self) -> None:
        check_transition(self.state, TargetState.ACTIVE)
        self.state = TargetState.ACTIVE

    def capture(self, t: float) -> None:
        check_transition(self.state, TargetState.CAPTURED)
        self.state = TargetState.CAPTURED
        self.resolved_time = t

    def escape(self, t: float) -> None:
        check_transition(self.state, TargetState.ESCAPED)
        self.state = TargetState.ESCAPED
        self.resolved_time = t


@dataclass(frozen=True)
class ArrivalStream:
    """Arrival times and generation angles, in arrival order."""

    times: np.ndarray
    thetas: np.ndarray
    horizon: float = field(default=math.inf)

    def __post_init__(self):
        for arr in (self.times, self.thetas):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.times)

    def __eq__(self, other):
        if not isinstance(other, ArrivalStream):
            return NotImplemented
        return (
            self.horizon == other.horizon
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.thetas, other.thetas)
        )

    def targets(self) -> list[Target]:
        return [Target(i, float(th), float(t)) for i, (t, th) in enumerate(zip(self.times, self.thetas))]

    def until(self, t: float) -> "ArrivalStream":
        """The prefix of arrivals with time <= t."""
        k = int(np.searchsorted(self.times, t, side="right"))
        return ArrivalStream(self.times[:k].copy(), self.thetas[:k].copy(), min(self.horizon, t))

    def tobytes(self) -> bytes:
        return self.times.tobytes() + self.thetas.tobytes()


def run_rng(seed: int, run_index: int = 0) -> np.random.Generator:
    """Counter-based generator keyed on (seed, run index).

    Runs of a sweep get independent streams regardless of execution order.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(run_index)])))


def generate_arrivals(config: SimConfig, run_index: int = 0, horizon: float | None = None) -> ArrivalStream:
    """All arrivals in ``[0, horizon]`` of a rate-``lam`` Poisson process.

    Each arrival consumes two uniforms in a fixed order: the inter-arrival gap
    (inverse CDF of the exponential law) and then the angle.
    """
    horizon = config.horizon if horizon is None else horizon
    if config.lam == 0.0:
        return ArrivalStream(np.empty(0), np.empty(0), horizon)
    rng = run_rng(config.seed, run_index)
    chunk = max(64, int(1.1 * config.lam * horizon) + 64)
    times, thetas = [], []
    t_last = 0.0
    while True:
        u = rng.random((chunk, 2))
        gaps = -np.log1p(-u[:, 0]) / config.lam
        t = np.cumsum(np.concatenate(([t_last], gaps)))[1:]
        keep = t <= horizon
        times.append(t[keep])
        thetas.append(TWO_PI * u[keep, 1])
        if not keep[-1]:
            break
        t_last = t[-1]
    return ArrivalStream(np.concatenate(times), np.concatenate(thetas), horizon)


def escape_time(target: Target, v: float, capital_d: float, rho: float) -> float:
    """Time at which an uncaptured target reaches the perimeter (``inf`` if v == 0)."""
    if v == 0.0:
        return math.inf
    return target.arrival_time + (capital_d - rho) / v


def target_radius(target: Target, t: float, v: float, capital_d: float) -> float:
    return capital_d - v * (t - target.arrival_time)


def target_position(target: Target, t: float, v: float, capital_d: float, rho: float) -> tuple[float, float]:
    if t < target.arrival_time:
        raise ValueError(f"target {target.id} has not arrived at t={t}")
    if target.resolved_time is not None and t > target.resolved_time:
        raise ValueError(f"target {target.id} was {target.state.name.lower()} at t={target.resolved_time}")
    r = target_radius(target, t, v, capital_d)
    if r < rho - 1e-9 * max(1.0, rho):
        raise ValueError(f"target {target.id} is inside the perimeter at t={t}")
    return (r * math.cos(target.theta), r * math.sin(target.theta))
