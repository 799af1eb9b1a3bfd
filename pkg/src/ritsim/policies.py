"""Guarding policies.

Each policy is a pure decision function over a causal :class:`WorldSnapshot`
plus a small stateful wrapper the engine drives through four hooks:
``start``, ``on_arrival``, ``on_capture`` and ``on_decision``. A hook returns
a command, or ``None`` to keep the current one.

Commands are executed by the engine at unit speed. ``Intercept`` travels to a
point (straight line, or along the perimeter for ``path="arc"``), waits there
if early and captures the target at ``time``. ``MoveTo`` ends with a decision
point on arrival; ``Wait`` holds position, optionally until a decision point.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .geometry import intercept_time, intercept_times, polar_to_xy
from .graph import build_reachability_graph, longest_path, path_ids
from .model import ArrivalStream, SimConfig
from .tour import emhp_heuristic

CENTER = (0.0, 0.0)


@dataclass(frozen=True)
class WorldSnapshot:
    """Outstanding targets at ``time``, in arrival order. Nothing about the future."""

    time: float
    ids: np.ndarray
    arrival_times: np.ndarray
    thetas: np.ndarray
    config: SimConfig

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def radii(self) -> np.ndarray:
        return self.config.capital_d - self.config.v * (self.time - self.arrival_times)

    @property
    def escape_times(self) -> np.ndarray:
        return self.arrival_times + self.config.travel_time


@dataclass(frozen=True)
class VehicleState:
    position: tuple[float, float]
    mode: str = "idle"  # idle | waiting | moving | en-route
    target_id: int | None = None

    @property
    def angle(self) -> float:
        return math.atan2(self.position[1], self.position[0]) % (2.0 * math.pi)


@dataclass(frozen=True)
class Intercept:
    target_id: int
    point: tuple[float, float]
    time: float
    path: str = "line"
    depart: float | None = None


@dataclass(frozen=True)
class MoveTo:
    point: tuple[float, float]
    path: str = "line"


@dataclass(frozen=True)
class Wait:
    until: float | None = None


@dataclass(frozen=True)
class ScheduledCapture:
    target_id: int
    time: float
    theta: float


def _at_center(vehicle: VehicleState) -> bool:
    return math.hypot(*vehicle.position) <= 1e-12


# --- first come, first served ---------------------------------------------------


def fcfs_decide(snapshot: WorldSnapshot, vehicle: VehicleState, chunk: int = 256):
    """Chase the earliest-arrived target that can still be caught before the perimeter."""
    cfg = snapshot.config
    radii = snapshot.radii
    for lo in range(0, len(snapshot), chunk):
        sl = slice(lo, lo + chunk)
        T = intercept_times(vehicle.position, radii[sl], snapshot.thetas[sl], cfg.v)
        ok = np.flatnonzero(radii[sl] - cfg.v * T >= cfg.rho)
        if len(ok):
            k = lo + int(ok[0])
            sol = intercept_time(vehicle.position, radii[k], snapshot.thetas[k], cfg.v, cfg.rho)
            return Intercept(int(snapshot.ids[k]), sol.intercept_point, snapshot.time + sol.time_to_intercept)
    if _at_center(vehicle):
        return Wait()
    return MoveTo(CENTER)


# --- stay at center ------------------------------------------------------------


def sac_decide(snapshot: WorldSnapshot, vehicle: VehicleState):
    """From the center, dash out to meet the next target exactly at the perimeter.

    Targets whose dash-out instant has already passed are left to escape.
    """
    cfg = snapshot.config
    if not _at_center(vehicle):
        return MoveTo(CENTER)
    esc = snapshot.escape_times
    ok = np.flatnonzero(esc - cfg.rho >= snapshot.time)
    if not len(ok):
        return Wait()
    # Arrival order equals escape order; ties fall to the smaller id.
    k = ok[np.lexsort((snapshot.ids[ok], esc[ok]))[0]]
    theta = float(snapshot.thetas[k])
    point = (cfg.rho * math.cos(theta), cfg.rho * math.sin(theta))
    return Intercept(int(snapshot.ids[k]), point, float(esc[k]), depart=float(esc[k]) - cfg.rho)


# --- look ahead -----------------------------------------------------------------


def _schedule(dag, path, escape_lookup) -> list[ScheduledCapture]:
    out = []
    for vertex, tid in zip(path[1:], path_ids(dag, path)):
        out.append(ScheduledCapture(tid, escape_lookup[tid], float(dag.thetas[vertex])))
    return out


def la_plan(snapshot: WorldSnapshot, vehicle_angle: float) -> list[ScheduledCapture]:
    """Longest chain of outstanding targets the perimeter-bound vehicle can meet.

    Each target is captured at the perimeter at its escape instant.
    """
    cfg = snapshot.config
    radii = snapshot.radii
    keep = radii >= cfg.rho
    dag = build_reachability_graph(
        vehicle_angle, np.column_stack([radii[keep], snapshot.thetas[keep]]), cfg.v, cfg.rho, snapshot.ids[keep]
    )
    lookup = dict(zip(snapshot.ids[keep].tolist(), snapshot.escape_times[keep].tolist()))
    return _schedule(dag, longest_path(dag), lookup)


def ncla_plan(trace: ArrivalStream, vehicle_angle: float, config: SimConfig, now: float = 0.0) -> list[ScheduledCapture]:
    """Like :func:`la_plan` but over every target of the trace, arrived or not.

    A target arriving at ``t_a`` gets the virtual radius ``D + v (t_a - now)``.
    """
    ids = np.arange(len(trace))
    radii = config.capital_d + config.v * (trace.times - now)
    keep = radii >= config.rho
    dag = build_reachability_graph(
        vehicle_angle, np.column_stack([radii[keep], trace.thetas[keep]]), config.v, config.rho, ids[keep]
    )
    lookup = dict(zip(ids[keep].tolist(), (trace.times[keep] + config.travel_time).tolist()))
    return _schedule(dag, longest_path(dag), lookup)


def _perimeter_command(cfg: SimConfig, step: ScheduledCapture) -> Intercept:
    point = (cfg.rho * math.cos(step.theta), cfg.rho * math.sin(step.theta))
    return Intercept(step.target_id, point, step.time, path="arc")


# --- repeated minimum hamiltonian path ------------------------------------------


@dataclass(frozen=True)
class RmhpIteration:
    start: float
    end: float
    batch: np.ndarray  # ids of targets in the band when the iteration started
    captures: tuple[Intercept, ...]
    return_point: tuple[float, float]
    return_time: float


def rmhp_iterate(snapshot: WorldSnapshot, vehicle_position) -> RmhpIteration:
    """Plan one iteration of length ``rho / v`` from a vehicle at radius ``2 rho``.

    The tour order comes from the heuristic path through the frozen positions
    of targets in the band ``(2 rho, 3 rho)``; targets are then intercepted in
    that order as they actually move. An interception is attempted only if
    the vehicle can still get back to radius ``2 rho`` within the iteration;
    the rest of the batch is abandoned.
    """
    cfg = snapshot.config
    rho, v = cfg.rho, cfg.v
    t0 = snapshot.time
    end = t0 + rho / v
    radii = snapshot.radii
    band = np.flatnonzero((radii > 2.0 * rho) & (radii < 3.0 * rho))
    pos = (float(vehicle_position[0]), float(vehicle_position[1]))
    captures = []
    if len(band):
        frozen = polar_to_xy(radii[band], snapshot.thetas[band])
        plan = emhp_heuristic(pos, frozen, square=(-3.0 * rho, -3.0 * rho, 6.0 * rho))
        t = t0
        for k in band[plan.order]:
            sol = intercept_time(pos, radii[k] - v * (t - t0), snapshot.thetas[k], v, rho)
            t_cap = t + sol.time_to_intercept
            back = abs(math.hypot(*sol.intercept_point) - 2.0 * rho)
            if t_cap + back > end or not sol.feasible:
                break
            captures.append(Intercept(int(snapshot.ids[k]), sol.intercept_point, t_cap))
            pos, t = sol.intercept_point, t_cap
    else:
        t = t0
    r = math.hypot(*pos)
    ret = (2.0 * rho * pos[0] / r, 2.0 * rho * pos[1] / r) if r > 0 else (2.0 * rho, 0.0)
    return RmhpIteration(t0, end, snapshot.ids[band], tuple(captures), ret, t + abs(r - 2.0 * rho))


# --- stateful wrappers ------------------------------------------------------------


class Policy:
    name = ""
    causal = True

    def initial_position(self, config: SimConfig) -> tuple[float, float]:
        return CENTER

    def start(self, sim):
        return self.on_decision(sim)

    def on_arrival(self, sim, target_id: int):
        return None

    def on_capture(self, sim, target_id: int):
        return self.on_decision(sim)

    def on_decision(self, sim):
        raise NotImplementedError


class FCFS(Policy):
    name = "fcfs"

    def on_arrival(self, sim, target_id):
        if sim.vehicle.mode == "en-route":
            return None
        return self.on_decision(sim)

    def on_decision(self, sim):
        return fcfs_decide(sim.snapshot(), sim.vehicle)


class SAC(Policy):
    name = "sac"

    def on_arrival(self, sim, target_id):
        # A later arrival never reaches the perimeter before the target already booked.
        if sim.vehicle.mode == "en-route" or not _at_center(sim.vehicle):
            return None
        return self.on_decision(sim)

    def on_capture(self, sim, target_id):
        return MoveTo(CENTER)

    def on_decision(self, sim):
        return sac_decide(sim.snapshot(), sim.vehicle)


class LookAhead(Policy):
    """Replans the longest perimeter chain at every arrival and after every capture."""

    name = "la"

    def initial_position(self, config):
        return (config.rho, 0.0)

    def on_arrival(self, sim, target_id):
        return self.on_decision(sim)

    def on_decision(self, sim):
        plan = la_plan(sim.snapshot(), sim.vehicle.angle)
        if not plan:
            return Wait()
        return _perimeter_command(sim.config, plan[0])


class NonCausalLookAhead(Policy):
    """Plans once, at the start, over the whole arrival trace."""

    name = "ncla"
    causal = False

    def __init__(self):
        self.plan: deque[ScheduledCapture] = deque()

    def initial_position(self, config):
        return (config.rho, 0.0)

    def start(self, sim):
        self.plan = deque(ncla_plan(sim.trace, sim.vehicle.angle, sim.config, sim.time))
        return self.on_decision(sim)

    def on_decision(self, sim):
        if not self.plan:
            return Wait()
        return _perimeter_command(sim.config, self.plan.popleft())


class RMHP(Policy):
    name = "rmhp"

    def __init__(self):
        self.script: deque = deque()
        self.iterations: list[RmhpIteration] = []

    def initial_position(self, config):
        return (2.0 * config.rho, 0.0)

    def on_decision(self, sim):
        if not self.script:
            it = rmhp_iterate(sim.snapshot(), sim.vehicle.position)
            self.iterations.append(it)
            self.script.extend(it.captures)
            self.script.append(MoveTo(it.return_point))
            self.script.append(Wait(until=it.end))
        return self.script.popleft()


POLICIES = {cls.name: cls for cls in (FCFS, SAC, LookAhead, NonCausalLookAhead, RMHP)}


def make_policy(name: str) -> Policy:
    try:
        return POLICIES[name]()
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; valid names: {', '.join(POLICIES)}") from None
