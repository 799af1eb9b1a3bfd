"""Continuous-time event-driven simulation and capture-fraction estimation.

Vehicle motion between events is piecewise closed form (holds, unit-speed
segments, perimeter arcs at angular rate ``1/rho``), so event times are exact.
Escapes happen in arrival order because every target needs the same time to
reach the perimeter, which lets the event queue be a merge of three ordered
sources: the next arrival, the next escape and the single pending vehicle
event. Simultaneous events are ordered escape < capture < arrival < decision,
then by target id. A target scheduled for capture at the very instant it
would escape counts as captured.
"""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import intercept_times
from .model import ArrivalStream, SimConfig, TargetState, generate_arrivals
from .policies import Intercept, MoveTo, Policy, VehicleState, Wait, WorldSnapshot, make_policy

ESCAPE, CAPTURE, ARRIVAL, DECISION = 0, 1, 2, 3
KIND_NAMES = ("escape", "capture", "arrival", "decision")
Z95 = 1.959963984540054
_TIME_TOL = 1e-9

_PENDING = int(TargetState.PENDING)
_ACTIVE = int(TargetState.ACTIVE)
_CAPTURED = int(TargetState.CAPTURED)
_ESCAPED = int(TargetState.ESCAPED)


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    target_id: int  # -1 for decision points


@dataclass
class RunMetrics:
    config: SimConfig
    policy: str
    run_index: int
    n_capt: int = 0
    n_esc: int = 0
    n_unresolved: int = 0  # active at the horizon; excluded from both counts
    n_arrived: int = 0
    max_capture_error: float = 0.0
    min_capture_radius: float = math.inf
    events: list[Event] | None = None
    capture_times: np.ndarray | None = field(default=None, repr=False)
    escape_times: np.ndarray | None = field(default=None, repr=False)

    @property
    def capture_fraction(self) -> float | None:
        total = self.n_capt + self.n_esc
        return self.n_capt / total if total else None

    def fraction_after(self, warmup: float) -> float | None:
        """Capture fraction had the warm-up been ``warmup`` instead."""
        c = int(np.count_nonzero(self.capture_times >= warmup))
        e = int(np.count_nonzero(self.escape_times >= warmup))
        return c / (c + e) if c + e else None

    @property
    def seed(self) -> int:
        return self.config.seed


class _Motion:
    """Vehicle trajectory from the last command on, as a list of legs."""

    def __init__(self, t, point):
        self.legs = [("hold", t, math.inf, point)]

    def position(self, t):
        for leg in self.legs:
            if t <= leg[2]:
                break
        kind, t0, t1 = leg[0], leg[1], leg[2]
        if kind == "hold":
            return leg[3]
        if t >= t1:
            return leg[-1]
        s = t - t0
        if kind == "line":
            (x0, y0), (x1, y1) = leg[3], leg[4]
            f = s / (t1 - t0)
            return (x0 + f * (x1 - x0), y0 + f * (y1 - y0))
        phi0, direction, radius = leg[3], leg[4], leg[5]
        phi = phi0 + direction * s / radius
        return (radius * math.cos(phi), radius * math.sin(phi))


class _CausalView:
    """What a causal policy may see: the present, never the arrival trace."""

    __slots__ = ("_sim",)

    def __init__(self, sim):
        self._sim = sim

    @property
    def time(self):
        return self._sim.time

    @property
    def config(self):
        return self._sim.config

    @property
    def vehicle(self):
        return self._sim.vehicle

    def snapshot(self):
        return self._sim.snapshot()


class Simulation:
    def __init__(self, config: SimConfig, policy: Policy | str, run_index: int = 0,
                 stream: ArrivalStream | None = None, record_events: bool = False):
        self.config = config
        self.policy = make_policy(policy) if isinstance(policy, str) else policy
        if config.v == 0.0 and self.policy.name in ("la", "ncla", "rmhp"):
            raise ValueError(f"policy {self.policy.name!r} needs a positive target speed")
        self.run_index = run_index
        self.stream = generate_arrivals(config, run_index) if stream is None else stream
        self.trace = self.stream if not self.policy.causal else None
        self.time = 0.0
        n = len(self.stream)
        self._times = self.stream.times
        self._thetas = self.stream.thetas
        self.state = np.zeros(n, dtype=np.int8)
        self.resolved = np.full(n, np.nan)
        self._n_arrived = 0
        self._first_open = 0  # all targets below this index are resolved
        start = self.policy.initial_position(config)
        self._motion = _Motion(0.0, start)
        self._mode = "idle"
        self._target = None
        self._pending = None  # (time, kind, target id)
        self.metrics = RunMetrics(config, self.policy.name, run_index, events=[] if record_events else None)

    # -- views -------------------------------------------------------------

    @property
    def vehicle(self) -> VehicleState:
        return VehicleState(self._motion.position(self.time), self._mode, self._target)

    def snapshot(self) -> WorldSnapshot:
        lo, hi = self._first_open, self._n_arrived
        idx = lo + np.flatnonzero(self.state[lo:hi] == _ACTIVE)
        return WorldSnapshot(self.time, idx, self._times[idx], self._thetas[idx], self.config)

    def target_radius(self, tid: int, t: float) -> float:
        return self.config.capital_d - self.config.v * (t - self._times[tid])

    # -- command execution -------------------------------------------------

    def _apply(self, cmd):
        t = self.time
        here = self._motion.position(t)
        motion = _Motion(t, here)
        legs = []
        if isinstance(cmd, Wait):
            self._mode, self._target = ("waiting" if cmd.until is not None else "idle"), None
            self._pending = (max(cmd.until, t), DECISION, -1) if cmd.until is not None else None
            self._motion = motion
            return
        start = t
        if isinstance(cmd, Intercept) and cmd.depart is not None and cmd.depart > t:
            start = cmd.depart
            legs.append(("hold", t, start, here))
        if cmd.path == "arc":
            r = math.hypot(*here)
            if abs(r - self.config.rho) > 1e-9 * max(1.0, r):
                raise RuntimeError(f"arc command issued off the perimeter (|p|={r})")
            phi0 = math.atan2(here[1], here[0])
            d = (math.atan2(cmd.point[1], cmd.point[0]) - phi0 + math.pi) % (2.0 * math.pi) - math.pi
            dist = r * abs(d)
            arrive = start + dist
            legs.append(("arc", start, arrive, phi0, math.copysign(1.0, d), r, cmd.point))
        else:
            dist = math.hypot(cmd.point[0] - here[0], cmd.point[1] - here[1])
            arrive = start + dist
            legs.append(("line", start, arrive, here, cmd.point))
        legs.append(("hold", arrive, math.inf, cmd.point))
        motion.legs = legs
        self._motion = motion
        if isinstance(cmd, Intercept):
            # Non-causal plans may book targets that have not arrived yet.
            if self.state[cmd.target_id] >= _CAPTURED:
                raise RuntimeError(f"intercept of resolved target {cmd.target_id}")
            if arrive > cmd.time + _TIME_TOL * max(1.0, cmd.time):
                raise RuntimeError(f"target {cmd.target_id} cannot be reached by t={cmd.time} (arrive {arrive})")
            self._mode, self._target = "en-route", cmd.target_id
            self._pending = (cmd.time, CAPTURE, cmd.target_id)
        else:
            self._mode, self._target = "moving", None
            self._pending = (arrive, DECISION, -1)

    def _resolve(self, tid, new_state):
        self.state[tid] = new_state
        self.resolved[tid] = self.time
        while self._first_open < self._n_arrived and self.state[self._first_open] >= _CAPTURED:
            self._first_open += 1

    # -- main loop -----------------------------------------------------------

    def run(self) -> RunMetrics:
        cfg = self.config
        m = self.metrics
        view = self if not self.policy.causal else _CausalView(self)
        times, n = self._times, len(self._times)
        travel = cfg.travel_time
        horizon, warmup = cfg.horizon, cfg.warmup
        log = m.events
        esc_i = 0

        cmd = self.policy.start(view)
        if cmd is not None:
            self._apply(cmd)

        while True:
            best = (float(times[self._n_arrived]), ARRIVAL, self._n_arrived) if self._n_arrived < n else None
            while esc_i < self._n_arrived and self.state[esc_i] != _ACTIVE:
                esc_i += 1
            pending = self._pending
            if esc_i < self._n_arrived and travel < math.inf:
                te = float(times[esc_i]) + travel
                booked = (pending is not None and pending[1] == CAPTURE and pending[2] == esc_i
                          and pending[0] <= te + _TIME_TOL * max(1.0, te))
                if not booked and (best is None or (te, ESCAPE, esc_i) < best):
                    best = (te, ESCAPE, esc_i)
            if pending is not None and (best is None or pending < best):
                best = pending
            if best is None or best[0] > horizon:
                break
            t, kind, tid = best
            if t < self.time:
                raise RuntimeError(f"event queue went backwards: {t} < {self.time}")
            self.time = t
            if log is not None:
                log.append(Event(t, KIND_NAMES[kind], tid))

            if kind == ARRIVAL:
                self.state[tid] = _ACTIVE
                self._n_arrived += 1
                cmd = self.policy.on_arrival(view, tid)
            elif kind == ESCAPE:
                self._resolve(tid, _ESCAPED)
                if t >= warmup:
                    m.n_esc += 1
                cmd = None
                if pending is not None and pending[1] == CAPTURE and pending[2] == tid:
                    self._pending = None
                    cmd = self.policy.on_decision(view)
            elif kind == CAPTURE:
                self._pending = None
                if self.state[tid] != _ACTIVE:
                    raise RuntimeError(f"capture of inactive target {tid}")
                r = self.target_radius(tid, t)
                th = float(self._thetas[tid])
                px, py = self._motion.position(t)
                err = math.hypot(px - r * math.cos(th), py - r * math.sin(th))
                m.max_capture_error = max(m.max_capture_error, err)
                m.min_capture_radius = min(m.min_capture_radius, r)
                self._resolve(tid, _CAPTURED)
                if t >= warmup:
                    m.n_capt += 1
                cmd = self.policy.on_capture(view, tid)
            else:
                self._pending = None
                cmd = self.policy.on_decision(view)
            if cmd is not None:
                self._apply(cmd)

        m.n_arrived = self._n_arrived
        arrived = self.state[: self._n_arrived]
        m.capture_times = self.resolved[: self._n_arrived][arrived == _CAPTURED]
        m.escape_times = self.resolved[: self._n_arrived][arrived == _ESCAPED]
        m.n_unresolved = int(np.count_nonzero(self.state[: self._n_arrived] == _ACTIVE))
        return m


def run_simulation(config: SimConfig, policy: str, run_index: int = 0, record_events: bool = False) -> RunMetrics:
    """One run; deterministic in ``(config, policy, run_index)``."""
    return Simulation(config, policy, run_index, record_events=record_events).run()


@dataclass(frozen=True)
class Estimate:
    policy: str
    config: SimConfig
    fractions: tuple[float, ...]  # defined runs only, in run order
    n_undefined: int
    mean: float
    std: float
    half_width: float

    @property
    def runs(self) -> int:
        return len(self.fractions) + self.n_undefined

    @property
    def ci_low(self) -> float:
        return self.mean - self.half_width

    @property
    def ci_high(self) -> float:
        return self.mean + self.half_width


def summarize(values, policy: str, config: SimConfig, n_undefined: int = 0) -> Estimate:
    values = tuple(float(x) for x in values)
    if not values:
        raise ValueError("no run produced a defined capture fraction")
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else math.nan
    half = Z95 * std / math.sqrt(len(values)) if len(values) > 1 else math.inf
    return Estimate(policy, config, values, n_undefined, mean, std, half)


def _run_one(args):
    config, policy, index = args
    return run_simulation(config, policy, index)


def run_many(config: SimConfig, policy: str, runs: int, workers: int = 1) -> list[RunMetrics]:
    """Runs ``0..runs-1``, returned in run order whatever the scheduling."""
    jobs = [(config, policy, i) for i in range(runs)]
    if workers <= 1:
        return [_run_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def estimate(config: SimConfig, policy: str, runs: int, workers: int = 1) -> Estimate:
    """Mean capture fraction over independent runs with a normal 95% interval."""
    if runs < 2:
        raise ValueError("need at least two runs")
    results = run_many(config, policy, runs, workers)
    fractions = [r.capture_fraction for r in results]
    defined = [f for f in fractions if f is not None]
    return summarize(defined, policy, config, len(fractions) - len(defined))


# -- vehicle-free statistics --------------------------------------------------------


def _in_sector(theta, lo, hi):
    width = (hi - lo) % (2.0 * math.pi)
    return np.mod(theta - lo, 2.0 * math.pi) <= width


def no_interception_census(config: SimConfig, band, sector, t: float, runs: int) -> np.ndarray:
    """Target counts in an annular sector at time ``t`` when nobody intercepts.

    ``band`` is ``(r1, r2)`` and must lie in the populated radii
    ``[max(rho, D - v t), D]``; ``sector`` is ``(theta1, theta2)``, wrapping
    through zero if ``theta2 < theta1``.
    """
    r1, r2 = band
    inner = max(config.rho, config.capital_d - config.v * t)
    if not (inner <= r1 <= r2 <= config.capital_d):
        raise ValueError(f"band {band} outside the populated region [{inner}, {config.capital_d}]")
    counts = np.empty(runs, dtype=np.int64)
    for i in range(runs):
        arr = generate_arrivals(config, i, horizon=t)
        r = config.capital_d - config.v * (t - arr.times)
        counts[i] = np.count_nonzero((r >= r1) & (r <= r2) & _in_sector(arr.thetas, *sector))
    return counts


def nearest_intercept_census(config: SimConfig, t: float, vehicle_radius: float, runs: int) -> np.ndarray:
    """Per-run time for a vehicle at ``(vehicle_radius, 0)`` to reach the nearest target.

    Targets are those between the perimeter and the generation circle at
    time ``t`` of an interception-free run; runs with no target are skipped.
    """
    out = []
    for i in range(runs):
        arr = generate_arrivals(config, i, horizon=t)
        r = config.capital_d - config.v * (t - arr.times)
        keep = r >= config.rho
        if np.any(keep):
            T = intercept_times((vehicle_radius, 0.0), r[keep], arr.thetas[keep], config.v)
            out.append(float(T.min()))
    return np.asarray(out)


def with_seed(config: SimConfig, seed: int) -> SimConfig:
    return replace(config, seed=seed)
