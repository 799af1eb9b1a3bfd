"""End-to-end acceptance checks, one test per criterion.

Every Monte Carlo check uses seed 1, fixed before any run was made. A
one-line verdict per criterion is printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from ritsim import bounds
from ritsim.bounds import erf
from ritsim.cli import main as cli_main
from ritsim.engine import estimate, nearest_intercept_census, no_interception_census
from ritsim.geometry import sequential_intercept_time, static_path_length
from ritsim.graph import build_reachability_graph, longest_path, longest_path_bruteforce
from ritsim.model import SimConfig
from ritsim.tour import emhp_heuristic, exact_open_path

SEED = 1
RHO, D = 3.0, 20.0


@pytest.fixture
def verdict(record_property):
    def record(number, title, detail=""):
        record_property("criterion", number)
        record_property("title", title)
        record_property("detail", detail)
    return record


@pytest.mark.slow
def test_criterion_01_fcfs_between_bounds(verdict):
    v, grid = 0.2, (0.25, 0.5, 1.0, 2.0, 4.0)
    t0 = time.perf_counter()
    rows = []
    for lam in grid:
        est = estimate(SimConfig(lam=lam, v=v, horizon=2e4, seed=SEED), "fcfs", 30)
        rows.append((lam, est, bounds.fcfs_lower_bound(lam, RHO), bounds.upper_bound(lam, v, RHO)))
    elapsed = time.perf_counter() - t0
    detail = "; ".join(f"lam={lam:g}: {low:.3f} <= {e.mean:.3f} +- {e.half_width:.4f} <= {up:.3f}"
                       for lam, e, low, up in rows) + f"; {elapsed:.0f}s"
    verdict(1, "FCFS capture fraction between its lower bound and the universal upper bound", detail)
    for lam, e, low, up in rows:
        assert low - e.half_width <= e.mean <= up + e.half_width, lam
    assert elapsed < 300


def test_criterion_02_poisson_census(verdict):
    lam, v, t = 10.0, 0.5, 30.0
    band, width = (10.0, 12.0), math.pi / 3
    counts = no_interception_census(SimConfig(lam=lam, v=v, seed=SEED), band, (1.0, 1.0 + width), t, 2000)
    expected = lam * (band[1] - band[0]) * width / (2 * math.pi * v)
    mean, var = counts.mean(), counts.var(ddof=1)
    mean_err, disp = abs(mean - expected) / expected, abs(mean - var) / mean
    verdict(2, "outstanding-target counts in a sector are Poisson",
            f"expected {expected:.4f}, mean {mean:.4f} ({mean_err:.2%}), variance {var:.4f} ({disp:.2%})")
    assert mean_err <= 0.05
    assert disp <= 0.05


def _sandwich_instances(rng, count):
    out = []
    speeds = (0.1, 0.5, 0.9)
    while len(out) < count:
        v = speeds[len(out) % 3]
        n = int(rng.integers(1, 11))
        r_vehicle, phi = RHO * math.sqrt(rng.random()), rng.uniform(0, 2 * math.pi)
        vehicle = (r_vehicle * math.cos(phi), r_vehicle * math.sin(phi))
        targets = list(zip(rng.uniform(RHO, D, n), rng.uniform(0, 2 * math.pi, n)))
        res = sequential_intercept_time(vehicle, targets, v)
        if res.valid:
            out.append((v, vehicle, targets, res.total_time))
    return out


def test_criterion_03_path_sandwich(verdict):
    rng = np.random.default_rng(SEED)
    lower_fail = upper_fail = 0
    worst = 0.0
    for v, vehicle, targets, T in _sandwich_instances(rng, 1000):
        pts = [vehicle] + [(r * math.cos(t), r * math.sin(t)) for r, t in targets]
        ts = static_path_length(pts)
        if ts / (1 + v) > T + 1e-9:
            lower_fail += 1
            worst = max(worst, ts / (1 + v) - T)
        if T > ts / (1 - v) + 1e-9:
            upper_fail += 1
    verdict(3, "sequential intercept time sandwiched by the static path length",
            f"lower half violated on {lower_fail}/1000 (worst by {worst:.3f}), upper half on {upper_fail}/1000")
    assert upper_fail == 0
    assert lower_fail == 0


def test_criterion_04_longest_path_oracle(verdict):
    rng = np.random.default_rng(SEED)
    mismatches = 0
    for _ in range(500):
        n = int(rng.integers(0, 9))
        items = np.column_stack([rng.uniform(RHO, RHO + 10, n), rng.uniform(0, 2 * math.pi, n)])
        dag = build_reachability_graph(rng.uniform(0, 2 * math.pi), items, rng.uniform(0.05, 0.95), RHO)
        mismatches += len(longest_path(dag)) != len(longest_path_bruteforce(dag))
    verdict(4, "DP longest path matches exhaustive enumeration", f"{mismatches}/500 mismatches")
    assert mismatches == 0


def test_criterion_05_tour_bound(verdict):
    rng = np.random.default_rng(SEED)
    side = 6 * RHO
    square = (-3 * RHO, -3 * RHO, side)
    worst = {}
    for n in (10, 100, 1000):
        slack = []
        for _ in range(200):
            pts = rng.uniform(-3 * RHO, 3 * RHO, (n, 2))
            start = tuple(rng.uniform(-3 * RHO, 3 * RHO, 2))
            slack.append(emhp_heuristic(start, pts, square).length / bounds.few_bound(n, side))
        worst[n] = max(slack)
    ratios = []
    below_optimum = 0
    for _ in range(200):
        pts = rng.uniform(-3 * RHO, 3 * RHO, (7, 2))
        start = tuple(rng.uniform(-3 * RHO, 3 * RHO, 2))
        h, opt = emhp_heuristic(start, pts, square).length, exact_open_path(start, pts).length
        below_optimum += h < opt - 1e-9
        ratios.append(h / opt)
    within = float(np.mean(np.array(ratios) <= 1.25))
    verdict(5, "heuristic path length within the strip bound and near optimal",
            ", ".join(f"n={n}: max length/bound {w:.3f}" for n, w in worst.items())
            + f"; n=7: {within:.1%} within 1.25x optimum, max ratio {max(ratios):.3f}")
    assert all(w <= 1.0 for w in worst.values())
    assert below_optimum == 0
    assert within >= 0.95


@pytest.fixture(scope="module")
def lookahead_sweep():
    out = {}
    for lam in (0.5, 1.0, 2.0):
        cfg = SimConfig(lam=lam, v=0.8, horizon=2000.0, seed=SEED)
        out[lam] = (estimate(cfg, "la", 20), estimate(cfg, "ncla", 20))
    return out


@pytest.mark.slow
def test_criterion_06_la_vs_ncla(verdict, lookahead_sweep):
    assert bounds.la_precondition(0.8, RHO, D)
    factor = bounds.la_relative_factor(0.8, RHO, D)
    parts, ok = [], True
    for lam, (la, ncla) in lookahead_sweep.items():
        rhs = factor * ncla.mean - (la.half_width + factor * ncla.half_width)
        ok &= la.mean >= rhs
        parts.append(f"lam={lam:g}: LA {la.mean:.3f} >= {factor:.4f} x NCLA {ncla.mean:.3f} - CI = {rhs:.3f}")
    verdict(6, "causal look-ahead within the relative factor of the non-causal one", "; ".join(parts))
    assert ok


@pytest.mark.slow
def test_criterion_07_explicit_la_bound(verdict, lookahead_sweep):
    parts, ok = [], True
    for lam, (la, _) in lookahead_sweep.items():
        low = bounds.la_lower_bound(lam, RHO)
        ok &= la.mean >= low - la.half_width
        parts.append(f"lam={lam:g}: LA {la.mean:.3f} >= {low:.3f}")
    verdict(7, "look-ahead fraction above its explicit lower bound", "; ".join(parts))
    assert ok


@pytest.mark.slow
def test_criterion_08_rmhp_regime(verdict):
    v = 0.04
    parts, ok = [], True
    for lam in (20.0, 50.0, 100.0):
        cfg = SimConfig(lam=lam, v=v, horizon=1500.0, warmup=500.0, seed=SEED)
        rmhp, fcfs = estimate(cfg, "rmhp", 5), estimate(cfg, "fcfs", 5)
        up, low = bounds.upper_bound(lam, v, RHO), bounds.rmhp_lower_bound(lam, v, RHO)
        ok &= rmhp.mean <= up + rmhp.half_width and rmhp.mean >= fcfs.mean
        parts.append(f"lam={lam:g}: RMHP {rmhp.mean:.3f} (FCFS {fcfs.mean:.3f}, upper {up:.3f}, "
                     f"RMHP lower bound {low:.3f}, gap {rmhp.mean - low:+.3f})")
    verdict(8, "RMHP under the upper bound and above FCFS; gap to its lower bound reported", "; ".join(parts))
    assert ok


def test_criterion_09_travel_time_bound(verdict):
    lam, v = 5.0, 0.2
    cfg = SimConfig(lam=lam, v=v, seed=SEED)
    low = bounds.travel_time_lower_bound(lam, v, RHO)
    t = 2 * cfg.travel_time  # population of the annulus has reached steady state
    parts, ok = [], True
    for radius in (0.0, RHO):
        times = nearest_intercept_census(cfg, t, radius, 2000)
        half = 1.959963984540054 * times.std(ddof=1) / math.sqrt(len(times))
        ok &= times.mean() >= low - half
        parts.append(f"vehicle radius {radius:g}: mean {times.mean():.4f} +- {half:.4f}")
    verdict(9, "nearest-target intercept time above its lower bound", f"bound {low:.4f}; " + "; ".join(parts))
    assert ok


def test_criterion_10_optimality_ratio_limits(verdict):
    r = bounds.optimality_ratio(1e8, 1e-6, RHO)
    verdict(10, "optimality ratio small-speed limits",
            f"ratio {r.ratio:.4f} vs {12 / math.sqrt(math.pi):.4f}, improved {r.improved_ratio:.4f} vs 2.25")
    assert r.ratio == pytest.approx(12 / math.sqrt(math.pi), rel=0.01)
    assert r.improved_ratio == pytest.approx(2.25, rel=0.01)


ERF_REFERENCE = {0.1: 0.1124629160, 0.5: 0.5204998778, 1.0: 0.8427007929,
                 1.5: 0.9661051465, 2.0: 0.9953222650, 3.0: 0.9999779095}


def test_criterion_11_erf_accuracy(verdict):
    err = max(abs(erf(x) - ref) for x, ref in ERF_REFERENCE.items())
    odd = all(erf(-x) == -erf(x) for x in ERF_REFERENCE) and erf(0.0) == 0.0
    verdict(11, "erf approximation accuracy and odd symmetry", f"max abs error {err:.2e}")
    assert err <= 1.5e-7 and odd


def test_criterion_12_determinism(verdict, tmp_path):
    cfg = tmp_path / "c.cfg"
    same = []
    for policy, v, lam in (("fcfs", 0.2, 1.0), ("sac", 0.2, 1.0), ("la", 0.8, 1.0), ("ncla", 0.8, 1.0),
                           ("rmhp", 0.04, 10.0)):
        cfg.write_text(f"lambda = {lam}\nv = {v}\nhorizon = 400\n", encoding="utf-8")
        outs = []
        for k in range(2):
            out = tmp_path / f"{policy}{k}.csv"
            assert cli_main(["run", "--config", str(cfg), "--policy", policy, "--seed", str(SEED),
                             "--runs", "2", "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        same.append(outs[0] == outs[1])
    verdict(12, "repeated runs give byte-identical CSV", f"{sum(same)}/{len(same)} policies identical")
    assert all(same)
