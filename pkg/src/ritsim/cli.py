"""Command-line experiment runner: ``run``, ``sweep`` and ``bounds``, all emitting CSV.

Exit codes: 0 on success, 2 on usage errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from . import bounds
from .engine import RunMetrics, estimate, run_many, summarize
from .model import SimConfig
from .policies import POLICIES

CONFIG_KEYS = {
    "lambda": ("lam", float),
    "v": ("v", float),
    "rho": ("rho", float),
    "capital_d": ("capital_d", float),
    "horizon": ("horizon", float),
    "warmup": ("warmup", float),
    "seed": ("seed", int),
}

RUN_COLUMNS = [
    "run", "policy", "lambda", "v", "rho", "capital_d", "horizon", "warmup", "seed",
    "n_capt", "n_esc", "n_unresolved", "capture_fraction",
    "fraction_half_warmup", "fraction_double_warmup", "ci_low", "ci_high",
]
SWEEP_COLUMNS = [
    "lambda", "policy", "mean_fraction", "ci_low", "ci_high", "runs", "upper_bound",
    "policy_lower_bound", "seed", "std", "n_undefined", "lower_bound_gap",
    "relative_factor", "relative_bound",
]
BOUNDS_COLUMNS = [
    "lambda", "v", "rho", "capital_d", "upper_bound", "fcfs_lower_bound", "la_lower_bound",
    "la_relative_factor", "rmhp_lower_bound", "travel_time_lower_bound",
    "optimality_ratio", "improved_ratio", "ratio_informative", "degenerate", "status",
]


class CliError(Exception):
    """A runtime failure reported as ``error: ...`` with exit code 1."""


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key or not value:
            raise CliError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in CONFIG_KEYS:
            raise CliError(f"{source}:{lineno}: unknown key {key!r}; valid keys: {', '.join(CONFIG_KEYS)}")
        if key in values:
            raise CliError(f"{source}:{lineno}: duplicate key {key!r}")
        name, kind = CONFIG_KEYS[key]
        try:
            values[name] = kind(value)
        except ValueError:
            raise CliError(f"{source}:{lineno}: bad value for {key}: {value!r}") from None
    return values


def load_config(path: str, **overrides) -> SimConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}") from None
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc.strerror}") from None
    values = parse_config_text(text, path)
    values.update({k: v for k, v in overrides.items() if v is not None})
    if "lam" not in values or "v" not in values:
        raise CliError(f"{path}: 'lambda' and 'v' are required")
    return make_config(**values)


def make_config(**values) -> SimConfig:
    try:
        return SimConfig(**values)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def parse_grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def parse_policies(text: str) -> list[str]:
    names = [x.strip() for x in text.split(",") if x.strip()]
    bad = [n for n in names if n not in POLICIES]
    if bad or not names:
        raise argparse.ArgumentTypeError(
            f"unknown policy {', '.join(bad) or text!r}; valid names: {', '.join(POLICIES)}"
        )
    return names


@dataclass(frozen=True)
class SweepSpec:
    base: SimConfig
    lambda_grid: tuple[float, ...]
    policies: tuple[str, ...]
    runs: int
    allow_degenerate: bool = False

    def __post_init__(self):
        grid = self.lambda_grid
        if not grid:
            raise ValueError("lambda grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("lambda grid must be strictly increasing")
        if not self.allow_degenerate and grid[0] <= 0.0:
            raise ValueError("lambda grid must be > 0 (pass --allow-degenerate to include 0)")
        if grid[0] < 0.0:
            raise ValueError("arrival rates must be >= 0")
        if not self.policies:
            raise ValueError("no policy given")
        if self.runs < 2:
            raise ValueError("a sweep needs at least 2 runs per point")

    def points(self):
        for lam in self.lambda_grid:
            for policy in self.policies:
                yield replace(self.base, lam=lam), policy


def policy_lower_bound(policy: str, config: SimConfig) -> float | None:
    lam, v, rho, d = config.lam, config.v, config.rho, config.capital_d
    if policy in ("fcfs", "sac"):
        return bounds.fcfs_lower_bound(lam, rho)
    if policy == "la":
        return bounds.la_lower_bound(lam, rho) if bounds.la_precondition(v, rho, d) else None
    if policy == "rmhp":
        return bounds.rmhp_lower_bound(lam, v, rho)
    return None


def write_csv(rows, columns, out) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c)) for c in columns])
    if out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        try:
            Path(out).write_text(buf.getvalue(), encoding="utf-8")
        except OSError as exc:
            raise CliError(f"cannot write {out}: {exc.strerror}") from None


def _config_fields(config: SimConfig) -> dict:
    return {
        "lambda": config.lam, "v": config.v, "rho": config.rho, "capital_d": config.capital_d,
        "horizon": config.horizon, "warmup": config.warmup, "seed": config.seed,
    }


def run_rows(results: list[RunMetrics]) -> list[dict]:
    rows = []
    for m in results:
        cfg = m.config
        double = 2.0 * cfg.warmup
        rows.append({
            "run": m.run_index, "policy": m.policy, **_config_fields(cfg),
            "n_capt": m.n_capt, "n_esc": m.n_esc, "n_unresolved": m.n_unresolved,
            "capture_fraction": m.capture_fraction,
            "fraction_half_warmup": m.fraction_after(0.5 * cfg.warmup),
            "fraction_double_warmup": m.fraction_after(double) if double < cfg.horizon else None,
        })
    if len(results) > 1:
        defined = [m.capture_fraction for m in results if m.capture_fraction is not None]
        agg = {
            "run": "mean", "policy": results[0].policy, **_config_fields(results[0].config),
            "n_capt": sum(m.n_capt for m in results),
            "n_esc": sum(m.n_esc for m in results),
            "n_unresolved": sum(m.n_unresolved for m in results),
        }
        if defined:
            est = summarize(defined, results[0].policy, results[0].config, len(results) - len(defined))
            agg.update(capture_fraction=est.mean, ci_low=est.ci_low, ci_high=est.ci_high)
        rows.append(agg)
    return rows


def cmd_run(args) -> None:
    config = load_config(args.config, seed=args.seed)
    if args.runs < 1:
        raise CliError("--runs must be >= 1")
    try:
        results = run_many(config, args.policy, args.runs, args.workers)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    write_csv(run_rows(results), RUN_COLUMNS, args.out)


def _estimate_point(job):
    config, policy, runs = job
    if config.lam == 0.0:
        return None
    return estimate(config, policy, runs)


def sweep_rows(spec: SweepSpec, workers: int = 1) -> list[dict]:
    jobs = [(cfg, policy, spec.runs) for cfg, policy in spec.points()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            estimates = list(pool.map(_estimate_point, jobs))
    else:
        estimates = [_estimate_point(job) for job in jobs]

    ncla_mean = {cfg.lam: est.mean for (cfg, policy, _), est in zip(jobs, estimates)
                 if policy == "ncla" and est is not None}
    rows = []
    for (cfg, policy, runs), est in zip(jobs, estimates):
        low = policy_lower_bound(policy, cfg)
        row = {
            "lambda": cfg.lam, "policy": policy, "runs": runs, "seed": cfg.seed,
            "upper_bound": bounds.upper_bound(cfg.lam, cfg.v, cfg.rho), "policy_lower_bound": low,
        }
        if est is not None:
            row.update(mean_fraction=est.mean, ci_low=est.ci_low, ci_high=est.ci_high,
                       std=est.std, n_undefined=est.n_undefined)
            if low is not None:
                row["lower_bound_gap"] = est.mean - low
        else:
            row["n_undefined"] = runs
        if policy == "la" and bounds.la_precondition(cfg.v, cfg.rho, cfg.capital_d):
            factor = bounds.la_relative_factor(cfg.v, cfg.rho, cfg.capital_d)
            row["relative_factor"] = factor
            if cfg.lam in ncla_mean:
                row["relative_bound"] = factor * ncla_mean[cfg.lam]
        rows.append(row)
    return rows


def cmd_sweep(args) -> None:
    overrides = {"v": args.v, "rho": args.rho, "capital_d": args.capital_d,
                 "horizon": args.horizon, "warmup": args.warmup, "seed": args.seed}
    if args.config:
        base = load_config(args.config, lam=args.lambda_grid[0], **overrides)
    else:
        if args.v is None:
            raise CliError("--v is required without --config")
        base = make_config(lam=args.lambda_grid[0], **{k: v for k, v in overrides.items() if v is not None})
    try:
        spec = SweepSpec(base, tuple(args.lambda_grid), tuple(args.policies), args.runs, args.allow_degenerate)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if base.v == 0.0 and set(spec.policies) & {"la", "ncla", "rmhp"}:
        raise CliError("la, ncla and rmhp need a positive target speed")
    write_csv(sweep_rows(spec, args.workers), SWEEP_COLUMNS, args.out)


def bounds_rows(grid, v: float, rho: float, capital_d: float) -> list[dict]:
    if any(lam < 0 or not math.isfinite(lam) for lam in grid):
        raise CliError("arrival rates must be finite and >= 0")
    if not 0.0 <= v < 1.0:
        raise CliError(f"target speed must lie in [0, 1), got {v}")
    if not 0.0 < rho < capital_d:
        raise CliError(f"need 0 < rho < capital_d, got rho={rho}, capital_d={capital_d}")
    rows = []
    for lam in grid:
        rep = bounds.bound_report(lam, v, rho, capital_d)
        flags = []
        if rep.degenerate:
            flags.append("degenerate")
        if rep.la_factor is None:
            flags.append("theorem inapplicable")
        rows.append({
            "lambda": lam, "v": v, "rho": rho, "capital_d": capital_d,
            "upper_bound": rep.upper, "fcfs_lower_bound": rep.fcfs_lower,
            "la_lower_bound": rep.la_lower, "la_relative_factor": rep.la_factor,
            "rmhp_lower_bound": rep.rmhp_lower, "travel_time_lower_bound": rep.travel_time_lb,
            "optimality_ratio": None if math.isnan(rep.ratio.ratio) else rep.ratio.ratio,
            "improved_ratio": None if math.isnan(rep.ratio.improved_ratio) else rep.ratio.improved_ratio,
            "ratio_informative": rep.ratio.informative, "degenerate": rep.degenerate,
            "status": ";".join(flags) or "ok",
        })
    return rows


def cmd_bounds(args) -> None:
    write_csv(bounds_rows(args.lambda_grid, args.v, args.rho, args.capital_d), BOUNDS_COLUMNS, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ritsim", description="Perimeter-defense capture-fraction experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one configuration")
    run.add_argument("--config", required=True, metavar="FILE")
    run.add_argument("--policy", required=True, choices=list(POLICIES))
    run.add_argument("--seed", type=int, help="overrides the seed in the config file")
    run.add_argument("--runs", type=int, default=1)
    run.add_argument("--out", metavar="FILE")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="mean capture fraction over a lambda grid")
    sweep.add_argument("--config", metavar="FILE", help="base parameters; lambda is taken from the grid")
    sweep.add_argument("--policies", required=True, type=parse_policies, help="comma-separated names")
    sweep.add_argument("--lambda-grid", required=True, type=parse_grid)
    sweep.add_argument("--runs", type=int, default=30)
    sweep.add_argument("--v", type=float)
    sweep.add_argument("--rho", type=float)
    sweep.add_argument("--capital-d", type=float)
    sweep.add_argument("--horizon", type=float)
    sweep.add_argument("--warmup", type=float)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--allow-degenerate", action="store_true", help="permit lambda = 0 in the grid")
    sweep.add_argument("--out", metavar="FILE")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.set_defaults(func=cmd_sweep)

    bnd = sub.add_parser("bounds", help="analytic bound curves")
    bnd.add_argument("--lambda-grid", required=True, type=parse_grid)
    bnd.add_argument("--v", required=True, type=float)
    bnd.add_argument("--rho", required=True, type=float)
    bnd.add_argument("--capital-d", type=float, default=20.0)
    bnd.add_argument("--out", metavar="FILE")
    bnd.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(f"ritsim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
