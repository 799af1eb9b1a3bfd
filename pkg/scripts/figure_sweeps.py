"""Regenerate the capture-fraction sweeps behind the three policy figures.

Writes one CSV per figure (plus the matching analytic curves) into OUTDIR.
The full protocol takes a while on one core; ``--quick`` shortens horizons
and run counts for a smoke test.

    python3 scripts/figure_sweeps.py results/ --workers 4
"""

import argparse
from pathlib import Path

from ritsim.cli import main as ritsim

FIGURES = {
    "fcfs_v0.2": dict(policies="fcfs,sac", v=0.2, grid="0.1,0.25,0.5,1,2,3,4,5", horizon=20000, runs=30),
    "lookahead_v0.8": dict(policies="la,ncla", v=0.8, grid="0.25,0.5,1,2,4", horizon=2000, runs=20),
    "rmhp_v0.04": dict(policies="rmhp,fcfs", v=0.04, grid="10,20,50,100", horizon=1500, warmup=500, runs=5),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("outdir", type=Path)
    parser.add_argument("--only", choices=list(FIGURES), action="append")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--quick", action="store_true")
    args = parser.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    for name in args.only or FIGURES:
        fig = FIGURES[name]
        horizon = fig["horizon"] / 10 if args.quick else fig["horizon"]
        runs = 2 if args.quick else fig["runs"]
        argv = ["sweep", "--policies", fig["policies"], "--lambda-grid", fig["grid"], "--v", str(fig["v"]),
                "--horizon", str(horizon), "--runs", str(runs), "--seed", str(args.seed),
                "--workers", str(args.workers), "--out", str(args.outdir / f"{name}.csv")]
        if "warmup" in fig:
            argv += ["--warmup", str(fig["warmup"] / 10 if args.quick else fig["warmup"])]
        print(f"{name}: {' '.join(argv)}", flush=True)
        if ritsim(argv):
            raise SystemExit(f"sweep {name} failed")
        ritsim(["bounds", "--lambda-grid", fig["grid"], "--v", str(fig["v"]), "--rho", "3",
                "--out", str(args.outdir / f"{name}_bounds.csv")])


if __name__ == "__main__":
    main()
