"""Plot sweep CSVs written by figure_sweeps.py (needs matplotlib).

    python3 scripts/plot_figures.py results/
"""

import argparse
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def num(text):
    return float(text) if text else float("nan")


def plot(sweep_csv: Path, out: Path):
    rows = read(sweep_csv)
    by_policy = defaultdict(list)
    for row in rows:
        by_policy[row["policy"]].append(row)
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for policy, pts in by_policy.items():
        lam = [num(p["lambda"]) for p in pts]
        mean = [num(p["mean_fraction"]) for p in pts]
        err = [num(p["ci_high"]) - num(p["mean_fraction"]) for p in pts]
        ax.errorbar(lam, mean, yerr=err, marker="o", capsize=3, label=policy.upper())
        low = [num(p["policy_lower_bound"]) for p in pts]
        if any(x == x for x in low):
            ax.plot(lam, low, "--", label=f"{policy.upper()} lower bound")
        rel = [num(p["relative_bound"]) for p in pts]
        if any(x == x for x in rel):
            ax.plot(lam, rel, ":", label="relative bound")
    first = next(iter(by_policy.values()))
    ax.plot([num(p["lambda"]) for p in first], [num(p["upper_bound"]) for p in first], "k-", label="upper bound")
    ax.set_xlabel("arrival rate")
    ax.set_ylabel("capture fraction")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("resultdir", type=Path)
    args = parser.parse_args()
    for path in sorted(args.resultdir.glob("*.csv")):
        if path.stem.endswith("_bounds"):
            continue
        plot(path, path.with_suffix(".png"))
        print(path.with_suffix(".png"))


if __name__ == "__main__":
    main()
