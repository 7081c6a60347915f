"""Bound convergence in N for the two benchmark setups, POD and greedy; one CSV per setup."""
import argparse
import logging
from pathlib import Path

from burgers_rb.benchmark import run_benchmark
from burgers_rb.config import load_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--setups", nargs="*", default=["benchmark1", "benchmark2"])
    parser.add_argument("--n-max", type=int, default=10)
    parser.add_argument("--samples", type=int, default=100)
    parser.add_argument("--compare", action="store_true")
    parser.add_argument("--outdir", default=".")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    for name in args.setups:
        report = run_benchmark(load_config(CONFIGS / f"{name}.ini"), list(range(2, args.n_max + 1)),
                               samples=args.samples, compare=args.compare)
        out = Path(args.outdir) / f"{name}.csv"
        report.write_csv(out)
        for row in report.rows:
            print(f"{name} {row.method:6s} N={row.N:2d} max={row.max_rel_bound:.3e} mean={row.mean_rel_bound:.3e}")
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
