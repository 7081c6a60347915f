"""Certified bound next to the actual error over time for one parameter (CSV on stdout or --out)."""
import argparse
import sys
from pathlib import Path

import numpy as np

from burgers_rb.certify import certify_trajectory
from burgers_rb.config import load_config
from burgers_rb.full import FullModel, solve_full
from burgers_rb.offline import build_reduced_model
from burgers_rb.params import make_parameter_point

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(CONFIGS / "full_box.ini"))
    parser.add_argument("--mu", default="1,1,1,1,1,1,2", help="free coordinates")
    parser.add_argument("--N", type=int, default=None)
    parser.add_argument("--out")
    args = parser.parse_args()
    config = load_config(args.config)
    fm = FullModel(config)
    model = build_reduced_model(config, size=args.N, full_model=fm)
    mu = make_parameter_point([float(v) for v in args.mu.split(",")], config.freq, config.ranges)
    sol = certify_trajectory(model, mu)
    diff = solve_full(config, mu, fm).states - sol.trajectory.coeffs @ model.basis.vectors.T
    err = np.sqrt(np.einsum("ki,ij,kj->k", diff, fm.forms.mass_dense(), diff))
    if args.out:
        sol.write_csv(args.out, err)
    else:
        _print(sol, err)
    rel = sol.relative_bounds()
    print(f"max relative bound {np.max(rel):.3e}, max relative error {np.max(err / sol.trajectory.norms()):.3e}",
          file=sys.stderr)


def _print(sol, err):
    print("t,eps_k,actual_error,rel_bound")
    for t, e, a, r in zip(sol.trajectory.times, sol.bounds, err, sol.relative_bounds()):
        print(f"{t:.4f},{e:.6e},{a:.6e},{r:.6e}")


if __name__ == "__main__":
    main()
