"""Boundary error indicator eps_b of the penalized full solver for the two single-instance setups."""
import argparse
from pathlib import Path

from burgers_rb.config import load_config
from burgers_rb.full import boundary_error_indicator, solve_full
from burgers_rb.params import make_parameter_point

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--penalty", type=float, nargs="*", default=[1e7])
    args = parser.parse_args()
    for name, nu in (("high_viscosity", 1.0), ("low_viscosity", 0.1)):
        config = load_config(CONFIGS / f"{name}.ini")
        mu = make_parameter_point([nu, 1, 1, 1, 1, 1, 2], config.freq, config.ranges)
        for P in args.penalty:
            traj = solve_full(config.replace(penalty=P), mu)
            print(f"{name:13s} P={P:.0e}  eps_b = {boundary_error_indicator(traj, mu):.3e}")


if __name__ == "__main__":
    main()
