"""Median online (with certification) and full-solve wall times across grid sizes, N fixed."""
import argparse
from pathlib import Path

from burgers_rb.benchmark import median_time
from burgers_rb.certify import certify_trajectory
from burgers_rb.config import load_config
from burgers_rb.full import FullModel, solve_full
from burgers_rb.offline import build_reduced_model
from burgers_rb.params import make_parameter_point

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grids", type=int, nargs="*", default=[60, 120, 240, 480])
    parser.add_argument("--repeats", type=int, default=15)
    parser.add_argument("--snapshots", type=int, default=10)
    args = parser.parse_args()
    base = load_config(CONFIGS / "full_box.ini").replace(rb={"snapshots": args.snapshots})
    print("grid,online_ms,full_ms,ratio")
    for n in args.grids:
        config = base.replace(num_intervals=n)
        fm = FullModel(config)
        online = build_reduced_model(config, full_model=fm).online_view()
        mu = make_parameter_point([1, 1, 1, 1, 1, 1, 2], config.freq, config.ranges)
        certify_trajectory(online, mu)
        t_on, _ = median_time(lambda: certify_trajectory(online, mu), args.repeats)
        t_full, _ = median_time(lambda: solve_full(config, mu, fm), max(args.repeats // 3, 5))
        print(f"{n},{1e3 * t_on:.3f},{1e3 * t_full:.3f},{t_full / t_on:.1f}")


if __name__ == "__main__":
    main()
