"""Exact stability constant against its SCM bounds along one reduced trajectory."""
import argparse
from pathlib import Path

import numpy as np

from burgers_rb.config import load_config
from burgers_rb.full import FullModel
from burgers_rb.offline import build_reduced_model
from burgers_rb.online import solve_reduced
from burgers_rb.params import make_parameter_point
from burgers_rb.scm import exact_stability, scm_lower_many, scm_upper_many

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(CONFIGS / "full_box.ini"))
    parser.add_argument("--mu", default="1,1,1,1,1,1,2")
    args = parser.parse_args()
    config = load_config(args.config)
    fm = FullModel(config)
    model = build_reduced_model(config, full_model=fm)
    mu = make_parameter_point([float(v) for v in args.mu.split(",")], config.freq, config.ranges)
    U = solve_reduced(model, mu).coeffs[1:]
    ks = np.arange(1, len(U) + 1)
    lo, hi = scm_lower_many(model.scm, mu, ks, U), scm_upper_many(model.scm, mu, U)
    exact = np.array([exact_stability(fm.space, fm.forms, model.basis.vectors @ u, mu.nu) for u in U])
    print("k,C_exact,C_inf,C_sup")
    for row in zip(ks, exact, lo, hi):
        print("%d,%.8f,%.8f,%.8f" % row)
    gap = np.max((exact - lo) / np.abs(exact))
    print(f"# max relative gap of the lower bound: {gap:.3e}")


if __name__ == "__main__":
    main()
