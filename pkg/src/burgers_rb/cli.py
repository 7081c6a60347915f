"""Command-line entry point: ``burgers-rb <command> --config FILE ...``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from .benchmark import run_benchmark
from .certify import certify_trajectory
from .config import load_config
from .errors import BurgersRBError, CompatibilityError
from .fem import l2_norm
from .full import FullModel, boundary_error_indicator, solve_full
from .offline import ReducedModel, build_reduced_model
from .online import solve_reduced
from .params import make_parameter_point, sample_parameters
from .scm import exact_stability, scm_lower_many, scm_upper_many

log = logging.getLogger("burgers_rb")


def _parameter(config, args):
    """Explicit ``--mu`` free coordinates, else one seeded draw from the configured ranges."""
    if args.mu:
        values = [float(v) for v in args.mu.split(",")]
        return make_parameter_point(values, config.freq, config.ranges)
    return sample_parameters(config.ranges, config.freq, 1, args.seed + 1000)[0]


def _with_overrides(config, args):
    rb = {}
    if getattr(args, "basis", None):
        rb["basis"] = args.basis
    if getattr(args, "N", None):
        rb["size"] = args.N
    if getattr(args, "enrich", False):
        rb["enrich"] = True
    changes = {"rb": rb} if rb else {}
    if args.seed is not None:
        changes["seed"] = args.seed
    return config.replace(**changes) if changes else config


def _load_model(args, config):
    if not args.model:
        raise BurgersRBError("--model is required for this command")
    model = ReducedModel.load(args.model)
    if model.config.freq != config.freq or model.config.num_intervals != config.num_intervals:
        raise CompatibilityError("model was built for a different configuration")
    return model


def cmd_full_solve(args, config):
    mu = _parameter(config, args)
    traj = solve_full(config, mu)
    if args.out:
        traj.write_csv(args.out)
    print(f"boundary error indicator: {boundary_error_indicator(traj, mu):.3e}")


def cmd_offline_build(args, config):
    if not args.model:
        raise BurgersRBError("--model is required for offline-build")
    model = build_reduced_model(config)
    model.save(args.model)
    print(f"saved {config.rb.basis} model with N={model.size} and {model.scm.size} SCM constraints "
          f"to {args.model}")


def cmd_online_solve(args, config):
    model = _load_model(args, config)
    mu = _parameter(config, args)
    sol = certify_trajectory(model, mu)
    actual = None
    if args.compare:
        fm = FullModel(config)
        full = solve_full(config, mu, fm)
        recon = sol.trajectory.coeffs @ model.basis.vectors.T
        actual = np.array([l2_norm(fm.space, fm.forms, d) for d in full.states - recon])
    if args.out:
        sol.write_csv(args.out, actual)
    print(f"max relative bound: {np.max(sol.relative_bounds()):.3e}")


def cmd_benchmark(args, config):
    sizes = list(range(args.n_min, (args.N or config.rb.size) + 1))
    methods = [args.basis] if args.basis else ["pod", "greedy"]
    report = run_benchmark(config, sizes, methods, args.samples, args.compare, enrich=None)
    if args.out:
        report.write_csv(args.out)
    for row in report.rows:
        print(f"{row.method:6s} N={row.N:2d} max={row.max_rel_bound:.3e} mean={row.mean_rel_bound:.3e}")


def cmd_scm_report(args, config):
    model = _load_model(args, config)
    mu = _parameter(config, args)
    fm = FullModel(config)
    traj = solve_reduced(model, mu)
    ks = np.arange(1, model.num_steps + 1)
    U = traj.coeffs[1:]
    c_inf = scm_lower_many(model.scm, mu, ks, U)
    c_sup = scm_upper_many(model.scm, mu, U)
    exact = [exact_stability(fm.space, fm.forms, u, mu.nu) for u in U @ model.basis.vectors.T]
    rows = zip(ks, exact, c_inf, c_sup)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["k", "C_exact", "C_inf", "C_sup"])
        for k, e, lo, hi in rows:
            w.writerow([int(k), repr(float(e)), repr(float(lo)), repr(float(hi))])
    finally:
        if fh is not sys.stdout:
            fh.close()


COMMANDS = {
    "full-solve": cmd_full_solve,
    "offline-build": cmd_offline_build,
    "online-solve": cmd_online_solve,
    "benchmark": cmd_benchmark,
    "scm-report": cmd_scm_report,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="burgers-rb", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--model")
    parser.add_argument("--out")
    parser.add_argument("--basis", choices=["pod", "greedy"])
    parser.add_argument("--enrich", action="store_true")
    parser.add_argument("--N", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--mu", help="comma-separated free coordinates: nu, A_b0, A_b1, f_m, A_f, u0m, A_u0")
    parser.add_argument("--compare", action="store_true", help="also run the full solver for actual errors")
    parser.add_argument("--samples", type=int, default=100, help="benchmark sample size")
    parser.add_argument("--n-min", type=int, default=2, help="smallest N in the benchmark sweep")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def run_command(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _with_overrides(load_config(args.config), args)
        if args.seed is None:
            args.seed = config.seed
        COMMANDS[args.command](args, config)
    except BurgersRBError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
