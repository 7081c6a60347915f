"""Convergence benchmarks: certified bounds as a function of the basis size N."""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .certify import certify_trajectory
from .fem import l2_norm
from .full import FullModel, solve_full
from .offline import assemble_model, build_basis, train_scm
from .params import sample_parameters

log = logging.getLogger(__name__)


@dataclass
class BenchmarkRow:
    N: int
    method: str
    max_rel_bound: float
    mean_rel_bound: float
    max_rel_error: float = float("nan")
    mean_rel_error: float = float("nan")
    offline_seconds: float = float("nan")
    online_seconds: float = float("nan")  # median per sample point
    full_seconds: float = float("nan")  # median per sample point


@dataclass
class BenchmarkReport:
    rows: list = field(default_factory=list)

    def write_csv(self, path):
        names = list(BenchmarkRow.__dataclass_fields__)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for row in self.rows:
                w.writerow([repr(v) if isinstance(v, float) else v for v in asdict(row).values()])

    def column(self, method, name):
        return np.array([getattr(r, name) for r in self.rows if r.method == method])

    def sizes(self, method):
        return [r.N for r in self.rows if r.method == method]


def median_time(fn, repeats=5):
    """Median wall-clock seconds of ``fn()`` over ``repeats`` calls, and the last result."""
    times = []
    out = None
    for _ in range(max(repeats, 1)):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times)), out


def run_benchmark(config, sizes, methods=("pod", "greedy"), samples=100, compare=False, seed=None,
                  enrich=None):
    """Sweep N over ``sizes`` for each basis method on one shared parameter sample.

    The largest basis is built once per method and truncated (both constructions
    produce nested bases).  With ``compare`` each sample point gets exactly one
    full solve, reused for every N.
    """
    seed = config.seed if seed is None else seed
    fm = FullModel(config)
    sample = sample_parameters(config.ranges, config.freq, samples, seed + 101)
    full_states, full_times = None, []
    if compare:
        full_states = []
        for mu in sample:
            t0 = time.perf_counter()
            full_states.append(solve_full(config, mu, fm).states)
            full_times.append(time.perf_counter() - t0)
    report = BenchmarkReport()
    for method in methods:
        t0 = time.perf_counter()
        largest = build_basis(config, method, max(sizes), enrich, fm, seed)
        basis_seconds = time.perf_counter() - t0
        for n in sizes:
            t0 = time.perf_counter()
            model = train_scm(assemble_model(largest.truncated(n), config, fm), fm)
            offline = basis_seconds + time.perf_counter() - t0
            online = model.online_view()
            rel, err, times = [], [], []
            for i, mu in enumerate(sample):
                t1 = time.perf_counter()
                sol = certify_trajectory(online, mu, diagnostics=False)
                times.append(time.perf_counter() - t1)
                norms = sol.trajectory.norms()
                rel.append(np.max(sol.bounds / norms))
                if compare:
                    recon = sol.trajectory.coeffs @ model.basis.vectors.T
                    diff = full_states[i] - recon
                    e = np.array([l2_norm(fm.space, fm.forms, d) for d in diff])
                    err.append(np.max(e / norms))
            row = BenchmarkRow(
                N=n, method=method, max_rel_bound=float(np.max(rel)), mean_rel_bound=float(np.mean(rel)),
                offline_seconds=offline, online_seconds=float(np.median(times)),
            )
            if compare:
                row.max_rel_error = float(np.max(err))
                row.mean_rel_error = float(np.mean(err))
                row.full_seconds = float(np.median(full_times))
            log.info("%s N=%d: max rel bound %.3e", method, n, row.max_rel_bound)
            report.rows.append(row)
    return report
