"""Full-order reference solver: backward Euler in time, Newton in space."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import NewtonBreakdownError, NonConvergenceError, SingularSystemError
from .fem import assemble_forms, build_space, convection_matrix, interpolate


def thomas_solve(matrix, rhs):
    """Solve a tridiagonal system in O(n) without pivoting.

    ``matrix`` is a :class:`~burgers_rb.fem.Tridiagonal` or a
    ``(lower, diag, upper)`` triple.
    """
    lower, diag, upper = (matrix.lower, matrix.diag, matrix.upper) if hasattr(matrix, "diag") else matrix
    a, b, c, d = (np.asarray(x, dtype=float).tolist() for x in (lower, diag, upper, rhs))
    n = len(b)
    cp = [0.0] * n
    dp = [0.0] * n
    pivot = b[0]
    if pivot == 0.0:
        raise SingularSystemError("zero pivot at row 0")
    cp[0] = c[0] / pivot if n > 1 else 0.0
    dp[0] = d[0] / pivot
    for i in range(1, n):
        pivot = b[i] - a[i - 1] * cp[i - 1]
        if pivot == 0.0:
            raise SingularSystemError(f"zero pivot at row {i}")
        if i < n - 1:
            cp[i] = c[i] / pivot
        dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / pivot
    x = [0.0] * n
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x)


@dataclass
class FullTrajectory:
    times: np.ndarray
    states: np.ndarray  # (num_steps + 1, num_intervals + 1)
    newton_iterations: np.ndarray

    def write_csv(self, path):
        n = self.states.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"x{i}" for i in range(n)])
            for t, row in zip(self.times, self.states):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in row])


class FullModel:
    """Mesh, assembled forms and time grid for one configuration."""

    def __init__(self, config):
        self.config = config
        self.space = build_space(config.num_intervals)
        self.forms = assemble_forms(self.space, config.penalty)
        # parameter-independent part of the Newton matrix, without the viscous term
        self.base = self.forms.mass.scaled(1 / config.dt) + self.forms.boundary_penalty
        self.sin_fS = [interpolate(self.space, lambda x, w=w: np.sin(w * x)) for w in config.freq.omega_fS]

    def load(self, mu, t):
        """Nodal vector of l_pi(phi_i, t) + b0(t) beta0(phi_i) + b1(t) beta1(phi_i)."""
        f = np.full(self.space.dim, mu.f_m)
        for weight, mode in zip(mu.source_weights(t), self.sin_fS):
            f += weight * mode
        rhs = self.forms.mass.matvec(f)
        rhs[0] += self.forms.penalty * mu.b0(t)
        rhs[-1] += self.forms.penalty * mu.b1(t)
        return rhs


def linearized_system(model, guess, nu):
    """Newton matrix M/dt + nu A + B + 2 C(guess) and the operator part of the residual."""
    conv = convection_matrix(model.space, guess)
    lin = model.base + model.forms.stiffness.scaled(nu)
    jac = lin + conv.scaled(2.0)
    applied = lin.matvec(guess) + conv.matvec(guess)
    return jac, applied


def newton_step_full(model, guess, prev, mu, t_k):
    """One Newton increment for the implicit step from ``prev`` to time ``t_k``."""
    model.space.check(guess, prev)
    jac, applied = linearized_system(model, guess, mu.nu)
    rhs = model.forms.mass.matvec(prev) / model.config.dt + model.load(mu, t_k)
    try:
        delta = thomas_solve(jac, rhs - applied)
    except SingularSystemError as exc:
        raise NewtonBreakdownError(str(exc)) from exc
    return delta, guess + delta


def solve_full(config, mu, model=None):
    model = model or FullModel(config)
    times = np.array(config.times())
    states = np.empty((len(times), model.space.dim))
    iterations = np.zeros(len(times), dtype=int)
    states[0] = interpolate(model.space, mu.u0)
    for k in range(1, len(times)):
        prev = states[k - 1]
        u = prev
        for it in range(1, config.newton_cap + 1):
            delta, u = newton_step_full(model, u, prev, mu, times[k])
            if np.dot(delta, delta) <= config.newton_tol:
                break
        else:
            raise NonConvergenceError(k, config.newton_cap)
        states[k] = u
        iterations[k] = it
    return FullTrajectory(times, states, iterations)


def boundary_error_indicator(traj, mu):
    left = np.abs(traj.states[:, 0] - mu.b0(traj.times))
    right = np.abs(traj.states[:, -1] - mu.b1(traj.times))
    return float(np.max(np.maximum(left, right)))
