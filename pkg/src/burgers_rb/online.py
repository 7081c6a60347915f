"""Online reduced solve.

Everything here reads only the N-sized arrays of a reduced model; the nodal
basis is touched solely by :func:`reconstruct`, which is a diagnostic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import CompatibilityError, NewtonBreakdownError, NonConvergenceError


@dataclass
class ReducedTrajectory:
    times: np.ndarray
    coeffs: np.ndarray  # (num_steps + 1, N)
    newton_iterations: np.ndarray

    def norms(self):
        return np.linalg.norm(self.coeffs, axis=1)


def check_compatible(model, mu):
    if mu.freq != model.freq:
        raise CompatibilityError("parameter point and reduced model use different frequency structures")


def reduced_initial(model, mu):
    check_compatible(model, mu)
    t = model.tensors
    return mu.u0m * t.proj_one + mu.amp_u0 @ t.proj_u0sin


def assemble_load(model, mu, k):
    """l_pi(zeta_i, t_k) from the stored integrals."""
    t = model.tensors
    return mu.f_m * t.red_int + mu.source_weights(k * model.dt) @ t.red_fsin


def _right_hand_sides(model, mu):
    """Rows k = 0..T of the load, and the boundary data b0(t_k), b1(t_k)."""
    t = model.tensors
    times = np.arange(model.num_steps + 1) * model.dt
    weights = np.sin(np.multiply.outer(times, np.asarray(mu.freq.omega_fT, dtype=float))) @ mu.amp_f
    load = mu.f_m * t.red_int + weights @ t.red_fsin
    return times, load, np.asarray(mu.b0(times), dtype=float), np.asarray(mu.b1(times), dtype=float)


def _linear_part(model, mu):
    """Mass/dt plus diffusion; the penalty block is kept apart (see :func:`_residual`)."""
    t = model.tensors
    return t.red_mass / model.dt + mu.nu * t.red_stiff


def _tri_flat(model):
    # [j', i, j] = c(zeta_j', zeta_j, zeta_i), flattened so g @ flat gives C(g)[i, j]
    t = model.tensors
    n = t.red_tri.shape[0]
    return np.ascontiguousarray(t.red_tri.transpose(0, 2, 1)).reshape(n, n * n)


def _residual(lin, conv, g, rhs, P, zl, zr, b0, b1):
    # penalty written as P zeta(0) (u(0) - b0): the 1e7 factor multiplies a small
    # boundary mismatch instead of amplifying rounding in every direction
    return (lin + conv) @ g - rhs + P * (zl @ g - b0) * zl + P * (zr @ g - b1) * zr


def online_newton_step(model, mu, guess, prev, k):
    check_compatible(model, mu)
    n = len(guess)
    t = model.tensors
    lin = _linear_part(model, mu)
    conv = (guess @ _tri_flat(model)).reshape(n, n)
    time = k * model.dt
    rhs = (t.red_mass @ prev) / model.dt + assemble_load(model, mu, k)
    residual = _residual(lin, conv, guess, rhs, model.penalty, t.zeta_left, t.zeta_right,
                         mu.b0(time), mu.b1(time))
    try:
        return np.linalg.solve(lin + t.red_bpen + 2 * conv, -residual)
    except np.linalg.LinAlgError as exc:
        raise NewtonBreakdownError(f"singular reduced Newton system at step {k}") from exc


def reduced_newton_matrix(model, mu, guess):
    n = len(guess)
    return _linear_part(model, mu) + model.tensors.red_bpen + 2 * (guess @ _tri_flat(model)).reshape(n, n)


def march(model, mu):
    """Yield ``(k, coeffs, newton_iterations)`` for k = 0..T."""
    u = reduced_initial(model, mu)
    n = len(u)
    t = model.tensors
    lin = _linear_part(model, mu)
    tri = _tri_flat(model)
    mass_dt = t.red_mass / model.dt
    _, load, b0, b1 = _right_hand_sides(model, mu)
    tol, cap, P = model.newton_tol, model.newton_cap, model.penalty
    yield 0, u, 0
    for k in range(1, model.num_steps + 1):
        rhs = mass_dt @ u + load[k]
        g = u
        for it in range(1, cap + 1):
            conv = (g @ tri).reshape(n, n)
            residual = _residual(lin, conv, g, rhs, P, t.zeta_left, t.zeta_right, b0[k], b1[k])
            try:
                delta = np.linalg.solve(lin + t.red_bpen + 2 * conv, -residual)
            except np.linalg.LinAlgError as exc:
                raise NewtonBreakdownError(f"singular reduced Newton system at step {k}") from exc
            g = g + delta
            if delta @ delta <= tol:
                break
        else:
            raise NonConvergenceError(k, cap)
        u = g
        yield k, u, it


@numba.njit(cache=True)
def _solve_dense(A, b):
    """Gaussian elimination with partial pivoting; returns (x, ok)."""
    n = b.shape[0]
    M = A.copy()
    x = b.copy()
    for c in range(n):
        p = c
        for r in range(c + 1, n):
            if abs(M[r, c]) > abs(M[p, c]):
                p = r
        if M[p, c] == 0.0:
            return x, False
        if p != c:
            for j in range(n):
                M[c, j], M[p, j] = M[p, j], M[c, j]
            x[c], x[p] = x[p], x[c]
        for r in range(c + 1, n):
            f = M[r, c] / M[c, c]
            if f != 0.0:
                for j in range(c, n):
                    M[r, j] -= f * M[c, j]
                x[r] -= f * x[c]
    for c in range(n - 1, -1, -1):
        acc = x[c]
        for j in range(c + 1, n):
            acc -= M[c, j] * x[j]
        x[c] = acc / M[c, c]
    return x, True


@numba.njit(cache=True)
def _march_kernel(u0, lin, bpen, tri, mass_dt, load, P, zl, zr, b0, b1, tol, cap):
    """Compiled twin of :func:`march`.  status: 0 ok, 1 no convergence, 2 singular."""
    n = u0.shape[0]
    steps = load.shape[0]
    U = np.zeros((steps, n))
    its = np.zeros(steps, dtype=np.int64)
    U[0] = u0
    for k in range(1, steps):
        rhs = mass_dt @ U[k - 1] + load[k]
        g = U[k - 1].copy()
        done = False
        for it in range(1, cap + 1):
            conv = (g @ tri).reshape(n, n)
            residual = (lin + conv) @ g - rhs + P * (zl @ g - b0[k]) * zl + P * (zr @ g - b1[k]) * zr
            delta, ok = _solve_dense(lin + bpen + 2.0 * conv, -residual)
            if not ok:
                return U, its, 2, k
            g = g + delta
            if delta @ delta <= tol:
                its[k] = it
                done = True
                break
        if not done:
            return U, its, 1, k
        U[k] = g
    return U, its, 0, 0


def solve_reduced(model, mu):
    u0 = reduced_initial(model, mu)
    t = model.tensors
    times, load, b0, b1 = _right_hand_sides(model, mu)
    U, its, status, k = _march_kernel(
        np.ascontiguousarray(u0, dtype=float), _linear_part(model, mu), np.ascontiguousarray(t.red_bpen),
        _tri_flat(model), t.red_mass / model.dt, np.ascontiguousarray(load), float(model.penalty),
        np.ascontiguousarray(t.zeta_left), np.ascontiguousarray(t.zeta_right), b0, b1,
        model.newton_tol, model.newton_cap,
    )
    if status == 1:
        raise NonConvergenceError(int(k), model.newton_cap)
    if status == 2:
        raise NewtonBreakdownError(f"singular reduced Newton system at step {k}")
    return ReducedTrajectory(times, U, its)


def reconstruct(model, coeffs):
    """Nodal values of sum_j coeffs[j] zeta_j (works row-wise on 2-D input)."""
    if model.basis is None:
        raise CompatibilityError("this model view carries no nodal basis")
    return np.asarray(coeffs) @ model.basis.vectors.T
