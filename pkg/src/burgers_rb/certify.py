"""Online L2 error bound for the reduced solution.

The bound at step k is the largest root of the quadratic inequality
``A ||e||^2 - B ||e|| - gamma <= 0`` satisfied by the error, with every
uncomputable ingredient replaced by a certified surrogate.  The residual
dual norm over X0 and the initial error norm are evaluated through Gram
matrices assembled offline.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import CertificationUnavailableError
from .fem import trilinear_tensor
from .online import ReducedTrajectory, solve_reduced
from .scm import scm_lower_many, scm_upper_many


@dataclass
class InitialErrorGram:
    H: np.ndarray


@dataclass
class ResidualGram:
    G: np.ndarray
    n_fS: int
    size: int  # reduced basis size N
    factor: np.ndarray | None = None  # square R with R^T R = G; ||R rho|| avoids cancellation

    def norms(self, rho):
        """sqrt(rho^T G rho) for each row of ``rho``."""
        rho = np.atleast_2d(rho)
        if self.factor is not None:
            return np.linalg.norm(rho @ self.factor.T, axis=1)
        return np.sqrt(np.maximum(np.einsum("qi,ij,qj->q", rho, self.G, rho), 0.0))


@dataclass
class BoundState:
    k: int
    eps: float
    c_inf: float
    c_sup: float
    a_inf: float
    a_sup: float
    b_sup: float
    gamma_sup: float
    d_sup: float
    r_norm: float
    eta: float
    sigma_sup: float
    f_k: float
    e_left: float
    e_right: float
    r_left: float
    r_right: float


@dataclass
class CertifiedSolution:
    trajectory: ReducedTrajectory
    eps0: float
    bounds: np.ndarray  # (num_steps + 1,), bounds[0] = eps0
    diagnostics: list = field(default_factory=list)

    def relative_bounds(self):
        norms = self.trajectory.norms()
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.bounds / norms

    def write_csv(self, path, actual_errors=None):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            header = ["k", "t", "eps_k"]
            if actual_errors is not None:
                header.append("actual_error")
            n = self.trajectory.coeffs.shape[1]
            header += ["C_inf", "C_sup", "r_norm"] + [f"coeff_{j + 1}" for j in range(n)]
            w.writerow(header)
            rows = [None] + list(self.diagnostics)
            for k, (t, eps, coeffs) in enumerate(zip(self.trajectory.times, self.bounds,
                                                     self.trajectory.coeffs)):
                row = [k, repr(float(t)), repr(float(eps))]
                if actual_errors is not None:
                    row.append(repr(float(actual_errors[k])))
                d = rows[k]
                row += ["", "", ""] if d is None else [repr(d.c_inf), repr(d.c_sup), repr(d.r_norm)]
                row += [repr(float(c)) for c in coeffs]
                w.writerow(row)


# ---------------------------------------------------------------- offline

def residual_functionals(basis_vectors, space, forms, sin_fS, tests):
    """Values of every residual ingredient on each test vector (columns of ``tests``).

    Row order matches :func:`residual_vector`: integral, source modes,
    mass against zeta_j, c(zeta_j, zeta_j', .) row-major, a(zeta_j, .).
    """
    Z = basis_vectors
    V = np.asarray(tests, dtype=float)
    MV = np.column_stack([forms.mass.matvec(v) for v in V.T])
    AV = np.column_stack([forms.stiffness.matvec(v) for v in V.T])
    n = Z.shape[1]
    blocks = [forms.hat_integrals @ V]
    blocks += [np.atleast_2d(s @ MV) for s in sin_fS]
    blocks += [Z.T @ MV]
    conv = trilinear_tensor(space, Z, Z, V)
    blocks += [(0.5 * (conv + conv.transpose(1, 0, 2))).reshape(n * n, V.shape[1])]
    blocks += [Z.T @ AV]
    return np.vstack([np.atleast_2d(b) for b in blocks])


def build_residual_gram(basis_vectors, space, forms, sin_fS):
    """Gram matrix of the Riesz representers in X0 of the residual ingredients."""
    interior = np.eye(space.dim)[:, 1:-1]
    F = residual_functionals(basis_vectors, space, forms, sin_fS, interior)
    chol = scipy.linalg.cholesky(forms.interior_mass(), lower=True)
    B = scipy.linalg.solve_triangular(chol, F.T, lower=True)  # G = B^T B
    G = B.T @ B
    R = scipy.linalg.qr(B, mode="r")[0]
    factor = np.zeros((F.shape[0], F.shape[0]))
    factor[:R.shape[0]] = R[:F.shape[0]]
    return ResidualGram(0.5 * (G + G.T), len(sin_fS), basis_vectors.shape[1], factor)


def build_initial_gram(basis_vectors, space, forms, sin_u0):
    family = [np.ones(space.dim)] + list(sin_u0)
    D = []
    for v in family:
        coeffs = basis_vectors.T @ forms.mass.matvec(v)
        D.append(v - basis_vectors @ coeffs)
    D = np.column_stack(D)
    MD = np.column_stack([forms.mass.matvec(d) for d in D.T])
    H = D.T @ MD
    return InitialErrorGram(0.5 * (H + H.T))


# ---------------------------------------------------------------- online

def initial_error_norm(gram, mu):
    e0 = np.concatenate([[mu.u0m], mu.amp_u0])
    return float(np.sqrt(max(e0 @ gram.H @ e0, 0.0)))


def residual_vector(mu, t, coeffs, prev, dt):
    u = np.asarray(coeffs)
    return np.concatenate([
        [mu.f_m], mu.source_weights(t), -(u - prev) / dt, -np.outer(u, u).ravel(), -mu.nu * u,
    ])


def residual_vectors(mu, times, U, Uprev, dt):
    """Row q is :func:`residual_vector` at ``times[q]``."""
    U, Uprev = np.atleast_2d(U), np.atleast_2d(Uprev)
    weights = np.sin(np.multiply.outer(np.asarray(times, dtype=float),
                                       np.asarray(mu.freq.omega_fT, dtype=float))) @ mu.amp_f
    weights = weights.reshape(len(U), -1)
    quad = np.einsum("qi,qj->qij", U, U).reshape(len(U), -1)
    return np.hstack([np.full((len(U), 1), mu.f_m), weights, -(U - Uprev) / dt, -quad, -mu.nu * U])


def residual_zero_norm(gram, mu, t, coeffs, prev, dt):
    return float(gram.norms(residual_vector(mu, t, coeffs, prev, dt))[0])


def _ingredients(model, mu, ks, U, Uprev, c_inf, c_sup):
    """Every per-step quantity that does not depend on the propagated bound."""
    t = model.tensors
    dt, P = model.dt, model.penalty
    times = np.asarray(ks, dtype=float) * dt
    rho = residual_vectors(mu, times, U, Uprev, dt)
    r_norm = model.residual_gram.norms(rho)

    # truth hypothesis: the reference solution meets the boundary data exactly
    e0 = mu.b0(times) - U @ t.zeta_left
    e1 = mu.b1(times) - U @ t.zeta_right
    r_bnd = rho @ t.resid_boundary.T
    r_left = r_bnd[:, 0] + P * e0
    r_right = r_bnd[:, 1] + P * e1

    # psi(phi_a, phi_b) for (1,0), (0,1), (N-1,N), (N,N-1), (0,0), (N,N)
    psi = 2.0 * (U @ t.c_phi) + mu.nu * t.a_phi
    eta = np.abs(e0) * t.hat_norm_left + np.abs(e1) * t.hat_norm_right
    f_k = t.continuity_E * (np.abs(e0) * np.abs(psi[:, 0] + psi[:, 1])
                            + np.abs(e1) * np.abs(psi[:, 2] + psi[:, 3]))

    c_inf = np.asarray(c_inf, dtype=float)
    c_sup = np.asarray(c_sup, dtype=float)
    a_inf = 1.0 / dt + c_inf
    a_sup = 1.0 / dt + c_sup
    sigma_sup = 2.0 * eta * np.maximum(np.abs(c_sup), np.abs(c_inf))
    gamma_sup = (
        -e0**2 * psi[:, 4] - e1**2 * psi[:, 5] - c_inf * eta**2 + eta * f_k + eta * r_norm
        + e0 * r_left + e1 * r_right - P * (e0**2 + e1**2) + (e1**3 - e0**3) / 6.0
    )
    return dict(k=np.asarray(ks), c_inf=c_inf, c_sup=c_sup, a_inf=a_inf, a_sup=a_sup,
                gamma_sup=gamma_sup, r_norm=r_norm, eta=eta, sigma_sup=sigma_sup, f_k=f_k,
                e_left=e0, e_right=e1, r_left=r_left, r_right=r_right)


def _close_step(ing, q, eps_prev, dt):
    """Largest root of the step-q quadratic given the previous bound."""
    k = int(ing["k"][q])
    a_inf, a_sup, gamma = ing["a_inf"][q], ing["a_sup"][q], ing["gamma_sup"][q]
    if a_inf <= 0:
        raise CertificationUnavailableError(k, float(a_inf))
    b_sup = eps_prev / dt + ing["sigma_sup"][q] + ing["f_k"][q] + ing["r_norm"][q]
    d_sup = b_sup**2 + 4.0 * (a_sup if gamma >= 0 else a_inf) * gamma
    if d_sup >= 0:
        eps = (b_sup + np.sqrt(d_sup)) / (2.0 * a_inf)
    else:
        eps = b_sup / a_inf
    return float(eps), float(b_sup), float(d_sup)


def _state(ing, q, eps, b_sup, d_sup):
    fields = ("c_inf", "c_sup", "a_inf", "a_sup")
    tail = ("r_norm", "eta", "sigma_sup", "f_k", "e_left", "e_right", "r_left", "r_right")
    return BoundState(int(ing["k"][q]), eps, *(float(ing[f][q]) for f in fields), b_sup,
                      float(ing["gamma_sup"][q]), d_sup, *(float(ing[f][q]) for f in tail))


def certified_bound_step(model, mu, k, eps_prev, coeffs, prev, c_inf, c_sup):
    ing = _ingredients(model, mu, [k], np.asarray(coeffs, dtype=float)[None, :],
                       np.asarray(prev, dtype=float)[None, :], [c_inf], [c_sup])
    eps, b_sup, d_sup = _close_step(ing, 0, eps_prev, model.dt)
    return _state(ing, 0, eps, b_sup, d_sup)


def certify_coefficients(model, mu, coeffs, stability=None, diagnostics=True):
    """Bound sequence for a reduced trajectory ``coeffs`` (rows k = 0..T)."""
    coeffs = np.asarray(coeffs, dtype=float)
    ks = np.arange(1, len(coeffs))
    U, Uprev = coeffs[1:], coeffs[:-1]
    if stability is None:
        c_inf = scm_lower_many(model.scm, mu, ks, U)
        c_sup = scm_upper_many(model.scm, mu, U)
    else:
        pairs = np.array([stability(k, u) for k, u in zip(ks, U)]).reshape(-1, 2)
        c_inf, c_sup = pairs[:, 0], pairs[:, 1]
    ing = _ingredients(model, mu, ks, U, Uprev, c_inf, c_sup)
    eps = initial_error_norm(model.initial_gram, mu)
    bounds, diags = [eps], []
    for q in range(len(ks)):
        eps, b_sup, d_sup = _close_step(ing, q, eps, model.dt)
        bounds.append(eps)
        if diagnostics:
            diags.append(_state(ing, q, eps, b_sup, d_sup))
    return np.array(bounds), diags


def local_bounds(model, mu, coeffs, c_inf, c_sup):
    """Per-step bound with the propagated error switched off (entry 0 is the initial error)."""
    coeffs = np.asarray(coeffs, dtype=float)
    ks = np.arange(1, len(coeffs))
    ing = _ingredients(model, mu, ks, coeffs[1:], coeffs[:-1], c_inf, c_sup)
    out = [initial_error_norm(model.initial_gram, mu)]
    out += [_close_step(ing, q, 0.0, model.dt)[0] for q in range(len(ks))]
    return np.array(out)


def certify_trajectory(model, mu, stability=None, diagnostics=True):
    """Reduced solve followed by the step-by-step bound recursion.

    ``stability(k, coeffs) -> (c_inf, c_sup)`` overrides the SCM bounds.
    """
    traj = solve_reduced(model, mu)
    bounds, diags = certify_coefficients(model, mu, traj.coeffs, stability, diagnostics)
    return CertifiedSolution(traj, float(bounds[0]), bounds, diags)
