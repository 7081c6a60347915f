"""Successive constraints bounds on the stability constant.

The stability constant at a reduced state ``u`` and viscosity ``nu`` is

    C = inf over v in X0, ||v|| = 1, of  2 sum_j u_j c(zeta_j, v, v) + nu a(v, v),

i.e. a linear objective ``J(y) = (2u, nu) . y`` over the image set of
``v -> (c(zeta_1, v, v), ..., c(zeta_N, v, v), a(v, v))``.  The lower bound
relaxes that set to a box cut by the exact values at nearby trained points;
the upper bound evaluates ``J`` at the stored minimizers.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numba
import numpy as np
import scipy.linalg

from .errors import BurgersRBError, InfeasibleLPError
from .fem import convection_matrix, trilinear_tensor

log = logging.getLogger(__name__)


# ---------------------------------------------------------------- eigensolves

def _interior_form(space, forms, u_nodal, nu):
    conv = convection_matrix(space, u_nodal).todense()[1:-1, 1:-1]
    return nu * forms.interior_stiffness() + conv + conv.T


def exact_stability(space, forms, u_tilde, nu, return_vector=False):
    """Smallest generalized eigenvalue of (nu A + C + C^T, M) on X0."""
    sym = _interior_form(space, forms, u_tilde, nu)
    vals, vecs = scipy.linalg.eigh(sym, forms.interior_mass(), subset_by_index=[0, 0])
    if not return_vector:
        return float(vals[0])
    w = np.zeros(space.dim)
    w[1:-1] = vecs[:, 0]
    w /= np.sqrt(w[1:-1] @ forms.interior_mass() @ w[1:-1])
    return float(vals[0]), w


def sigma_bounds(basis_vectors, space, forms):
    """Extreme Rayleigh quotients of c(zeta_i, v, v) and a(v, v) over unit v in X0."""
    m0 = forms.interior_mass()
    n = basis_vectors.shape[1]
    lo, hi = np.empty(n + 1), np.empty(n + 1)
    for i in range(n):
        conv = convection_matrix(space, basis_vectors[:, i]).todense()[1:-1, 1:-1]
        vals = scipy.linalg.eigh(0.5 * (conv + conv.T), m0, eigvals_only=True)
        lo[i], hi[i] = vals[0], vals[-1]
    vals = scipy.linalg.eigh(forms.interior_stiffness(), m0, eigvals_only=True)
    lo[n], hi[n] = vals[0], vals[-1]
    return lo, hi


def y_of(basis_vectors, space, forms, w):
    """(c(zeta_1, w, w), ..., c(zeta_N, w, w), a(w, w))."""
    cvals = trilinear_tensor(space, basis_vectors, w, w)[:, 0, 0]
    return np.append(cvals, w @ forms.stiffness.matvec(w))


# ---------------------------------------------------------------- simplex

@dataclass
class LinearProgram:
    """minimize objective . y  subject to lower <= y <= upper and rows @ y >= bounds."""

    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    rows: np.ndarray
    bounds: np.ndarray


@numba.njit(cache=True)
def _pivot(T, basis, r, c):
    T[r, :] /= T[r, c]
    for i in range(T.shape[0]):
        if i != r:
            f = T[i, c]
            if f != 0.0:
                T[i, :] -= f * T[r, :]
    basis[r] = c


@numba.njit(cache=True)
def _iterate(T, basis, ncols, eps):
    """Bland-rule primal simplex on a tableau whose last row holds reduced costs."""
    nrows = T.shape[0] - 1
    rhs = T.shape[1] - 1
    for _ in range(10000):
        enter = -1
        for j in range(ncols):
            if T[nrows, j] < -eps:
                enter = j
                break
        if enter < 0:
            return 0
        leave = -1
        best = np.inf
        for i in range(nrows):
            a = T[i, enter]
            if a > eps:
                ratio = T[i, rhs] / a
                if ratio < best - 1e-14 or (abs(ratio - best) <= 1e-14 and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return 2  # unbounded
        _pivot(T, basis, leave, enter)
    return 1


@numba.njit(cache=True)
def _phase_one(G, h, n, eps):
    """Feasible starting tableau for 0 <= z <= 1, G z >= h (objective row left empty)."""
    m = G.shape[0]
    need_art = np.zeros(m, dtype=np.bool_)
    for r in range(m):
        need_art[r] = h[r] > 0.0
    nart = int(need_art.sum())
    nrows = n + m
    ncols = 2 * n + m + nart
    T = np.zeros((nrows + 1, ncols + 1))
    basis = np.empty(nrows, dtype=np.int64)
    rhs = ncols
    for i in range(n):
        T[i, i] = 1.0
        T[i, n + i] = 1.0
        T[i, rhs] = 1.0
        basis[i] = n + i
    a = 0
    for r in range(m):
        row = n + r
        if need_art[r]:
            for j in range(n):
                T[row, j] = G[r, j]
            T[row, 2 * n + r] = -1.0
            T[row, 2 * n + m + a] = 1.0
            T[row, rhs] = h[r]
            basis[row] = 2 * n + m + a
            a += 1
        else:
            for j in range(n):
                T[row, j] = -G[r, j]
            T[row, 2 * n + r] = 1.0
            T[row, rhs] = -h[r]
            basis[row] = 2 * n + r
    infeas = 0.0
    status = 0
    if nart > 0:
        for row in range(nrows):
            if basis[row] >= 2 * n + m:
                T[nrows, :] -= T[row, :]
        status = _iterate(T, basis, 2 * n + m, eps)
        if status != 0:
            return T, basis, status, np.inf
        infeas = -T[nrows, rhs]
        # drive zero-level artificials out of the basis where possible
        for row in range(nrows):
            if basis[row] >= 2 * n + m:
                for j in range(2 * n + m):
                    if abs(T[row, j]) > 1e-9:
                        _pivot(T, basis, row, j)
                        break
    return T, basis, status, infeas


@numba.njit(cache=True)
def _phase_two(T0, basis0, c, m, eps):
    n = c.shape[0]
    T = T0.copy()
    basis = basis0.copy()
    nrows = T.shape[0] - 1
    rhs = T.shape[1] - 1
    T[nrows, :] = 0.0
    for j in range(n):
        T[nrows, j] = c[j]
    for row in range(nrows):
        b = basis[row]
        if b < n and c[b] != 0.0:
            T[nrows, :] -= c[b] * T[row, :]
    for j in range(2 * n + m, rhs):
        T[nrows, j] = 0.0
    status = _iterate(T, basis, 2 * n + m, eps)
    z = np.zeros(n)
    for row in range(nrows):
        if basis[row] < n:
            z[basis[row]] = T[row, rhs]
    for j in range(n):
        z[j] = min(max(z[j], 0.0), 1.0)
    return status, z


@numba.njit(cache=True)
def _simplex_unit_box(C, G, h, eps):
    """min C[q].z over 0 <= z <= 1, G z >= h for every row q of C.

    Phase one is shared.  Returns (status, Z, phase-1 infeasibility).
    """
    n = C.shape[1]
    T, basis, status, infeas = _phase_one(G, h, n, eps)
    Z = np.zeros(C.shape)
    if status != 0:
        return status, Z, infeas
    for q in range(C.shape[0]):
        st, z = _phase_two(T, basis, C[q], G.shape[0], eps)
        if st != 0:
            return st, Z, infeas
        Z[q] = z
    return 0, Z, infeas


def simplex_solve(lp, feas_tol=1e-8):
    """Minimize over a box cut by ``rows @ y >= bounds``.

    ``lp.objective`` may be 2-D (one objective per row); the feasible set is
    shared, so phase one runs once.  Returns (minimizers, values), 1-D/scalar
    for a single objective.
    """
    c = np.asarray(lp.objective, dtype=float)
    single = c.ndim == 1
    C = np.atleast_2d(c)
    lo = np.asarray(lp.lower, dtype=float)
    hi = np.asarray(lp.upper, dtype=float)
    G = np.asarray(lp.rows, dtype=float).reshape(-1, lo.size)
    h = np.asarray(lp.bounds, dtype=float).reshape(-1)
    if np.any(hi < lo):
        raise InfeasibleLPError("empty box")
    span = hi - lo
    free = span > 0
    # fixed coordinates are substituted; the rest rescaled to [0, 1]
    h_shift = h - G @ lo
    Gs = G[:, free] * span[free]
    scale = np.maximum(np.abs(Gs).max(axis=1) if Gs.size else np.zeros(len(h)), np.abs(h_shift))
    scale[scale == 0] = 1.0
    Gs, hs = Gs / scale[:, None], h_shift / scale
    Y = np.repeat(lo[None, :], C.shape[0], axis=0)
    if not free.any():
        if np.any(hs > feas_tol):
            raise InfeasibleLPError("fixed point violates constraints")
    else:
        Cs = np.ascontiguousarray(C[:, free] * span[free])
        status, Z, infeas = _simplex_unit_box(Cs, np.ascontiguousarray(Gs), hs, 1e-12)
        if status != 0 or infeas > feas_tol:
            raise InfeasibleLPError(f"LP infeasible (status {status}, infeasibility {infeas:.3e})")
        Y[:, free] += Z * span[free]
    values = np.einsum("qi,qi->q", C, Y)
    if single:
        return Y[0], float(values[0])
    return Y, values


def box_minimum(objective, lower, upper):
    return float(np.minimum(objective * lower, objective * upper).sum())


# ---------------------------------------------------------------- SCM data

@dataclass
class SCMData:
    sigma_min: np.ndarray
    sigma_max: np.ndarray
    coords: np.ndarray  # (I, dim P) coordinates of the trained parameters
    steps: np.ndarray  # (I,)
    coefs: np.ndarray  # (I, N + 1): (2 u^{k'}(mu'), nu')
    values: np.ndarray  # (I,) exact C_{k'}(mu')
    y_star: np.ndarray  # (I, N + 1)
    nearest_count: int
    spans: np.ndarray  # (dim P,) coordinate ranges for the metric
    num_steps: int

    @property
    def size(self):
        return len(self.values)


def objective_coefficients(mu, coeffs):
    return np.append(2.0 * np.asarray(coeffs, dtype=float), mu.nu)


def metric_distance(coords1, k1, coords2, k2, spans, num_steps):
    """Squared normalized distance; zero-span coordinates contribute nothing."""
    spans = np.asarray(spans, dtype=float)
    diff = np.asarray(coords1, dtype=float) - np.asarray(coords2, dtype=float)
    safe = np.where(spans > 0, spans, 1.0)
    terms = np.where(spans > 0, diff / safe, 0.0)
    return np.sum(terms**2, axis=-1) + ((np.asarray(k1) - np.asarray(k2)) / num_steps) ** 2


def nearest_constraints(scm, coords, k):
    if scm.nearest_count >= scm.size:
        return np.arange(scm.size)
    if scm.nearest_count <= 0:
        return np.arange(0)
    d = metric_distance(scm.coords, scm.steps, coords, k, scm.spans, scm.num_steps)
    return np.argsort(d, kind="stable")[: scm.nearest_count]


def scm_lower_from(scm, objective, coords, k):
    idx = nearest_constraints(scm, coords, k)
    if idx.size == 0:
        return box_minimum(objective, scm.sigma_min, scm.sigma_max)
    lp = LinearProgram(objective, scm.sigma_min, scm.sigma_max, scm.coefs[idx], scm.values[idx])
    try:
        return simplex_solve(lp)[1]
    except InfeasibleLPError as exc:
        raise BurgersRBError(f"SCM data inconsistent: {exc}") from exc


def scm_lower(scm, mu, k, coeffs):
    return scm_lower_from(scm, objective_coefficients(mu, coeffs), mu.coordinates(), k)


def scm_lower_batch(scm, objectives, coords, ks):
    """Lower bounds for many queries; queries sharing a nearest-constraint set share one LP setup.

    ``coords`` is one coordinate vector per query, or a single vector used for all.
    """
    objectives = np.atleast_2d(np.asarray(objectives, dtype=float))
    ks = np.asarray(ks)
    coords = np.asarray(coords, dtype=float)
    out = np.empty(len(objectives))
    if scm.size == 0 or scm.nearest_count <= 0:
        for q, obj in enumerate(objectives):
            out[q] = box_minimum(obj, scm.sigma_min, scm.sigma_max)
        return out
    if scm.nearest_count >= scm.size:
        groups = {tuple(range(scm.size)): list(range(len(objectives)))}
    else:
        groups = {}
        for q, k in enumerate(ks):
            c = coords if coords.ndim == 1 else coords[q]
            groups.setdefault(tuple(nearest_constraints(scm, c, k)), []).append(q)
    for idx, members in groups.items():
        idx, members = list(idx), np.asarray(members)
        lp = LinearProgram(objectives[members], scm.sigma_min, scm.sigma_max,
                           scm.coefs[idx], scm.values[idx])
        try:
            out[members] = simplex_solve(lp)[1]
        except InfeasibleLPError as exc:
            raise BurgersRBError(f"SCM data inconsistent: {exc}") from exc
    return out


def trajectory_objectives(mu, coeffs):
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    return np.column_stack([2.0 * coeffs, np.full(len(coeffs), mu.nu)])


def scm_lower_many(scm, mu, ks, coeffs):
    return scm_lower_batch(scm, trajectory_objectives(mu, coeffs), mu.coordinates(), ks)


def scm_upper_many(scm, mu, coeffs):
    if scm.size == 0:
        raise BurgersRBError("SCM upper bound needs at least one trained constraint")
    return np.min(trajectory_objectives(mu, coeffs) @ scm.y_star.T, axis=1)


def scm_upper(scm, mu, k, coeffs):
    if scm.size == 0:
        raise BurgersRBError("SCM upper bound needs at least one trained constraint")
    return float(np.min(scm.y_star @ objective_coefficients(mu, coeffs)))


def sharpness(c_inf, c_sup):
    """(exp(C_sup) - exp(C_inf)) / exp(C_sup), written to avoid overflow."""
    return -np.expm1(np.minimum(np.asarray(c_inf) - np.asarray(c_sup), 0.0))


@dataclass
class Candidate:
    mu: object
    k: int
    coeffs: np.ndarray


def scm_train(basis_vectors, space, forms, candidates, spans, num_steps,
              nearest=10, max_constraints=10, tolerance=1e-3, seed=0, sigma=None):
    """Greedy constraint selection over ``candidates`` (a list of :class:`Candidate`)."""
    if not candidates:
        raise BurgersRBError("SCM training needs a nonempty candidate set")
    rng = np.random.default_rng(seed)
    lo, hi = sigma if sigma is not None else sigma_bounds(basis_vectors, space, forms)
    n = basis_vectors.shape[1]
    objectives = np.array([objective_coefficients(c.mu, c.coeffs) for c in candidates])
    coords = np.array([c.mu.coordinates() for c in candidates])
    steps = np.array([c.k for c in candidates])
    scm = SCMData(lo, hi, np.empty((0, coords.shape[1])), np.empty(0, dtype=int),
                  np.empty((0, n + 1)), np.empty(0), np.empty((0, n + 1)),
                  int(nearest), np.asarray(spans, dtype=float), int(num_steps))
    chosen = []
    history = []

    def add(i):
        cand = candidates[i]
        u_nodal = basis_vectors @ cand.coeffs
        value, w = exact_stability(space, forms, u_nodal, cand.mu.nu, return_vector=True)
        scm.coords = np.vstack([scm.coords, coords[i]])
        scm.steps = np.append(scm.steps, steps[i])
        scm.coefs = np.vstack([scm.coefs, objectives[i]])
        scm.values = np.append(scm.values, value)
        scm.y_star = np.vstack([scm.y_star, y_of(basis_vectors, space, forms, w)])
        chosen.append(i)

    add(int(rng.integers(len(candidates))))
    while scm.size < max_constraints:
        c_inf = scm_lower_batch(scm, objectives, coords, steps)
        c_sup = np.min(objectives @ scm.y_star.T, axis=1)
        ind = sharpness(c_inf, c_sup)
        best = int(np.argmax(ind))
        history.append(float(ind[best]))
        log.debug("SCM size %d: max sharpness %.3e", scm.size, ind[best])
        if ind[best] < tolerance:
            break
        add(best)
    return scm, chosen, history
