"""P1 finite elements on a uniform mesh of [0, 1].

All integrals are evaluated in closed form element by element, so the
forms below carry no quadrature error for piecewise-polynomial integrands.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConformanceError, InvalidMeshError


@dataclass(frozen=True)
class Tridiagonal:
    """Band storage: ``lower[i] = A[i+1, i]``, ``upper[i] = A[i, i+1]``."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def __len__(self):
        return len(self.diag)

    def matvec(self, x):
        y = self.diag * x
        y[:-1] += self.upper * x[1:]
        y[1:] += self.lower * x[:-1]
        return y

    def todense(self):
        return np.diag(self.diag) + np.diag(self.upper, 1) + np.diag(self.lower, -1)

    def __add__(self, other):
        return Tridiagonal(self.lower + other.lower, self.diag + other.diag, self.upper + other.upper)

    def scaled(self, factor):
        return Tridiagonal(factor * self.lower, factor * self.diag, factor * self.upper)


@dataclass(frozen=True)
class FemSpace:
    num_intervals: int
    nodes: np.ndarray
    mesh_width: float

    @property
    def dim(self):
        return self.num_intervals + 1

    def check(self, *vectors):
        for v in vectors:
            if np.shape(v)[0] != self.dim:
                raise ConformanceError(f"expected length {self.dim}, got {np.shape(v)[0]}")


@dataclass(frozen=True)
class AssembledForms:
    mass: Tridiagonal
    stiffness: Tridiagonal
    penalty: float
    beta0: np.ndarray
    beta1: np.ndarray
    hat_integrals: np.ndarray

    @property
    def boundary_penalty(self):
        n = len(self.mass)
        d = np.zeros(n)
        d[0] = d[-1] = self.penalty
        return Tridiagonal(np.zeros(n - 1), d, np.zeros(n - 1))

    def mass_dense(self):
        return self.mass.todense()

    def stiffness_dense(self):
        return self.stiffness.todense()

    def interior_mass(self):
        return self.mass.todense()[1:-1, 1:-1]

    def interior_stiffness(self):
        return self.stiffness.todense()[1:-1, 1:-1]


def build_space(num_intervals):
    if int(num_intervals) != num_intervals or num_intervals < 2:
        raise InvalidMeshError(f"need at least 2 intervals, got {num_intervals}")
    n = int(num_intervals)
    return FemSpace(n, np.arange(n + 1) / n, 1.0 / n)


def assemble_forms(space, penalty):
    n, h = space.num_intervals, space.mesh_width
    mass_diag = np.full(n + 1, 2 * h / 3)
    mass_diag[[0, -1]] = h / 3
    stiff_diag = np.full(n + 1, 2 / h)
    stiff_diag[[0, -1]] = 1 / h
    off_m = np.full(n, h / 6)
    off_a = np.full(n, -1 / h)
    beta0 = np.zeros(n + 1)
    beta0[0] = penalty
    beta1 = np.zeros(n + 1)
    beta1[-1] = penalty
    hats = np.full(n + 1, h)
    hats[[0, -1]] = h / 2
    return AssembledForms(
        mass=Tridiagonal(off_m, mass_diag, off_m.copy()),
        stiffness=Tridiagonal(off_a, stiff_diag, off_a.copy()),
        penalty=float(penalty),
        beta0=beta0,
        beta1=beta1,
        hat_integrals=hats,
    )


def convection_matrix(space, w):
    """Bands of ``C(w)[i, j] = c(w, phi_j, phi_i)``.

    On an element with end nodes a < b, ``c(w, phi_j, phi_i)`` equals
    ``-s_i m_j / 12`` with slopes ``s_a = -1, s_b = +1`` and weights
    ``m_a = 2 w_a + w_b``, ``m_b = w_a + 2 w_b``.
    """
    space.check(w)
    wa, wb = w[:-1], w[1:]
    ma = (2 * wa + wb) / 12
    mb = (wa + 2 * wb) / 12
    diag = np.zeros(space.dim)
    diag[:-1] += ma
    diag[1:] -= mb
    return Tridiagonal(lower=-ma, diag=diag, upper=mb)


def trilinear_c(space, w, v, z):
    """c(w, v, z) = -1/2 * integral of w v z'."""
    space.check(w, v, z)
    dz = z[1:] - z[:-1]
    wv = 2 * w[:-1] * v[:-1] + w[:-1] * v[1:] + w[1:] * v[:-1] + 2 * w[1:] * v[1:]
    return -float(np.dot(wv, dz)) / 12


def trilinear_tensor(space, W, V, Z):
    """T[p, q, r] = c(W[:, p], V[:, q], Z[:, r]) for column families W, V, Z."""
    W, V, Z = (np.atleast_2d(np.asarray(a, dtype=float).T).T for a in (W, V, Z))
    space.check(W, V, Z)
    Wa, Wb, Va, Vb = W[:-1], W[1:], V[:-1], V[1:]
    dZ = Z[1:] - Z[:-1]
    T = (
        2 * np.einsum("ep,eq,er->pqr", Wa, Va, dZ)
        + np.einsum("ep,eq,er->pqr", Wa, Vb, dZ)
        + np.einsum("ep,eq,er->pqr", Wb, Va, dZ)
        + 2 * np.einsum("ep,eq,er->pqr", Wb, Vb, dZ)
    )
    return -T / 12


def interpolate(space, f):
    values = np.asarray(f(space.nodes), dtype=float)
    return np.broadcast_to(values, space.nodes.shape).copy()


def l2_norm(space, forms, v):
    space.check(v)
    return float(np.sqrt(max(np.dot(v, forms.mass.matvec(v)), 0.0)))


def hat(space, i):
    e = np.zeros(space.dim)
    e[i] = 1.0
    return e
