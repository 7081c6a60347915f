"""Offline stage: basis construction and every parameter-independent quantity."""
from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import certify, scm as scm_mod
from .config import parse_config, dump_config
from .errors import (BurgersRBError, CompatibilityError, NonConvergenceError, RankDeficiencyError,
                     StagnationError)
from .fem import hat, interpolate, trilinear_tensor
from .full import FullModel, solve_full
from .online import solve_reduced
from .params import sample_parameters

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class SnapshotSet:
    matrix: np.ndarray  # (num_intervals + 1, S * (num_steps + 1))
    sample: list
    trajectories: list


@dataclass
class ReducedBasis:
    vectors: np.ndarray  # (num_intervals + 1, N), mass-orthonormal columns
    enriched_count: int = 0

    @property
    def size(self):
        return self.vectors.shape[1]

    def truncated(self, n):
        return ReducedBasis(self.vectors[:, :n].copy(), min(self.enriched_count, n))


@dataclass
class OfflineTensors:
    red_mass: np.ndarray
    red_stiff: np.ndarray
    red_tri: np.ndarray  # [j', j, i] = c(zeta_j', zeta_j, zeta_i)
    red_bpen: np.ndarray
    red_beta0: np.ndarray
    red_beta1: np.ndarray
    red_int: np.ndarray
    red_fsin: np.ndarray  # (n_fS, N)
    proj_one: np.ndarray
    proj_u0sin: np.ndarray  # (n_u0, N)
    zeta_left: np.ndarray
    zeta_right: np.ndarray
    c_phi: np.ndarray  # (N, 6) c(zeta_j, phi_a, phi_b) over BOUNDARY_PAIRS
    a_phi: np.ndarray  # (6,)
    resid_boundary: np.ndarray  # (2, 1 + n_fS + 2N + N^2) residual ingredients on phi_0, phi_N
    hat_norm_left: float
    hat_norm_right: float
    continuity_E: float


def boundary_pairs(n):
    return [(1, 0), (0, 1), (n - 1, n), (n, n - 1), (0, 0), (n, n)]


@dataclass
class ReducedModel:
    basis: ReducedBasis | None
    tensors: OfflineTensors
    initial_gram: certify.InitialErrorGram
    residual_gram: certify.ResidualGram
    scm: scm_mod.SCMData | None
    config: object

    @property
    def size(self):
        return self.tensors.red_mass.shape[0]

    @property
    def dt(self):
        return self.config.dt

    @property
    def num_steps(self):
        return self.config.num_steps

    @property
    def penalty(self):
        return self.config.penalty

    @property
    def newton_tol(self):
        return self.config.newton_tol

    @property
    def newton_cap(self):
        return self.config.newton_cap

    @property
    def freq(self):
        return self.config.freq

    def online_view(self):
        """Copy without the nodal basis: what the online stage is allowed to see."""
        return dataclasses.replace(self, basis=None)

    def save(self, path):
        arrays = {f"tensors.{k}": np.asarray(v) for k, v in dataclasses.asdict(self.tensors).items()}
        arrays["initial_gram.H"] = self.initial_gram.H
        arrays["residual_gram.G"] = self.residual_gram.G
        if self.residual_gram.factor is not None:
            arrays["residual_gram.factor"] = self.residual_gram.factor
        if self.basis is not None:
            arrays["basis.vectors"] = self.basis.vectors
        if self.scm is not None:
            for k, v in dataclasses.asdict(self.scm).items():
                arrays[f"scm.{k}"] = np.asarray(v)
        header = {
            "format": "burgers-rb reduced model",
            "version": FORMAT_VERSION,
            "size": self.size,
            "enriched_count": self.basis.enriched_count if self.basis is not None else 0,
            "n_fS": self.residual_gram.n_fS,
            "config": dump_config(self.config),
        }
        arrays["header"] = np.array(json.dumps(header))
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)

    @classmethod
    def load(cls, path):
        try:
            return cls._load(path)
        except (OSError, KeyError, ValueError) as exc:
            raise CompatibilityError(f"cannot read reduced model {path}: {exc}") from exc

    @classmethod
    def _load(cls, path):
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            if header.get("version") != FORMAT_VERSION:
                raise CompatibilityError(f"unsupported model format version {header.get('version')}")
            config = parse_config(header["config"])
            fields = {f.name for f in dataclasses.fields(OfflineTensors)}
            tensors = OfflineTensors(**{
                k: (float(data[f"tensors.{k}"]) if data[f"tensors.{k}"].ndim == 0 else data[f"tensors.{k}"])
                for k in fields
            })
            basis = None
            if "basis.vectors" in data:
                basis = ReducedBasis(data["basis.vectors"], header["enriched_count"])
            scm = None
            if "scm.values" in data:
                kw = {f.name: data[f"scm.{f.name}"] for f in dataclasses.fields(scm_mod.SCMData)}
                kw["nearest_count"] = int(kw["nearest_count"])
                kw["num_steps"] = int(kw["num_steps"])
                scm = scm_mod.SCMData(**kw)
            return cls(basis, tensors, certify.InitialErrorGram(data["initial_gram.H"]),
                       certify.ResidualGram(data["residual_gram.G"], header["n_fS"], header["size"],
                                            data["residual_gram.factor"] if "residual_gram.factor" in data else None),
                       scm, config)


# ---------------------------------------------------------------- snapshots and POD

def build_snapshots(sample, config, full_model=None):
    if not sample:
        raise BurgersRBError("snapshot sample is empty")
    full_model = full_model or FullModel(config)
    trajs = []
    for mu in sample:
        try:
            trajs.append(solve_full(config, mu, full_model))
        except NonConvergenceError as exc:
            raise NonConvergenceError(exc.step, exc.iterations,
                                      f"{exc} for parameter {mu.free_vector().tolist()}") from exc
    matrix = np.hstack([tr.states.T for tr in trajs])
    return SnapshotSet(matrix, list(sample), trajs)


def mass_inner(forms, U, V):
    MV = np.column_stack([forms.mass.matvec(v) for v in np.atleast_2d(V.T)])
    return np.atleast_2d(U.T) @ MV


def gram_schmidt(vectors, forms, start=None, tol=1e-10):
    """Mass-orthonormalize columns (two passes); returns kept columns and their indices.

    Columns whose relative norm after orthogonalization drops below ``tol`` are skipped.
    """
    basis = [] if start is None else [start[:, i] for i in range(start.shape[1])]
    kept = []
    for i, v in enumerate(np.atleast_2d(vectors.T)):
        w = np.array(v, dtype=float)
        norm0 = np.sqrt(max(w @ forms.mass.matvec(w), 0.0))
        if norm0 == 0:
            continue
        for _ in range(2):
            for b in basis:
                w -= (b @ forms.mass.matvec(w)) * b
        norm = np.sqrt(max(w @ forms.mass.matvec(w), 0.0))
        if norm < tol * norm0:
            continue
        basis.append(w / norm)
        kept.append(i)
    out = np.column_stack(basis) if basis else np.zeros((vectors.shape[0], 0))
    return out, kept


def pod_eigen(snapshots, forms):
    """Nonzero spectrum of M^T Omega M (descending) and the matching M z vectors.

    Computed as a thin SVD of L^T M with Omega = L L^T: the squared singular
    values are the eigenvalues, and M z_i = L^{-T} u_i sigma_i.  Small
    eigenvalues keep full relative accuracy, which forming M^T Omega M loses.
    """
    M = snapshots.matrix
    chol = scipy.linalg.cholesky(forms.mass_dense(), lower=True)
    U, sing, _ = scipy.linalg.svd(chol.T @ M, full_matrices=False)
    modes = scipy.linalg.solve_triangular(chol.T, U * sing, lower=False)
    return sing**2, modes


def pod_basis(snapshots, forms, size):
    n_cols = snapshots.matrix.shape[1]
    if size < 1 or size >= n_cols:
        raise BurgersRBError(f"POD size must satisfy 1 <= N < {n_cols}")
    vals, vecs = pod_eigen(snapshots, forms)
    sing = np.sqrt(vals)
    tol = max(snapshots.matrix.shape) * np.finfo(float).eps * (sing[0] if sing.size else 0.0)
    rank = int(np.sum(sing > tol))
    if rank < size:
        raise RankDeficiencyError(size, rank)
    raw = vecs[:, :size] / sing[:size]
    vectors, kept = gram_schmidt(raw, forms)
    if len(kept) < size:
        raise RankDeficiencyError(size, len(kept))
    return ReducedBasis(vectors, 0)


def initial_modes(space, freq):
    modes = [np.ones(space.dim)]
    modes += [interpolate(space, lambda x, w=w: np.sin(w * x)) for w in freq.omega_u0]
    return np.column_stack(modes)


def enrich_with_initial_modes(basis, space, forms, freq):
    """Prepend the constant and the initial-data sine modes, then re-orthonormalize."""
    modes = initial_modes(space, freq)
    front, kept = gram_schmidt(modes, forms)
    if len(kept) < modes.shape[1]:
        log.info("enrichment skipped %d dependent initial mode(s)", modes.shape[1] - len(kept))
    rest, _ = gram_schmidt(basis.vectors, forms, start=front) if basis.size else (front, [])
    return ReducedBasis(rest, front.shape[1])


# ---------------------------------------------------------------- offline tensors

def continuity_constant(forms):
    """sup of v(x_1) over unit-norm v in X0."""
    m0 = forms.interior_mass()
    e1 = np.zeros(m0.shape[0])
    e1[0] = 1.0
    return float(np.sqrt(e1 @ scipy.linalg.solve(m0, e1, assume_a="pos")))


def sine_modes(space, omegas):
    return [interpolate(space, lambda x, w=w: np.sin(w * x)) for w in omegas]


def precompute_offline(basis, space, forms, freq):
    Z = basis.vectors
    n = space.num_intervals
    MZ = np.column_stack([forms.mass.matvec(z) for z in Z.T])
    AZ = np.column_stack([forms.stiffness.matvec(z) for z in Z.T])
    sin_fS = sine_modes(space, freq.omega_fS)
    sin_u0 = sine_modes(space, freq.omega_u0)
    red_fsin = np.array([s @ MZ for s in sin_fS]).reshape(len(sin_fS), Z.shape[1])
    proj_u0 = np.array([MZ.T @ s for s in sin_u0]).reshape(len(sin_u0), Z.shape[1])
    pairs = boundary_pairs(n)
    c_phi = np.array([[trilinear_tensor(space, z, hat(space, a), hat(space, b))[0, 0, 0] for a, b in pairs]
                      for z in Z.T])
    stiff = forms.stiffness_dense()
    a_phi = np.array([stiff[b, a] for a, b in pairs])
    ends = np.column_stack([hat(space, 0), hat(space, n)])
    hat_norm = np.sqrt(forms.mass.diag[0])
    return OfflineTensors(
        red_mass=Z.T @ MZ,
        red_stiff=Z.T @ AZ,
        red_tri=trilinear_tensor(space, Z, Z, Z),
        red_bpen=forms.penalty * (np.outer(Z[0], Z[0]) + np.outer(Z[-1], Z[-1])),
        red_beta0=forms.penalty * Z[0],
        red_beta1=forms.penalty * Z[-1],
        red_int=forms.hat_integrals @ Z,
        red_fsin=red_fsin,
        proj_one=MZ.T @ np.ones(space.dim),
        proj_u0sin=proj_u0,
        zeta_left=Z[0].copy(),
        zeta_right=Z[-1].copy(),
        c_phi=c_phi.reshape(Z.shape[1], len(pairs)),
        a_phi=a_phi,
        resid_boundary=certify.residual_functionals(Z, space, forms, sin_fS, ends).T,
        hat_norm_left=float(hat_norm),
        hat_norm_right=float(np.sqrt(forms.mass.diag[-1])),
        continuity_E=continuity_constant(forms),
    )


def assemble_model(basis, config, full_model=None, scm=None):
    """Everything but the SCM constraints; ``scm`` may be attached later."""
    fm = full_model or FullModel(config)
    space, forms, freq = fm.space, fm.forms, config.freq
    tensors = precompute_offline(basis, space, forms, freq)
    init = certify.build_initial_gram(basis.vectors, space, forms, sine_modes(space, freq.omega_u0))
    resid = certify.build_residual_gram(basis.vectors, space, forms, sine_modes(space, freq.omega_fS))
    return ReducedModel(basis, tensors, init, resid, scm, config)


def scm_candidates(model, sample, steps=0, seed=0):
    """(mu, k, u^k(mu)) triples from reduced trajectories of ``sample``."""
    rng = np.random.default_rng(seed)
    out = []
    for mu in sample:
        traj = solve_reduced(model, mu)
        ks = np.arange(1, model.num_steps + 1)
        if steps and steps < len(ks):
            ks = np.sort(rng.choice(ks, size=steps, replace=False))
        out.extend(scm_mod.Candidate(mu, int(k), traj.coeffs[k]) for k in ks)
    return out


def train_scm(model, full_model=None, sample=None, seed=None):
    config = model.config
    fm = full_model or FullModel(config)
    settings = config.scm
    seed = config.seed if seed is None else seed
    if sample is None:
        sample = sample_parameters(config.ranges, config.freq, settings.candidate_params, seed + 7)
    cands = scm_candidates(model, sample, settings.candidate_steps, seed + 11)
    lo, hi = config.ranges.full_bounds(config.freq)
    data, _, history = scm_mod.scm_train(
        model.basis.vectors, fm.space, fm.forms, cands, hi - lo, config.num_steps,
        nearest=settings.nearest, max_constraints=settings.max_constraints,
        tolerance=settings.tolerance, seed=seed + 13,
    )
    log.info("SCM trained with %d constraints, final sharpness %s", data.size, history[-1:] or "n/a")
    model.scm = data
    return model


# ---------------------------------------------------------------- greedy

def local_indicator(model, mu, full_model):
    """Bound of each step with the propagated error switched off; exact stability constants."""
    space, forms = full_model.space, full_model.forms
    traj = solve_reduced(model, mu)
    nodal = traj.coeffs[1:] @ model.basis.vectors.T
    c = np.array([scm_mod.exact_stability(space, forms, u, mu.nu) for u in nodal])
    return certify.local_bounds(model, mu, traj.coeffs, c, c)


@dataclass
class GreedyStep:
    index: int  # parameter index in the candidate sample
    k: int
    indicator: float


def greedy_basis(sample, size, config, initial=None, full_model=None, seed=0, indicator=None):
    """Greedy selection of (mu, k) snapshots by the local error indicator.

    ``initial`` (a ReducedBasis, e.g. the enrichment modes) replaces the random seed
    snapshot.  Returns the basis and the list of :class:`GreedyStep` records.
    """
    if not sample:
        raise BurgersRBError("greedy candidate sample is empty")
    fm = full_model or FullModel(config)
    indicator = indicator or local_indicator
    rng = np.random.default_rng(seed)
    cache = {}

    def full(i):
        if i not in cache:
            cache[i] = solve_full(config, sample[i], fm).states
        return cache[i]

    history = []
    if initial is not None and initial.size:
        basis = initial
    else:
        for _ in range(100):
            i, k = int(rng.integers(len(sample))), int(rng.integers(config.num_steps + 1))
            v = full(i)[k]
            if np.sqrt(v @ fm.forms.mass.matvec(v)) > 0:
                break
        vectors, _ = gram_schmidt(v[:, None], fm.forms)
        basis = ReducedBasis(vectors, 0)
        history.append(GreedyStep(i, k, np.inf))
    while basis.size < size:
        model = assemble_model(basis, config, fm)
        table = np.full((len(sample), config.num_steps + 1), np.inf)
        for i, mu in enumerate(sample):
            try:
                table[i] = indicator(model, mu, fm)
            except BurgersRBError as exc:
                log.warning("indicator failed for candidate %d (%s); treated as infinite", i, exc)
        flat = int(np.argmax(table))  # first maximum: lowest index, then lowest k
        i, k = divmod(flat, table.shape[1])
        vectors, kept = gram_schmidt(full(i)[k][:, None], fm.forms, start=basis.vectors)
        if not kept:
            raise StagnationError(basis.size)
        basis = ReducedBasis(vectors, basis.enriched_count)
        history.append(GreedyStep(i, k, float(table[i, k])))
        log.info("greedy size %d: picked candidate %d at k=%d (indicator %.3e)",
                 basis.size, i, k, table[i, k])
    return basis, history


# ---------------------------------------------------------------- driver

def build_basis(config, method=None, size=None, enrich=None, full_model=None, seed=None):
    fm = full_model or FullModel(config)
    method = method or config.rb.basis
    size = size or config.rb.size
    enrich = config.rb.enrich if enrich is None else enrich
    seed = config.seed if seed is None else seed
    if method == "pod":
        sample = sample_parameters(config.ranges, config.freq, config.rb.snapshots, seed + 1)
        snaps = build_snapshots(sample, config, fm)
        if enrich:
            n_init = initial_modes(fm.space, config.freq).shape[1]
            pod = pod_basis(snaps, fm.forms, max(size - n_init, 1))
            return enrich_with_initial_modes(pod, fm.space, fm.forms, config.freq).truncated(size)
        return pod_basis(snaps, fm.forms, size)
    if method == "greedy":
        sample = sample_parameters(config.ranges, config.freq, config.rb.greedy_candidates, seed + 2)
        initial = None
        if enrich:
            initial = enrich_with_initial_modes(ReducedBasis(np.zeros((fm.space.dim, 0))),
                                                fm.space, fm.forms, config.freq)
        basis, _ = greedy_basis(sample, size, config, initial=initial, full_model=fm, seed=seed + 3)
        return basis
    raise BurgersRBError(f"unknown basis method {method!r}")


def build_reduced_model(config, method=None, size=None, enrich=None, basis=None, full_model=None):
    fm = full_model or FullModel(config)
    if basis is None:
        basis = build_basis(config, method, size, enrich, fm)
    model = assemble_model(basis, config, fm)
    return train_scm(model, fm)
