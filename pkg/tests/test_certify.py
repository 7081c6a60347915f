import csv

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from burgers_rb.certify import (certified_bound_step, certify_trajectory, initial_error_norm,
                                residual_functionals, residual_zero_norm)
from burgers_rb.errors import CertificationUnavailableError
from burgers_rb.fem import assemble_forms, build_space, interpolate, trilinear_c
from burgers_rb.full import FullModel, solve_full
from burgers_rb.offline import (ReducedBasis, assemble_model, enrich_with_initial_modes, gram_schmidt,
                                sine_modes)
from burgers_rb.online import reconstruct, solve_reduced
from burgers_rb.params import FrequencyStructure, make_parameter_point, sample_parameters

from test_offline import small_config


def riesz_residual_norm(fm, mu, t, u, uprev, dt):
    """||r_k||_0 from the nodal states: assemble r_k on every interior hat and solve with M0."""
    space, forms = fm.space, fm.forms
    load = forms.mass.matvec(interpolate(space, lambda x: mu.f(t, x)))
    conv = np.array([trilinear_c(space, u, u, np.eye(space.dim)[i]) for i in range(space.dim)])
    r = load - forms.mass.matvec(u - uprev) / dt - conv - mu.nu * forms.stiffness.matvec(u)
    r = r[1:-1]
    return float(np.sqrt(r @ scipy.linalg.solve(forms.interior_mass(), r, assume_a="pos")))


@pytest.fixture(scope="module")
def spanning():
    config = small_config(n=10, dt=0.05)
    fm = FullModel(config)
    basis = ReducedBasis(gram_schmidt(np.eye(11), fm.forms)[0])
    return config, fm, assemble_model(basis, config, fm)


def test_residual_gram_matches_riesz_solve(box_model, box_full, box_config):
    Z = box_model.basis.vectors
    for mu in sample_parameters(box_config.ranges, box_config.freq, 4, 5):
        traj = solve_reduced(box_model, mu)
        for k in (1, 17, 100):
            u, up = traj.coeffs[k], traj.coeffs[k - 1]
            gram = residual_zero_norm(box_model.residual_gram, mu, k * box_config.dt, u, up,
                                      box_config.dt)
            direct = riesz_residual_norm(box_full, mu, k * box_config.dt, Z @ u, Z @ up,
                                         box_config.dt)
            assert gram == pytest.approx(direct, rel=1e-10)


def test_residual_gram_psd_and_symmetric(box_model):
    G = box_model.residual_gram.G
    assert np.array_equal(G, G.T)
    assert np.linalg.eigvalsh(G).min() >= -1e-10


def test_convective_block_symmetry(box_model, box_full, box_config):
    Z = box_model.basis.vectors
    n = Z.shape[1]
    F = residual_functionals(Z, box_full.space, box_full.forms,
                             sine_modes(box_full.space, box_config.freq.omega_fS),
                             np.eye(box_full.space.dim)[:, 1:-1])
    start = 1 + len(box_config.freq.omega_fS) + n
    block = F[start:start + n * n].reshape(n, n, -1)
    assert np.array_equal(block, block.transpose(1, 0, 2))


def test_mass_representers_defining_equation(box_model, box_full, box_config):
    space, forms = box_full.space, box_full.forms
    Z = box_model.basis.vectors
    interior = np.eye(space.dim)[:, 1:-1]
    F = residual_functionals(Z, space, forms, sine_modes(space, box_config.freq.omega_fS), interior)
    start = 1 + len(box_config.freq.omega_fS)
    gamma = scipy.linalg.solve(forms.interior_mass(), F[start:start + Z.shape[1]].T)  # interior dofs
    lhs = gamma.T @ forms.interior_mass()  # <Gamma_j, phi_i> for interior i
    rhs = Z.T @ forms.mass_dense()[:, 1:-1]
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_zero_state_zero_data_residual(box_model, box_config):
    mu = make_parameter_point([1, 0, 0, 0, 0, 0, 0], box_config.freq)
    z = np.zeros(box_model.size)
    assert residual_zero_norm(box_model.residual_gram, mu, 0.3, z, z, box_config.dt) == 0.0


def test_full_spanning_residual_vanishes(spanning):
    config, fm, model = spanning
    for mu in sample_parameters(config.ranges, config.freq, 2, 4):
        sol = certify_trajectory(model, mu, stability=lambda k, u: (0.0, 0.0))
        assert max(d.r_norm for d in sol.diagnostics) <= 1e-8


def test_initial_gram_matches_projection(box_model, box_full, box_config):
    space, forms = box_full.space, box_full.forms
    Z = box_model.basis.vectors
    M = forms.mass_dense()
    for mu in sample_parameters(box_config.ranges, box_config.freq, 10, 6):
        u0 = interpolate(space, mu.u0)
        d = u0 - Z @ (Z.T @ M @ u0)
        assert initial_error_norm(box_model.initial_gram, mu) == pytest.approx(
            np.sqrt(d @ M @ d), abs=1e-12)


def test_initial_gram_homogeneous(box_model, box_config):
    mu = make_parameter_point([1, 1, 1, 1, 1, 0.3, 1.2], box_config.freq)
    mu2 = make_parameter_point([1, 1, 1, 1, 1, 0.6, 2.4], box_config.freq)
    zero = make_parameter_point([1, 1, 1, 1, 1, 0.0, 0.0], box_config.freq)
    g = box_model.initial_gram
    assert initial_error_norm(g, zero) == 0.0
    assert initial_error_norm(g, mu2) == pytest.approx(2 * initial_error_norm(g, mu), rel=1e-12)


def test_initial_gram_vanishes_when_enriched(box_model, box_full, box_config):
    basis = enrich_with_initial_modes(box_model.basis, box_full.space, box_full.forms,
                                      box_config.freq)
    model = assemble_model(basis, box_config, box_full)
    assert np.max(np.abs(model.initial_gram.H)) <= 1e-12
    for mu in sample_parameters(box_config.ranges, box_config.freq, 5, 3):
        assert initial_error_norm(model.initial_gram, mu) <= 1e-12


def test_initial_gram_without_sines():
    config = small_config(extra="").replace(freq=FrequencyStructure(), ranges=type(small_config().ranges)(
        nu=(1, 1), f_m=(0, 1), u0m=(0, 1)))
    fm = FullModel(config)
    v = np.sin(np.linspace(0, 2, 11))[:, None]
    basis = ReducedBasis(gram_schmidt(v, fm.forms)[0])
    model = assemble_model(basis, config, fm)
    one = np.ones(11)
    M = fm.forms.mass_dense()
    z = basis.vectors[:, 0]
    d = one - z * (z @ M @ one)
    assert model.initial_gram.H.shape == (1, 1)
    assert model.initial_gram.H[0, 0] == pytest.approx(d @ M @ d, rel=1e-12)


small_vectors = st.integers(2, 20).flatmap(
    lambda n: st.tuples(*[arrays(float, n + 1, elements=st.floats(-3, 3)) for _ in range(3)]))


@settings(max_examples=60, deadline=None)
@given(small_vectors)
def test_quadratic_splitting_identity(vecs):
    u, ut, v = vecs
    space = build_space(len(u) - 1)
    e = u - ut
    lhs = trilinear_c(space, u, u, v) - trilinear_c(space, ut, ut, v)
    rhs = 2 * trilinear_c(space, ut, e, v) + trilinear_c(space, e, e, v)
    assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, np.max(np.abs(vecs)) ** 3))


@settings(max_examples=60, deadline=None)
@given(small_vectors)
def test_cubic_boundary_identity(vecs):
    e = vecs[0]
    space = build_space(len(e) - 1)
    assert trilinear_c(space, e, e, e) == pytest.approx(-(e[-1] ** 3 - e[0] ** 3) / 6, abs=1e-12 * 27)


def test_trivial_step_gives_zero_bound(spanning):
    config, fm, model = spanning
    mu = make_parameter_point([1.0, 0.0, 0.0, 0.0], config.freq)
    assert mu.b0(0.3) == 0 and mu.b1(0.3) == 0
    z = np.zeros(model.size)
    state = certified_bound_step(model, mu, 3, 0.0, z, z, 1.0, 1.0)
    assert state.r_norm == 0 and state.b_sup == 0 and state.gamma_sup <= 0
    assert state.eps == 0.0


def test_nonpositive_a_inf_raises(box_model, reference_point, box_config):
    traj = solve_reduced(box_model, reference_point)
    with pytest.raises(CertificationUnavailableError) as info:
        certified_bound_step(box_model, reference_point, 2, 0.0, traj.coeffs[2], traj.coeffs[1],
                             -1.0 / box_config.dt - 1.0, 0.0)
    assert info.value.step == 2


def test_bounds_and_diagnostics(box_model, reference_point, box_full):
    sol = certify_trajectory(box_model, reference_point)
    assert np.all(np.isfinite(sol.bounds)) and np.all(sol.bounds >= 0)
    assert sol.bounds[0] == sol.eps0
    nodal = reconstruct(box_model, sol.trajectory.coeffs)
    for d in sol.diagnostics:
        assert d.a_inf > 0 and d.c_inf <= d.c_sup
        t = d.k * box_model.dt
        assert d.e_left == pytest.approx(reference_point.b0(t) - nodal[d.k, 0], abs=1e-13)
        assert d.e_right == pytest.approx(reference_point.b1(t) - nodal[d.k, -1], abs=1e-13)


def test_step_function_matches_recursion(box_model, reference_point):
    sol = certify_trajectory(box_model, reference_point)
    U = sol.trajectory.coeffs
    for q in (0, 9, 99):
        d = sol.diagnostics[q]
        again = certified_bound_step(box_model, reference_point, d.k, sol.bounds[q], U[d.k],
                                     U[d.k - 1], d.c_inf, d.c_sup)
        assert again.eps == pytest.approx(sol.bounds[q + 1], rel=1e-13)


def test_bound_covers_error(box_model, box_full, box_config):
    Z = box_model.basis.vectors
    M = box_full.forms.mass_dense()
    for mu in sample_parameters(box_config.ranges, box_config.freq, 3, 77):
        sol = certify_trajectory(box_model, mu, diagnostics=False)
        diff = solve_full(box_config, mu, box_full).states - sol.trajectory.coeffs @ Z.T
        err = np.sqrt(np.einsum("ki,ij,kj->k", diff, M, diff))
        assert np.all(sol.bounds >= err - 1e-12)


def test_enriched_initial_bound_is_zero(box_model, box_full, box_config, reference_point):
    basis = enrich_with_initial_modes(box_model.basis, box_full.space, box_full.forms,
                                      box_config.freq)
    model = assemble_model(basis, box_config, box_full)
    sol = certify_trajectory(model, reference_point, stability=lambda k, u: (0.0, 0.0))
    assert sol.eps0 <= 1e-12


def test_csv_columns(box_model, reference_point, tmp_path):
    sol = certify_trajectory(box_model, reference_point)
    path = tmp_path / "c.csv"
    sol.write_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:6] == ["k", "t", "eps_k", "C_inf", "C_sup", "r_norm"]
    assert len(rows) == box_model.num_steps + 2
    sol.write_csv(path, actual_errors=np.zeros(len(sol.bounds)))
    with open(path) as fh:
        assert next(csv.reader(fh))[:4] == ["k", "t", "eps_k", "actual_error"]
