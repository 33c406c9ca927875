"""Closed-form fields against the operator definitions and the compiled right-hand sides."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bloch_angles, couplings, random_unit_vectors, unit_vectors
from qmm.errors import PoleError, ValidationError
from qmm.hamiltonians import (CouplingSet, MonomialSpec, field_from_matrix, field_hybrid, field_kicker,
                              field_qmm_11, field_qmm_22, field_qmm_23, field_qmm_33,
                              generic_qmm_hamiltonian, induced_velocity, matrix_from_field,
                              schrodinger_functions_2L)
from qmm.integrator import rhs, rhs_polar
from qmm.qubit import PAULI, BlochAngles, angles_to_ket, angles_to_vector, density_matrix, tpf


def _bloch_velocity_from_h(h, s):
    """r' from the von Neumann equation rho' = -i[H, rho]."""
    rho = density_matrix(s)
    drho = -1j * (h @ rho - rho @ h)
    return np.array([np.trace(drho @ p).real for p in PAULI])


@given(bloch_angles(), bloch_angles(), couplings, couplings, couplings)
def test_qmm22_field_drives_von_neumann(sa, s, mu, lam_re, lam_im):
    h = generic_qmm_hamiltonian([MonomialSpec(mu, (0,)), MonomialSpec(lam_re + 1j * lam_im, (0, 1))], [sa, s])
    ra, r = angles_to_vector(sa).as_array(), angles_to_vector(s).as_array()
    b = field_qmm_22(ra, r, mu + lam_re, lam_re, lam_im)
    np.testing.assert_allclose(_bloch_velocity_from_h(h, s), np.cross(b, r), atol=1e-10)


def test_field_matrix_roundtrip(rng):
    for b in rng.normal(size=(20, 3)):
        np.testing.assert_allclose(field_from_matrix(matrix_from_field(b, 0.3)), b, atol=1e-14)


def test_palindromic_monomial_counts_once():
    sa = BlochAngles(0.4, 1.2)
    h = generic_qmm_hamiltonian([MonomialSpec(2.0 + 5.0j, (0,))], [sa])
    np.testing.assert_allclose(h, 2.0 * density_matrix(sa), atol=1e-15)


def test_monomial_validation():
    with pytest.raises(ValidationError):
        MonomialSpec(1.0, ())
    with pytest.raises(ValidationError):
        MonomialSpec(1.0, (0, 0))
    with pytest.raises(ValidationError):
        generic_qmm_hamiltonian([MonomialSpec(1.0, (0, 3))], [BlochAngles(0.1, 0.2)])


def test_coupling_validation():
    with pytest.raises(ValidationError):
        CouplingSet(mu=float("nan"))
    with pytest.raises(ValidationError):
        CouplingSet(b_ext=(1.0, 2.0))
    assert CouplingSet(mu=1.0, lambda_re=0.5).mu_hat == 1.5


def test_kicker_and_hybrid_fields():
    np.testing.assert_array_equal(field_kicker(7.5), [0.0, 7.5, 0.0])
    np.testing.assert_allclose(field_hybrid([1, 2, 3], [0, 0, 1]), [1, 2, 4])
    np.testing.assert_allclose(induced_velocity([0, 0, 1], [1, 0, 0]), [0, 1, 0])


@given(bloch_angles(), bloch_angles(), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_schrodinger_functions_reproduce_h_psi(sa, s, mu, lam_re, lam_im):
    lam = lam_re + 1j * lam_im
    h = generic_qmm_hamiltonian([MonomialSpec(mu, (0,)), MonomialSpec(lam, (0, 1))], [sa, s])
    m = tpf(sa, s)
    s_r, s_n = schrodinger_functions_2L(abs(m) ** 2, m, [mu], [lam])
    psi_a, psi = angles_to_ket(sa).as_array(), angles_to_ket(s).as_array()
    np.testing.assert_allclose(h @ psi, s_r * psi_a + s_n * psi, atol=1e-10)


# ---------------------------------------------------------------------------
# printed vector fields against the compiled kernels


def _params_case(rng):
    return dict(mu=rng.normal(), lambda_re=rng.normal(), lambda_im=rng.normal(), eta=rng.normal(),
                kappa_re=rng.normal(), kappa_im=rng.normal(), b_ext=tuple(rng.normal(size=3)))


@pytest.mark.parametrize("model", ["qmm11", "qmm22", "qmm23", "qmm33", "hybrid22"])
def test_kernel_rhs_equals_b_cross_r(model, rng):
    for _ in range(200):
        c = CouplingSet(**_params_case(rng))
        ra, rb, r = random_unit_vectors(rng, 3)
        if model == "qmm11":
            b = field_qmm_11(ra, c.mu)
        elif model == "qmm22":
            b = field_qmm_22(ra, r, c.mu_hat, c.lambda_re, c.lambda_im)
        elif model == "qmm23":
            b = field_qmm_23(ra, r, c.lambda_re, c.lambda_im, c.eta, c.mu)
        elif model == "qmm33":
            b = field_qmm_33(ra, rb, r, c.kappa_re, c.kappa_im)
        else:
            b = field_hybrid(field_qmm_22(ra, r, c.mu_hat, c.lambda_re, c.lambda_im), c.b_ext)
        np.testing.assert_allclose(rhs(model, r, ra, rb, c), np.cross(b, r), atol=1e-12)


@pytest.mark.parametrize("model", ["qmm11", "qmm22", "qmm23", "qmm33", "hybrid22"])
def test_polar_rhs_is_projection_of_cartesian(model, rng):
    for _ in range(200):
        c = CouplingSet(**_params_case(rng))
        angles = [BlochAngles(rng.uniform(0.1, np.pi - 0.1), rng.uniform(-7, 7)) for _ in range(3)]
        s, sa, sb = angles
        r, ra, rb = (angles_to_vector(x).as_array() for x in angles)
        v = rhs(model, r, ra, rb, c)
        dth, dph = rhs_polar(model, s, sa, sb, c)
        e_th = np.array([np.cos(s.theta) * np.cos(s.phi), np.cos(s.theta) * np.sin(s.phi), -np.sin(s.theta)])
        e_ph = np.array([-np.sin(s.phi), np.cos(s.phi), 0.0])
        assert dth == pytest.approx(v @ e_th, abs=1e-10)
        assert dph * np.sin(s.theta) == pytest.approx(v @ e_ph, abs=1e-10)


def test_polar_rhs_refuses_poles():
    with pytest.raises(PoleError):
        rhs_polar("qmm22", BlochAngles(0.0, 0.0), BlochAngles(1.0, 0.0), None, CouplingSet(lambda_im=1.0))


@given(unit_vectors(), unit_vectors(), couplings, couplings)
def test_qmm33_collapses_to_qmm22(ra, r, kr, ki):
    np.testing.assert_allclose(field_qmm_33(ra, ra, r, kr, ki), field_qmm_22(ra, r, kr, kr, ki), atol=1e-12)


@given(unit_vectors(), unit_vectors(), couplings, couplings)
def test_qmm23_without_eta_is_qmm22(ra, r, lr, li):
    np.testing.assert_allclose(field_qmm_23(ra, r, lr, li, 0.0), field_qmm_22(ra, r, lr, lr, li), atol=1e-12)
