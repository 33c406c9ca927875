import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import bloch_angles, unit_vectors
from qmm.errors import DegenerateInputError, ValidationError
from qmm.qubit import (PAULI, BlochAngles, BlochVector, angles_from_vectors, angles_to_ket, angles_to_vector,
                       density_from_vector, density_matrix, density_product, tpf, tpf_norm_sq,
                       tpf_norm_sq_many, tpo, vector_to_angles, vectors_from_angles)


def test_basis_states():
    up = angles_to_vector(BlochAngles(0.0, 0.0)).as_array()
    down = angles_to_vector(BlochAngles(np.pi, 0.0)).as_array()
    np.testing.assert_allclose(up, [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(down, [0, 0, -1], atol=1e-15)
    assert tpf_norm_sq(up, down) == 0.0
    assert tpf_norm_sq(up, up) == 1.0


def test_equator_ket():
    k = angles_to_ket(BlochAngles(np.pi / 2, np.pi / 2)).as_array()
    np.testing.assert_allclose(k, [np.sqrt(0.5), 1j * np.sqrt(0.5)], atol=1e-15)


@given(bloch_angles())
def test_three_representations_agree(s):
    r = angles_to_vector(s).as_array()
    assert abs(np.linalg.norm(r) - 1.0) < 1e-12
    rho = density_matrix(s)
    np.testing.assert_allclose(rho, density_from_vector(r), atol=1e-12)
    # the Bloch vector is the expectation of the Pauli matrices
    np.testing.assert_allclose([np.trace(rho @ p).real for p in PAULI], r, atol=1e-12)


@given(bloch_angles(interior=True))
def test_vector_roundtrip(s):
    back = vector_to_angles(angles_to_vector(s))
    assert back.theta == pytest.approx(s.canonical().theta, abs=1e-9)
    assert np.cos(back.phi - s.phi) == pytest.approx(1.0, abs=1e-9)


@given(bloch_angles(), bloch_angles())
def test_tpf_norm_matches_bloch_overlap(s1, s2):
    m = tpf(s1, s2)
    r1, r2 = angles_to_vector(s1).as_array(), angles_to_vector(s2).as_array()
    assert abs(m) ** 2 == pytest.approx(0.5 * (1 + r1 @ r2), abs=1e-12)
    assert abs(m) ** 2 == pytest.approx(tpf_norm_sq(r1, r2), abs=1e-12)
    assert tpf(s2, s1) == pytest.approx(np.conj(m), abs=1e-12)


@given(st.floats(min_value=-10, max_value=10), st.floats(min_value=-10, max_value=10))
def test_canonical_preserves_ket_up_to_phase(theta, phi):
    s = BlochAngles(theta, phi)
    c = s.canonical()
    assert 0.0 <= c.theta <= np.pi
    overlap = abs(np.vdot(angles_to_ket(s).as_array(), angles_to_ket(c).as_array()))
    assert overlap == pytest.approx(1.0, abs=1e-9)


@given(unit_vectors(), unit_vectors())
def test_density_product_identity(r1, r2):
    np.testing.assert_allclose(density_product(r1, r2), density_from_vector(r1) @ density_from_vector(r2),
                               atol=1e-12)


@given(bloch_angles(), bloch_angles())
def test_tpo_is_outer_product(s1, s2):
    m = tpf(s1, s2)
    assume(abs(m) ** 2 > 1e-6)
    rho1, rho2 = density_matrix(s1), density_matrix(s2)
    np.testing.assert_allclose(tpo(s1, s2), rho1 @ rho2 / m, atol=1e-9)


def test_tpo_orthogonal_raises():
    with pytest.raises(DegenerateInputError):
        tpo(BlochAngles(0.0, 0.0), BlochAngles(np.pi, 0.0))


def test_vector_to_angles_rejects_non_unit():
    with pytest.raises(ValidationError):
        vector_to_angles([0.0, 0.0, 2.0])


def test_pole_convention():
    s = vector_to_angles(BlochVector(0.0, 0.0, 1.0))
    assert s.theta == 0.0 and s.phi == 0.0
    assert s.at_pole


def test_vectorised_helpers(rng):
    th = rng.uniform(0.01, np.pi - 0.01, 50)
    ph = np.cumsum(rng.uniform(-0.5, 0.5, 50))
    r = vectors_from_angles(th, ph)
    th2, ph2 = angles_from_vectors(r)
    np.testing.assert_allclose(th2, th, atol=1e-12)
    np.testing.assert_allclose(np.cos(ph2 - ph), 1.0, atol=1e-12)
    w2 = tpf_norm_sq_many(r[:-1], r[1:])
    assert np.all((0 <= w2) & (w2 <= 1))
    np.testing.assert_allclose(w2, [tpf_norm_sq(a, b) for a, b in zip(r[:-1], r[1:])], atol=1e-15)
