"""Memory-made magnetic fields and Hermitian generators for the one-qubit models.

Every Hamiltonian here is a 2x2 Hermitian matrix ``H = h0 * 1 + B.sigma / 2``.
Only the traceless part matters for the dynamics, which is then
``dr/dt = B x r`` on the Bloch sphere. The closed-form fields below are the
fields of the following memory monomials (``rho`` is the present state,
``rho_a`` and ``rho_b`` the states a time ``a`` and ``b`` ago):

========  =================================================================
model     Hamiltonian
========  =================================================================
qmm11     ``mu rho_a``
qmm22     ``mu rho_a + lam rho_a rho + conj(lam) rho rho_a``
qmm23     qmm22 with ``mu = 0`` plus ``eta rho_a rho rho_a``
qmm33     ``kappa rho_a rho_b rho + conj(kappa) rho rho_b rho_a``
hybrid22  qmm22 plus a constant external field ``B_ext``
========  =================================================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError
from .qubit import PAULI, BlochAngles, _vec, density_matrix

Field3 = np.ndarray  # shape (3,), effective magnetic field (bx, by, bz)


@dataclass(frozen=True)
class CouplingSet:
    """All Hamiltonian parameters; the model decides which entries are read.

    ``mu`` multiplies ``rho_{t-a}``. For qmm22 the dynamics depends on ``mu`` and
    ``lambda_re`` only through ``mu_hat = mu + lambda_re``. ``mu_now`` (the
    coefficient of ``rho_t``) is accepted but is dynamically inert because
    ``rho_t`` commutes with itself.
    """

    mu: float = 0.0
    lambda_re: float = 0.0
    lambda_im: float = 0.0
    eta: float = 0.0
    kappa_re: float = 0.0
    kappa_im: float = 0.0
    b_ext: tuple[float, float, float] = (0.0, 0.0, 0.0)
    b_kicker_y: float = 0.0
    mu_now: float = 0.0

    def __post_init__(self):
        values = [self.mu, self.lambda_re, self.lambda_im, self.eta, self.kappa_re,
                  self.kappa_im, self.b_kicker_y, self.mu_now, *self.b_ext]
        if len(self.b_ext) != 3:
            raise ValidationError("b_ext must have three components")
        if not all(np.isfinite(v) for v in values):
            raise ValidationError("all couplings must be finite")

    @property
    def mu_hat(self) -> float:
        return self.mu + self.lambda_re

    def as_params(self) -> np.ndarray:
        """Flat parameter vector consumed by the compiled kernels."""
        return np.array(
            [self.mu, self.lambda_re, self.lambda_im, self.eta, self.kappa_re,
             self.kappa_im, *self.b_ext],
            dtype=float,
        )


@dataclass(frozen=True)
class MonomialSpec:
    """One monomial ``coupling * rho_{i1} ... rho_{ir}`` of a generic Hamiltonian."""

    coupling: complex
    memory_indices: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        idx = tuple(int(i) for i in self.memory_indices)
        object.__setattr__(self, "memory_indices", idx)
        if not idx:
            raise ValidationError("a monomial needs at least one memory index")
        if any(i == j for i, j in zip(idx, idx[1:])):
            raise ValidationError(f"adjacent memory indices must differ: {idx}")


def field_qmm_11(r_past, mu: float) -> Field3:
    return mu * _vec(r_past)


def field_qmm_22(r_past, r_now, mu_hat_past: float, mu_hat_now: float, lambda_im: float) -> Field3:
    ra, r = _vec(r_past), _vec(r_now)
    return mu_hat_past * ra + mu_hat_now * r - lambda_im * np.cross(ra, r)


def field_qmm_23(r_past, r_now, lambda_re: float, lambda_im: float, eta: float,
                 mu: float = 0.0) -> Field3:
    ra, r = _vec(r_past), _vec(r_now)
    coeff = mu + lambda_re + 0.5 * eta * (1.0 + ra @ r)
    return lambda_re * r + coeff * ra - lambda_im * np.cross(ra, r)


def field_qmm_33(r_a, r_b, r_now, kappa_re: float, kappa_im: float) -> Field3:
    ra, rb, r = _vec(r_a), _vec(r_b), _vec(r_now)
    herm = (ra + rb + r) + (ra @ rb) * r - (ra @ r) * rb + (rb @ r) * ra
    anti = np.cross(ra, rb) + np.cross(rb, r) + np.cross(ra, r)
    return 0.5 * kappa_re * herm - 0.5 * kappa_im * anti


def field_kicker(b_kicker_y: float) -> Field3:
    return np.array([0.0, float(b_kicker_y), 0.0])


def field_hybrid(qmm: Field3, b_ext) -> Field3:
    return np.asarray(qmm, dtype=float) + np.asarray(b_ext, dtype=float)


def induced_velocity(field_vec: Field3, r) -> np.ndarray:
    """Bloch-vector velocity ``B x r`` generated by a field."""
    return np.cross(np.asarray(field_vec, float), _vec(r))


def field_from_matrix(h: np.ndarray) -> Field3:
    """Field of the traceless part: ``B_i = Tr(H sigma_i)``."""
    return np.array([np.trace(h @ PAULI[i]).real for i in range(3)])


def matrix_from_field(field_vec: Field3, trace_part: float = 0.0) -> np.ndarray:
    return trace_part * np.eye(2) + 0.5 * np.einsum("i,ijk->jk", np.asarray(field_vec, float), PAULI)


def generic_qmm_hamiltonian(monomials: Sequence[MonomialSpec],
                            memories: Sequence[BlochAngles]) -> np.ndarray:
    """Sum of ``lam * rho_{i1}...rho_{ir} + conj(lam) * rho_{ir}...rho_{i1}``.

    A palindromic index string is already self-adjoint and is counted once with
    the real part of its coupling, so ``[MonomialSpec(mu, (0,))]`` gives
    ``mu * rho_0``.
    """
    rhos = [density_matrix(s) for s in memories]
    h = np.zeros((2, 2), dtype=complex)
    for mono in monomials:
        for i in mono.memory_indices:
            if not 0 <= i < len(rhos):
                raise ValidationError(f"memory index {i} out of range for {len(rhos)} memories")
        prod = np.eye(2, dtype=complex)
        for i in mono.memory_indices:
            prod = prod @ rhos[i]
        lam = complex(mono.coupling)
        if mono.memory_indices == mono.memory_indices[::-1]:
            h += lam.real * prod
        else:
            h += lam * prod + np.conj(lam) * prod.conj().T
    return h


Poly = Callable[[float], complex] | Sequence[complex]


def _poly_eval(poly: Poly, w: float) -> complex:
    if callable(poly):
        return complex(poly(w))
    return complex(sum(c * w**k for k, c in enumerate(poly)))


def schrodinger_functions_2L(w2: float, m: complex, mu_poly: Poly, lambda_poly: Poly,
                             lambda_conj_poly: Poly | None = None) -> tuple[complex, complex]:
    """Retarded and present-time functions of the two-memory Schrodinger equation.

    For a two-memory Hamiltonian the equation reads
    ``i d|psi_t>/dt = S_R |psi_{t-a}> + S_N |psi_t>`` with
    ``S_R = (P_mu(w^2) + P_lam(w^2)) m`` and ``S_N = P_lam*(w^2) w^2``.
    Polynomials are given as coefficient lists in powers of ``w^2`` or as
    callables. When ``lambda_conj_poly`` is omitted the complex conjugate of
    ``lambda_poly`` is used.
    """
    p_mu = _poly_eval(mu_poly, w2)
    p_lam = _poly_eval(lambda_poly, w2)
    if lambda_conj_poly is None:
        p_lam_conj = np.conj(p_lam)
    else:
        p_lam_conj = _poly_eval(lambda_conj_poly, w2)
    s_r = (p_mu + p_lam) * m
    s_n = p_lam_conj * w2
    return complex(s_r), complex(s_n)
