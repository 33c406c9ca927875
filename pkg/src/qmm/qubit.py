"""Exact one-qubit pure-state representations and two-point memory quantities.

A pure qubit state is carried in three interchangeable forms:

* Bloch angles ``(theta, phi)``,
* the unit Bloch vector ``r = (sin(theta)cos(phi), sin(theta)sin(phi), cos(theta))``,
* the ket ``(cos(theta/2), sin(theta/2) exp(i phi))``.

The two-point function (TPF) ``m = <psi_1|psi_2>`` and its squared norm
``w^2 = (1 + r_1.r_2)/2`` are the building blocks of every memory-made
Hamiltonian in :mod:`qmm.hamiltonians`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ValidationError

#: Below this value of ``sin(theta)`` the azimuth is treated as undefined.
POLE_TOL = 1e-9

#: Maximum accepted deviation of ``|r|`` from one in :func:`vector_to_angles`.
UNIT_NORM_TOL = 1e-6

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
IDENTITY = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class BlochAngles:
    """Polar angle ``theta`` and azimuth ``phi`` (radians, ``phi`` unwrapped)."""

    theta: float
    phi: float

    def canonical(self) -> "BlochAngles":
        """Return the equivalent state with ``theta`` folded into ``[0, pi]``.

        Folding ``theta -> -theta`` is compensated by ``phi -> phi + pi`` so that
        the ket changes at most by a global phase.
        """
        th = float(np.mod(self.theta, 2.0 * np.pi))
        ph = float(self.phi)
        if th > np.pi:
            th = 2.0 * np.pi - th
            ph += np.pi
        return BlochAngles(th, ph)

    @property
    def phi_mod(self) -> float:
        """Azimuth reduced into ``[0, 2 pi)``."""
        return float(np.mod(self.phi, 2.0 * np.pi))

    @property
    def at_pole(self) -> bool:
        """True when the azimuth carries no physical information."""
        return abs(np.sin(self.theta)) < POLE_TOL


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, v) -> "BlochVector":
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))


@dataclass(frozen=True)
class PureKet:
    up: complex
    down: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.up, self.down], dtype=complex)


def _vec(r) -> np.ndarray:
    if isinstance(r, BlochVector):
        return r.as_array()
    return np.asarray(r, dtype=float)


def angles_to_ket(s: BlochAngles) -> PureKet:
    return PureKet(complex(np.cos(s.theta / 2.0)), np.sin(s.theta / 2.0) * np.exp(1j * s.phi))


def angles_to_vector(s: BlochAngles) -> BlochVector:
    st = np.sin(s.theta)
    return BlochVector(st * np.cos(s.phi), st * np.sin(s.phi), float(np.cos(s.theta)))


def vector_to_angles(r) -> BlochAngles:
    """Invert :func:`angles_to_vector`; at the poles ``phi`` is returned as 0."""
    v = _vec(r)
    n = float(np.linalg.norm(v))
    if abs(n - 1.0) > UNIT_NORM_TOL:
        raise ValidationError(f"Bloch vector norm {n!r} deviates from 1 by more than {UNIT_NORM_TOL}")
    v = v / n
    theta = float(np.arctan2(np.hypot(v[0], v[1]), v[2]))
    phi = float(np.arctan2(v[1], v[0])) if np.hypot(v[0], v[1]) > 0.0 else 0.0
    return BlochAngles(theta, phi)


def vectors_from_angles(theta, phi) -> np.ndarray:
    """Vectorised :func:`angles_to_vector` returning an ``(n, 3)`` array."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def angles_from_vectors(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised inverse: ``theta`` in ``[0, pi]`` and a continuously unwrapped ``phi``."""
    r = np.asarray(r, dtype=float)
    rho = np.hypot(r[..., 0], r[..., 1])
    theta = np.arctan2(rho, r[..., 2])
    phi = np.unwrap(np.arctan2(r[..., 1], r[..., 0]), axis=-1)
    return theta, phi


def density_matrix(s: BlochAngles) -> np.ndarray:
    k = angles_to_ket(s).as_array()
    return np.outer(k, k.conj())


def density_from_vector(r) -> np.ndarray:
    """``rho = (1 + r.sigma)/2``."""
    v = _vec(r)
    return 0.5 * (IDENTITY + np.einsum("i,ijk->jk", v, PAULI))


def tpf(s1: BlochAngles, s2: BlochAngles) -> complex:
    """Two-point function ``m(s1, s2) = <psi_1|psi_2>``."""
    return complex(
        np.cos(s1.theta / 2) * np.cos(s2.theta / 2)
        + np.sin(s1.theta / 2) * np.sin(s2.theta / 2) * np.exp(1j * (s2.phi - s1.phi))
    )


def tpf_norm_sq(r1, r2) -> float:
    """Memory fidelity ``w^2 = |m|^2 = (1 + r1.r2)/2``, clipped into ``[0, 1]``."""
    w2 = 0.5 * (1.0 + float(np.dot(_vec(r1), _vec(r2))))
    return min(1.0, max(0.0, w2))


def tpf_norm_sq_many(r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """Row-wise :func:`tpf_norm_sq` for ``(n, 3)`` arrays."""
    w2 = 0.5 * (1.0 + np.einsum("ij,ij->i", np.asarray(r1, float), np.asarray(r2, float)))
    return np.clip(w2, 0.0, 1.0)


def density_product(r1, r2) -> np.ndarray:
    """``rho_1 rho_2 = [(1 + r1.r2) 1 + (r1 + r2 + i r1 x r2).sigma] / 4``."""
    v1, v2 = _vec(r1), _vec(r2)
    c = v1 + v2 + 1j * np.cross(v1, v2)
    return 0.25 * ((1.0 + v1 @ v2) * IDENTITY + np.einsum("i,ijk->jk", c, PAULI))


def tpo(s1: BlochAngles, s2: BlochAngles) -> np.ndarray:
    """Two-point operator ``M_12 = |psi_1><psi_2| = rho_1 rho_2 / m(s1, s2)``."""
    m = tpf(s1, s2)
    if abs(m) ** 2 < 1e-14:
        raise DegenerateInputError("tpo is undefined for orthogonal states (w^2 = 0)")
    k1 = angles_to_ket(s1).as_array()
    k2 = angles_to_ket(s2).as_array()
    return np.outer(k1, k2.conj())
