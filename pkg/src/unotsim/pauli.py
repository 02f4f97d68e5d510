"""Exact single-qubit linear algebra: Pauli operators, pure states, Bloch vectors.

Everything here is plain ``numpy`` on 2x2 complex arrays.  All returned arrays
are freshly allocated; callers may treat them as immutable values.

Conventions (fixed once, used by every other module):

* Pauli basis order is ``(I, sigma_x, sigma_y, sigma_z)`` in the standard
  computational basis.
* Absolute tolerance for exact-arithmetic checks (Hermiticity, trace,
  unitarity) is ``ATOL = 1e-12``; unit vectors and eigenvalue floors use the
  looser ``AXIS_ATOL = 1e-10``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ATOL = 1e-12
AXIS_ATOL = 1e-10

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z])

for _m in (SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z, PAULIS):
    _m.setflags(write=False)


class ValidationError(ValueError):
    """An input violates one of the documented invariants."""


def check_density_matrix(rho: np.ndarray, atol: float = ATOL) -> np.ndarray:
    """Validate a 2x2 density matrix (Hermitian, unit trace, PSD up to AXIS_ATOL)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValidationError(f"density matrix must be 2x2, got {rho.shape}")
    if not np.all(np.isfinite(rho.view(float))):
        raise ValidationError("density matrix has non-finite entries")
    if np.abs(rho - rho.conj().T).max() > atol:
        raise ValidationError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol or abs(np.trace(rho).imag) > atol:
        raise ValidationError("density matrix trace is not 1")
    if np.linalg.eigvalsh(rho).min() < -AXIS_ATOL:
        raise ValidationError("density matrix has a negative eigenvalue")
    return rho


def check_unitary(u: np.ndarray, atol: float = ATOL) -> np.ndarray:
    """Validate that ``u`` is a 2x2 unitary to ``atol``."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValidationError(f"unitary must be 2x2, got {u.shape}")
    if np.abs(u.conj().T @ u - SIGMA_0).max() > atol:
        raise ValidationError("matrix is not unitary")
    return u


@dataclass(frozen=True)
class PureStateAngles:
    """Spherical parameterization of a pure qubit state.

    ``theta`` in [0, pi], ``phi`` in [0, 2*pi):
    ``|psi> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>``.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise ValidationError(f"theta must be in [0, pi], got {self.theta}")
        if not (0.0 <= self.phi < 2.0 * math.pi):
            raise ValidationError(f"phi must be in [0, 2*pi), got {self.phi}")


def ket(angles: PureStateAngles) -> np.ndarray:
    """State vector of the parameterized pure state."""
    c, s = math.cos(angles.theta / 2), math.sin(angles.theta / 2)
    return np.array([c, np.exp(1j * angles.phi) * s], dtype=complex)


def ket_orthogonal(angles: PureStateAngles) -> np.ndarray:
    """``|psi_perp> = sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>``."""
    c, s = math.cos(angles.theta / 2), math.sin(angles.theta / 2)
    return np.array([s, -np.exp(1j * angles.phi) * c], dtype=complex)


def pure_state(angles: PureStateAngles) -> np.ndarray:
    """Rank-1 projector onto the parameterized pure state."""
    v = ket(angles)
    return np.outer(v, v.conj())


def orthogonal_state(angles: PureStateAngles) -> np.ndarray:
    """Projector onto the state orthogonal to ``pure_state(angles)``."""
    v = ket_orthogonal(angles)
    return np.outer(v, v.conj())


def pauli_dot(n: np.ndarray) -> np.ndarray:
    """Hermitian unitary ``n . sigma`` for a unit 3-vector ``n``.

    Squares to the identity; used both as a pi rotation axis and as a Kraus
    operator of the stochastic channels.
    """
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise ValidationError(f"axis must be a 3-vector, got shape {n.shape}")
    if abs(np.linalg.norm(n) - 1.0) > AXIS_ATOL:
        raise ValidationError(f"axis must be normalized, |n| = {np.linalg.norm(n)!r}")
    return n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z


def bloch_of(rho: np.ndarray) -> np.ndarray:
    """Bloch vector ``r_k = tr(rho sigma_k)`` of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    return np.array(
        [
            np.trace(rho @ SIGMA_X).real,
            np.trace(rho @ SIGMA_Y).real,
            np.trace(rho @ SIGMA_Z).real,
        ]
    )


def density_of(r: np.ndarray) -> np.ndarray:
    """Density matrix ``(I + r . sigma) / 2``; rejects ``|r| > 1`` beyond tolerance."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValidationError(f"Bloch vector must be a 3-vector, got shape {r.shape}")
    if np.linalg.norm(r) > 1.0 + AXIS_ATOL:
        raise ValidationError(f"Bloch vector lies outside the sphere: |r| = {np.linalg.norm(r)!r}")
    return (SIGMA_0 + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z) / 2.0


def conjugate_by(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``U rho U^dagger``."""
    u = np.asarray(u, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    return u @ rho @ u.conj().T


def pauli_coefficients(op: np.ndarray) -> np.ndarray:
    """Expansion coefficients ``c_k = tr(sigma_k op) / 2`` so ``op = sum c_k sigma_k``."""
    op = np.asarray(op, dtype=complex)
    return np.array(
        [
            (op[0, 0] + op[1, 1]) / 2.0,
            (op[0, 1] + op[1, 0]) / 2.0,
            1j * (op[0, 1] - op[1, 0]) / 2.0,
            (op[0, 0] - op[1, 1]) / 2.0,
        ]
    )


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``(1/2) ||a - b||_1`` for Hermitian matrices."""
    return 0.5 * float(np.abs(np.linalg.eigvalsh(np.asarray(a) - np.asarray(b))).sum())


def haar_random_unitary(gen: np.random.Generator) -> np.ndarray:
    """Haar-distributed 2x2 unitary (QR of a complex Ginibre matrix)."""
    z = (gen.normal(size=(2, 2)) + 1j * gen.normal(size=(2, 2))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


_MASK64 = (1 << 64) - 1
# golden-ratio increment, same role as in splitmix64 / boost hash_combine
_MIX = 0x9E3779B97F4A7C15


def _combine(h: int, value: int) -> int:
    v = value & _MASK64
    # splitmix64 finalizer on the value, then fold into the running hash
    v = (v + _MIX) & _MASK64
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & _MASK64
    v ^= v >> 31
    return (h ^ (v + _MIX + ((h << 6) & _MASK64) + (h >> 2))) & _MASK64


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream: Philox keyed by ``(seed, stream)``.

    Identical ``(seed, stream)`` pairs produce identical draw sequences on
    every platform, and distinct streams are statistically independent, so
    parallel trials can each own a stream and the schedule never matters.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = [self.seed & _MASK64, self.stream & _MASK64]
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, *indices: int) -> "RngStream":
        """Derived stream for a labelled subtask (model id, grid index, trial, ...)."""
        h = self.stream & _MASK64
        for ix in indices:
            h = _combine(h, int(ix))
        return RngStream(self.seed, h)
