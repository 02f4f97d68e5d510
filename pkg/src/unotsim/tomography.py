"""Finite-shot projective measurements, state and process reconstruction.

State tomography uses linear inversion of the three Pauli expectation values
followed by eigenvalue clipping to the nearest physical state.  Process
tomography probes the channel with the informationally complete quartet
``{|0>, |1>, |+>, |+i>}``, reconstructs each output state, solves the linear
relation ``O(rho_k) = sum_ij chi_ij sigma_i rho_k sigma_j`` by least squares,
Hermitizes, and projects onto the trace-preservation constraint.

Every operation has an exact-expectation path (``exact=True``) that replaces
binomial sampling by the exact outcome probabilities, which turns the whole
pipeline into exact linear algebra for the algebraic round-trip tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fidanal import check_chi, trace_preservation_residual
from .pauli import (
    PAULIS,
    RngStream,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ValidationError,
)

BASES = ("X", "Y", "Z")
_BASIS_OP = {"X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}

PROBE_LABELS = ("0", "1", "+", "+i")
PROBE_STATES = np.stack(
    [
        np.array([[1, 0], [0, 0]], dtype=complex),
        np.array([[0, 0], [0, 1]], dtype=complex),
        np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex),
        np.array([[0.5, -0.5j], [0.5j, 0.5]], dtype=complex),
    ]
)
PROBE_STATES.setflags(write=False)


@dataclass(frozen=True)
class MeasurementRecord:
    """Counts of +1 / -1 outcomes of a Pauli measurement.

    Counts are floats so the exact-expectation path can return fractional
    values; they always sum to ``shots``.
    """

    basis: str
    shots: float
    n_plus: float
    n_minus: float

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValidationError(f"basis must be one of {BASES}, got {self.basis!r}")
        if abs(self.n_plus + self.n_minus - self.shots) > 1e-9:
            raise ValidationError("counts must sum to the number of shots")

    @property
    def expectation(self) -> float:
        return (self.n_plus - self.n_minus) / self.shots


def simulate_measurement(
    rho: np.ndarray,
    basis: str,
    shots: int,
    rng: RngStream | None = None,
    exact: bool = False,
) -> MeasurementRecord:
    """Measure ``sigma_basis`` on ``rho``: ``n_plus ~ Binomial(shots, (1+r)/2)``."""
    if basis not in BASES:
        raise ValidationError(f"basis must be one of {BASES}, got {basis!r}")
    if shots < 1:
        raise ValidationError("shots must be at least 1")
    r = float(np.trace(np.asarray(rho, dtype=complex) @ _BASIS_OP[basis]).real)
    p_plus = min(max((1.0 + r) / 2.0, 0.0), 1.0)
    if exact:
        n_plus = shots * p_plus
    else:
        if rng is None:
            raise ValidationError("sampling a measurement needs an RngStream")
        n_plus = float(rng.generator().binomial(shots, p_plus))
    return MeasurementRecord(basis=basis, shots=shots, n_plus=n_plus, n_minus=shots - n_plus)


@dataclass(frozen=True)
class QstResult:
    rho_raw: np.ndarray
    rho_phys: np.ndarray
    shots_per_basis: float


def project_to_physical(rho: np.ndarray) -> np.ndarray:
    """Nearest unit-trace PSD matrix: clip negative eigenvalues, renormalize."""
    rho = np.asarray(rho, dtype=complex)
    vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    vals = np.clip(vals, 0.0, None)
    vals = vals / vals.sum()
    return (vecs * vals) @ vecs.conj().T


def qst_linear_inversion(records) -> QstResult:
    """State reconstruction from one measurement record per Pauli basis."""
    by_basis = {rec.basis: rec for rec in records}
    if sorted(by_basis) != sorted(BASES):
        raise ValidationError(f"need exactly one record per basis {BASES}")
    r = np.array([by_basis[b].expectation for b in BASES])
    rho_raw = (
        np.eye(2, dtype=complex) + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z
    ) / 2.0
    return QstResult(
        rho_raw=rho_raw,
        rho_phys=project_to_physical(rho_raw),
        shots_per_basis=by_basis["X"].shots,
    )


def run_qst(
    rho: np.ndarray,
    shots: int,
    rng: RngStream | None = None,
    exact: bool = False,
) -> QstResult:
    """Measure all three bases and reconstruct; one substream per basis."""
    records = []
    for k, basis in enumerate(BASES):
        sub = rng.substream(k) if rng is not None else None
        records.append(simulate_measurement(rho, basis, shots, sub, exact=exact))
    return qst_linear_inversion(records)


@dataclass(frozen=True)
class QptResult:
    chi_raw: np.ndarray
    chi_tp: np.ndarray
    input_states: np.ndarray
    shots_per_setting: float


def _design_matrix() -> np.ndarray:
    """Rows (probe, entry) x columns (i, j) of ``(sigma_i rho_k sigma_j)[a, b]``."""
    a = np.empty((len(PROBE_STATES) * 4, 16), dtype=complex)
    for k, rho in enumerate(PROBE_STATES):
        for i in range(4):
            for j in range(4):
                block = PAULIS[i] @ rho @ PAULIS[j]
                a[4 * k : 4 * k + 4, 4 * i + j] = block.ravel()
    return a


_DESIGN = _design_matrix()
_DESIGN.setflags(write=False)
assert np.linalg.matrix_rank(_DESIGN) == 16, "probe quartet must determine chi uniquely"

# Frobenius-orthonormal basis of Hermitian 4x4 matrices: 4 diagonal units,
# then (real, imag) pairs for each upper off-diagonal entry.
def _hermitian_basis() -> np.ndarray:
    basis = []
    for i in range(4):
        m = np.zeros((4, 4), dtype=complex)
        m[i, i] = 1.0
        basis.append(m)
    for i in range(4):
        for j in range(i + 1, 4):
            m = np.zeros((4, 4), dtype=complex)
            m[i, j] = m[j, i] = 1.0 / np.sqrt(2.0)
            basis.append(m)
            m = np.zeros((4, 4), dtype=complex)
            m[i, j] = -1j / np.sqrt(2.0)
            m[j, i] = 1j / np.sqrt(2.0)
            basis.append(m)
    return np.stack(basis)


_HERM_BASIS = _hermitian_basis()
_HERM_BASIS.setflags(write=False)


def enforce_trace_preserving(chi: np.ndarray) -> np.ndarray:
    """Frobenius projection of a Hermitian chi onto the affine TP constraint.

    The constraint ``sum_ij chi_ij sigma_j sigma_i = I`` is linear in the 16
    real Hermitian coordinates; the least-norm correction is applied in that
    coordinate system.
    """
    chi = check_chi(chi)
    x = np.array([np.sum(b.conj() * chi).real for b in _HERM_BASIS])
    # constraint functionals: the four real components of the 2x2 Hermitian
    # matrix sum_ij chi_ij sigma_j sigma_i
    rows = []
    target = np.array([1.0, 1.0, 0.0, 0.0])
    for b in _HERM_BASIS:
        m = np.einsum("ij,jab,ibc->ac", b, PAULIS, PAULIS)
        rows.append([m[0, 0].real, m[1, 1].real, m[0, 1].real, m[0, 1].imag])
    a = np.array(rows).T  # (4, 16)
    correction = a.T @ np.linalg.solve(a @ a.T, a @ x - target)
    x_tp = x - correction
    return np.einsum("k,kij->ij", x_tp, _HERM_BASIS)


def run_qpt(
    apply_channel: Callable[[np.ndarray], np.ndarray],
    shots: int = 10_000,
    rng: RngStream | None = None,
    exact: bool = False,
) -> QptResult:
    """Process tomography of ``apply_channel`` with ``shots`` per setting.

    A setting is one (probe, basis) pair, so one run consumes 12 binomial
    draws; each setting owns a substream of ``rng`` derived from its index,
    making the result independent of execution order.  The raw least-squares
    solution is kept alongside the Hermitized, TP-projected estimate.
    """
    if not exact and rng is None:
        raise ValidationError("sampled process tomography needs an RngStream")
    outputs = []
    for k, probe in enumerate(PROBE_STATES):
        out = apply_channel(probe)
        sub = rng.substream(k) if rng is not None else None
        outputs.append(run_qst(out, shots, sub, exact=exact).rho_raw)
    y = np.concatenate([out.ravel() for out in outputs])
    chi_vec, *_ = np.linalg.lstsq(_DESIGN, y, rcond=None)
    chi_raw = chi_vec.reshape(4, 4)
    chi_tp = enforce_trace_preserving((chi_raw + chi_raw.conj().T) / 2.0)
    return QptResult(
        chi_raw=chi_raw,
        chi_tp=chi_tp,
        input_states=PROBE_STATES.copy(),
        shots_per_setting=shots,
    )


__all__ = [
    "BASES",
    "MeasurementRecord",
    "PROBE_LABELS",
    "PROBE_STATES",
    "QptResult",
    "QstResult",
    "enforce_trace_preserving",
    "project_to_physical",
    "qst_linear_inversion",
    "run_qpt",
    "run_qst",
    "simulate_measurement",
    "trace_preservation_residual",
]
