"""Average fidelity and fidelity deviation of single-qubit channels.

For a channel ``O`` acting on a pure input ``psi``, the figure of merit is the
overlap with the orthogonal state, ``f(psi) = <psi_perp| O(psi) |psi_perp>``.
Averaging over the uniform (Haar) measure on pure states gives the average
fidelity ``F`` and its spread ``Delta = sqrt(<f^2> - F^2)``.

Two independent routes are implemented:

* closed forms in the process-matrix entries (basis order I, x, y, z):

      F       = (2/3) (chi_xx + chi_yy + chi_zz)
      Delta^2 = (4/45) (chi_xx^2 + chi_yy^2 + chi_zz^2
                        - chi_xx chi_yy - chi_xx chi_zz - chi_yy chi_zz)
              + (4/15) (3 (|chi_xy|^2 + |chi_xz|^2 + |chi_yz|^2)
                        - 2 Re[chi_xy^2 + chi_xz^2 + chi_yz^2])

  (identity-row entries never contribute: ``<psi_perp|I|psi> = 0``);

* direct numerical quadrature of ``f`` and ``f^2`` over the sphere, which
  serves as the oracle for the closed forms and never touches them.

The first-order perturbation predictors for the jittered channels live here
too, as does the sensitivity law ``mean Delta_N = sqrt(8/15) delta_r / sqrt(N)``
(the mean is the quadratic mean over the error ensemble; see
``predicted_mean_deviation``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channels import AxisSet, Channel, GeneratorErrorDraw, axis_set
from .pauli import ValidationError

ALPHA = math.sqrt(8.0 / 15.0)

# Delta^2 values between -NEGATIVE_VARIANCE_TOL and 0 are round-off and are
# clamped; anything lower signals an invalid process matrix.
NEGATIVE_VARIANCE_TOL = 1e-9


def chi_ideal() -> np.ndarray:
    """Process matrix of the ideal channel: diag(0, 1/3, 1/3, 1/3)."""
    return np.diag([0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).astype(complex)


def check_chi(chi: np.ndarray, require_tp: bool = False, atol: float = 1e-10) -> np.ndarray:
    """Validate a process matrix: Hermitian, optionally trace preserving.

    Positivity is deliberately not required; tomographic reconstructions may
    violate it and the fidelity formulas do not need it.
    """
    chi = np.asarray(chi, dtype=complex)
    if chi.shape != (4, 4):
        raise ValidationError(f"process matrix must be 4x4, got {chi.shape}")
    if np.abs(chi - chi.conj().T).max() > atol:
        raise ValidationError("process matrix is not Hermitian")
    if require_tp and trace_preservation_residual(chi) > 1e-8:
        raise ValidationError("process matrix is not trace preserving")
    return chi


def trace_preservation_residual(chi: np.ndarray) -> float:
    """``max |sum_ij chi_ij sigma_j sigma_i - I|`` (zero for a TP channel)."""
    from .pauli import PAULIS

    m = np.einsum("ij,jab,ibc->ac", chi, PAULIS, PAULIS)
    return float(np.abs(m - np.eye(2)).max())


def fidelity_closed_form(chi: np.ndarray) -> float:
    """Average fidelity from the process matrix."""
    chi = check_chi(chi)
    return (2.0 / 3.0) * float(chi[1, 1].real + chi[2, 2].real + chi[3, 3].real)


def deviation_closed_form(chi: np.ndarray) -> float:
    """Fidelity deviation from the process matrix.

    Raises if the quadratic form is more negative than round-off allows,
    which signals an invalid input rather than numerical noise.
    """
    chi = check_chi(chi)
    a, b, c = chi[1, 1].real, chi[2, 2].real, chi[3, 3].real
    o12, o13, o23 = chi[1, 2], chi[1, 3], chi[2, 3]
    # difference/split forms of the published quadratic form; algebraically
    # identical but free of the cancellation that otherwise floors Delta
    # near 1e-9 for an ideal channel:
    #   a^2+b^2+c^2-ab-ac-bc          = [(a-b)^2 + (a-c)^2 + (b-c)^2] / 2
    #   3|z|^2 - 2 Re(z^2)            = Re(z)^2 + 5 Im(z)^2
    diag = ((a - b) ** 2 + (a - c) ** 2 + (b - c) ** 2) / 2.0
    off = sum(z.real**2 + 5.0 * z.imag**2 for z in (o12, o13, o23))
    d2 = (4.0 / 45.0) * diag + (4.0 / 15.0) * off
    if d2 < -NEGATIVE_VARIANCE_TOL:
        raise ValidationError(f"variance form is negative beyond round-off: {d2!r}")
    return math.sqrt(max(d2, 0.0))


# ---------------------------------------------------------------------------
# quadrature oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Grid for the sphere average.

    ``rule='gauss'`` places Gauss-Legendre nodes in cos(theta) and a uniform
    periodic grid in phi; the integrands are low-degree trigonometric
    polynomials, so this rule is exact at any sensible resolution.  The plain
    theta-trapezoid rule is kept for convergence cross-checks; its O(h^2)
    error at the default grid is around 1e-5 and it should not be used where
    1e-6 agreement is asserted.
    """

    n_theta: int = 201
    n_phi: int = 401
    rule: str = "gauss"

    def __post_init__(self):
        if self.n_theta < 3 or self.n_phi < 5:
            raise ValidationError("quadrature grid must be at least 3 x 5")
        if self.rule not in ("gauss", "trapezoid"):
            raise ValidationError(f"unknown quadrature rule {self.rule!r}")


@dataclass(frozen=True)
class FidelityReport:
    fidelity: float
    deviation: float
    method: str


@lru_cache(maxsize=8)
def _grid(spec: QuadratureSpec):
    """Nodes, normalized weights and overlap coefficients ``C_i`` on the grid.

    ``C_i(theta, phi) = <psi_perp| sigma_i |psi>``; every integrand used here
    is a bilinear or quartic combination of these.
    """
    if spec.rule == "gauss":
        x, wx = np.polynomial.legendre.leggauss(spec.n_theta)
        theta = np.arccos(x)
        w_theta = wx / 2.0
        phi = np.linspace(0.0, 2.0 * np.pi, spec.n_phi, endpoint=False)
        w_phi = np.full(spec.n_phi, 1.0 / spec.n_phi)
    else:
        theta = np.linspace(0.0, np.pi, spec.n_theta)
        w_theta = np.full(spec.n_theta, np.pi / (spec.n_theta - 1))
        w_theta[0] /= 2.0
        w_theta[-1] /= 2.0
        w_theta = w_theta * np.sin(theta) / 2.0
        phi = np.linspace(0.0, 2.0 * np.pi, spec.n_phi)
        w_phi = np.full(spec.n_phi, 1.0 / (spec.n_phi - 1))
        w_phi[0] /= 2.0
        w_phi[-1] /= 2.0
    weights = np.outer(w_theta, w_phi)

    t = theta[:, None]
    p = phi[None, :]
    c = np.cos(t / 2.0)
    s = np.sin(t / 2.0)
    eip = np.exp(1j * p)
    eim = np.exp(-1j * p)
    c0 = np.zeros((spec.n_theta, spec.n_phi), dtype=complex)
    c1 = s * s * eip - c * c * eim
    c2 = -1j * (s * s * eip + c * c * eim)
    c3 = np.broadcast_to((2.0 * s * c).astype(complex), c1.shape)
    coeffs = np.stack([c0, c1, c2, c3])
    for arr in (weights, coeffs):
        arr.setflags(write=False)
    return weights, coeffs


def fidelity_quadrature(channel_or_chi, spec: QuadratureSpec = QuadratureSpec()) -> FidelityReport:
    """Sphere-averaged fidelity and deviation by direct numerical integration.

    Accepts either a ``Channel`` (evaluates ``sum_k w_k |<psi_perp|U_k|psi>|^2``
    pointwise) or a 4x4 process matrix.  Independent of the closed forms.
    """
    weights, coeffs = _grid(spec)
    if isinstance(channel_or_chi, Channel):
        from .pauli import pauli_coefficients

        kraus_coeffs = np.stack([pauli_coefficients(op) for op in channel_or_chi.ops])
        amplitudes = np.einsum("ki,iab->kab", kraus_coeffs, coeffs)
        f = np.einsum("k,kab->ab", channel_or_chi.weights, np.abs(amplitudes) ** 2)
    else:
        chi = check_chi(channel_or_chi)
        f = np.einsum("ij,iab,jab->ab", chi, coeffs, coeffs.conj()).real
    mean_f = float(np.sum(weights * f))
    # two-pass variance: exact cancellation when f is constant on the grid
    var = float(np.sum(weights * (f - mean_f) ** 2))
    return FidelityReport(fidelity=mean_f, deviation=math.sqrt(max(var, 0.0)), method="quadrature")


def fidelity_report_closed_form(chi: np.ndarray) -> FidelityReport:
    return FidelityReport(
        fidelity=fidelity_closed_form(chi),
        deviation=deviation_closed_form(chi),
        method="closed_form",
    )


# ---------------------------------------------------------------------------
# first-order perturbation predictors
# ---------------------------------------------------------------------------

def first_order_delta_chi(axes: AxisSet, eps: np.ndarray) -> np.ndarray:
    """First-order shift of the process matrix under generator jitter.

    For each axis, writing ``u_i = eps_i x n_i`` and ``par_i = eps_i . n_i``,
    the shift is

        dchi[0, b] = (i/N) sum_i par_i n_ib           (and its conjugate)
        dchi[a, b] = -(1/N) sum_i (u_ia n_ib + n_ia u_ib)

    Only the transverse part of each error vector reaches the lower 3x3
    block, so axis-parallel errors never move F or Delta.
    """
    eps = np.asarray(eps, dtype=float)
    n = axes.n_axes
    if eps.shape != (n, 3):
        raise ValidationError(f"eps must be ({n}, 3) for this axis set")
    par = np.einsum("ik,ik->i", eps, axes.axes)
    u = np.cross(eps, axes.axes)
    d = np.zeros((4, 4), dtype=complex)
    row = 1j * np.einsum("i,i,ib->b", axes.weights, par, axes.axes)
    d[0, 1:] = row
    d[1:, 0] = -row
    d[1:, 1:] = -np.einsum("i,ia,ib->ab", axes.weights, u, axes.axes)
    d[1:, 1:] += d[1:, 1:].T.copy()
    return d


def predicted_delta_chi_first_order(n: int, draw: GeneratorErrorDraw) -> np.ndarray:
    """First-order process-matrix shift for the built-in N=3 or N=4 sets."""
    if n not in (3, 4):
        raise ValidationError("first-order predictor matrices are defined for N=3 and N=4")
    if draw.n_axes != n:
        raise ValidationError(f"draw has {draw.n_axes} vectors, expected {n}")
    return first_order_delta_chi(axis_set(n), draw.eps)


def first_order_deviation(dchi: np.ndarray) -> float:
    """Deviation of ``chi_ideal() + dchi`` for a traceless first-order shift."""
    return deviation_closed_form(chi_ideal() + np.asarray(dchi, dtype=complex))


def delta3_closed(draw: GeneratorErrorDraw) -> float:
    """Closed-form first-order deviation of the jittered N=3 channel."""
    if draw.n_axes != 3:
        raise ValidationError("delta3_closed needs a 3-axis draw")
    return first_order_deviation(predicted_delta_chi_first_order(3, draw))


def delta4_closed(draw: GeneratorErrorDraw) -> float:
    """Closed-form first-order deviation of the jittered N=4 channel."""
    if draw.n_axes != 4:
        raise ValidationError("delta4_closed needs a 4-axis draw")
    return first_order_deviation(predicted_delta_chi_first_order(4, draw))


# ---------------------------------------------------------------------------
# sensitivity law
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensitivityModel:
    """Sensitivity of the N-axis channel to generator jitter: S_N = alpha/sqrt(N)."""

    n: int
    alpha: float = ALPHA

    @property
    def sensitivity(self) -> float:
        return self.alpha / math.sqrt(self.n)

    def mean_deviation(self, delta_r: float) -> float:
        return self.sensitivity * delta_r


def predicted_mean_deviation(n: int, delta_r: float) -> float:
    """``sqrt(8/15) delta_r / sqrt(N)``.

    This is the quadratic mean of the deviation over the error ensemble
    (the first-order deviation is the length of a zero-mean random vector, so
    its second moment is what the sensitivity law constrains); the sweep
    aggregates report the same statistic.
    """
    if n < 3:
        raise ValidationError("the stochastic construction needs at least 3 axes")
    if delta_r < 0:
        raise ValidationError("delta_r must be non-negative")
    return SensitivityModel(n).mean_deviation(delta_r)


def mean_fidelity_prediction(n: int) -> float:
    """Mean average-fidelity under small errors: 2/3 for every N (stationary)."""
    if n < 3:
        raise ValidationError("the stochastic construction needs at least 3 axes")
    return 2.0 / 3.0
