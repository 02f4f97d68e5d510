"""Pure-NumPy kernel backend (vectorized fallback for the compiled core).

The functions here mirror ``_core`` exactly: batched construction of process
matrices for the Monte Carlo trial loops plus the closed-form fidelity pair.
Inputs are float64/complex128 arrays prepared by the package wrapper.
"""

import numpy as np

BACKEND = "purepy"


def chi_from_unitary_kraus(weights, ops):
    """Process matrix of ``rho -> sum_k w_k U_k rho U_k^dagger`` in the Pauli basis."""
    c = np.stack(
        [
            (ops[:, 0, 0] + ops[:, 1, 1]) / 2.0,
            (ops[:, 0, 1] + ops[:, 1, 0]) / 2.0,
            1j * (ops[:, 0, 1] - ops[:, 1, 0]) / 2.0,
            (ops[:, 0, 0] - ops[:, 1, 1]) / 2.0,
        ],
        axis=1,
    )
    return np.einsum("k,ki,kj->ij", weights, c, c.conj())


def generator_chi_batch(axes, eps):
    """Process matrices of perturbed axis-flip channels, one per trial.

    Each Kraus operator is ``exp(i e . sigma) (n . sigma)`` with ``e`` the
    trial's error vector for that axis; expanding in the Pauli basis gives
    coefficients ``(i sin|e| (ehat.n), cos|e| n - sin|e| (ehat x n))``.

    axes: (N, 3) unit rows; eps: (T, N, 3).  Returns (T, 4, 4) complex.
    """
    t, n = eps.shape[0], axes.shape[0]
    norm = np.sqrt(np.einsum("tnk,tnk->tn", eps, eps))
    safe = np.where(norm == 0.0, 1.0, norm)
    ehat = eps / safe[..., None]
    sin = np.sin(norm)
    c0 = 1j * sin * np.einsum("tnk,nk->tn", ehat, axes)
    cvec = np.cos(norm)[..., None] * axes[None, :, :] - sin[..., None] * np.cross(
        ehat, np.broadcast_to(axes, (t, n, 3))
    )
    coef = np.concatenate([c0[..., None], cvec.astype(complex)], axis=2)
    return np.einsum("tni,tnj->tij", coef, coef.conj()) / n


def _qwp_entries(a):
    c, s = np.cos(a), np.sin(a)
    w00 = c * c + 1j * s * s
    w01 = (1.0 - 1j) * c * s
    w11 = s * s + 1j * c * c
    return w00, w01, w11


def waveplate_chi_batch(base_angles, offsets):
    """Process matrices of plate-jittered channels, one per trial.

    Each axis is realized as QWP(q1) HWP(h) QWP(q2); the trial's offsets are
    added to the three plate angles and the composite is rebuilt exactly.

    base_angles: (N, 3) radians; offsets: (T, N, 3).  Returns (T, 4, 4).
    """
    ang = base_angles[None, :, :] + offsets  # (T, N, 3)
    q1_00, q1_01, q1_11 = _qwp_entries(ang[..., 0])
    q2_00, q2_01, q2_11 = _qwp_entries(ang[..., 2])
    h2 = 2.0 * ang[..., 1]
    h00 = np.cos(h2)
    h01 = np.sin(h2)

    # m = HWP @ QWP(q2); HWP = [[h00, h01], [h01, -h00]]
    m00 = h00 * q2_00 + h01 * q2_01
    m01 = h00 * q2_01 + h01 * q2_11
    m10 = h01 * q2_00 - h00 * q2_01
    m11 = h01 * q2_01 - h00 * q2_11
    # u = QWP(q1) @ m
    u00 = q1_00 * m00 + q1_01 * m10
    u01 = q1_00 * m01 + q1_01 * m11
    u10 = q1_01 * m00 + q1_11 * m10
    u11 = q1_01 * m01 + q1_11 * m11

    coef = np.stack(
        [
            (u00 + u11) / 2.0,
            (u01 + u10) / 2.0,
            1j * (u01 - u10) / 2.0,
            (u00 - u11) / 2.0,
        ],
        axis=2,
    )
    return np.einsum("tni,tnj->tij", coef, coef.conj()) / base_angles.shape[0]


def fidelity_deviation_batch(chi):
    """Closed-form average fidelity and fidelity deviation per process matrix.

    chi: (T, 4, 4) Hermitian.  Tiny negative variances from round-off are
    clamped to zero; callers that need the invalid-input check use the scalar
    path instead.
    """
    a = chi[:, 1, 1].real
    b = chi[:, 2, 2].real
    c = chi[:, 3, 3].real
    f = (2.0 / 3.0) * (a + b + c)
    o12, o13, o23 = chi[:, 1, 2], chi[:, 1, 3], chi[:, 2, 3]
    # cancellation-free arrangement of the quadratic form (see fidanal)
    diag = ((a - b) ** 2 + (a - c) ** 2 + (b - c) ** 2) / 2.0
    off = (
        o12.real**2 + 5.0 * o12.imag**2
        + o13.real**2 + 5.0 * o13.imag**2
        + o23.real**2 + 5.0 * o23.imag**2
    )
    d2 = (4.0 / 45.0) * diag + (4.0 / 15.0) * off
    return f, np.sqrt(np.clip(d2, 0.0, None))
