"""Stochastic axis-flip channels, their error models, and process matrices.

The ideal channel mixes pi rotations about N axes drawn from the vertices of
regular polyhedra (octahedron and tetrahedron families).  Whenever the axis
set is isotropic, ``sum_i p_i n_i n_i^T = I/3``, the mixture sends every Bloch
vector ``r`` to ``-r/3``: the optimal approximate universal-NOT channel.

Two operational-error models are provided:

* generator jitter: each flip is followed by ``exp(i e . sigma)`` with a
  random small vector ``e`` (exact exponential, not the first-order form);
* waveplate jitter: each flip is compiled to a QWP-HWP-QWP retarder triple
  and the three fast-axis angles get independent uniform offsets, matching a
  polarization-optics realization with imperfect plate rotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import least_squares

from . import _kernels
from .pauli import (
    ATOL,
    AXIS_ATOL,
    RngStream,
    ValidationError,
    check_density_matrix,
    check_unitary,
    pauli_dot,
)

SUPPORTED_N = (3, 4, 6, 8)

_OCTAHEDRON_HALF = np.eye(3)
_TETRAHEDRON = np.array(
    [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float
) / math.sqrt(3.0)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AxisSet:
    """Rotation axes ``n_i`` with mixing probabilities ``p_i``.

    Construction enforces unit axes, normalized weights, and the isotropy
    condition ``sum_i p_i n_i n_i^T = I/3`` that makes the ideal mixture
    universal.
    """

    axes: np.ndarray
    weights: np.ndarray
    label: str = ""

    def __post_init__(self):
        axes = np.asarray(self.axes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if axes.ndim != 2 or axes.shape[1] != 3 or axes.shape[0] != weights.shape[0]:
            raise ValidationError("axes must be (N, 3) with one weight per axis")
        if np.abs(np.linalg.norm(axes, axis=1) - 1.0).max() > AXIS_ATOL:
            raise ValidationError("every axis must be a unit vector")
        if abs(weights.sum() - 1.0) > ATOL or weights.min() < 0.0:
            raise ValidationError("weights must be probabilities summing to 1")
        second_moment = np.einsum("i,ia,ib->ab", weights, axes, axes)
        if np.abs(second_moment - np.eye(3) / 3.0).max() > AXIS_ATOL:
            raise ValidationError(
                "axis set is not isotropic (sum_i p_i n_i n_i^T != I/3)"
            )
        object.__setattr__(self, "axes", _readonly(axes))
        object.__setattr__(self, "weights", _readonly(weights))

    @property
    def n_axes(self) -> int:
        return self.axes.shape[0]


def axis_set(n: int) -> AxisSet:
    """Built-in isotropic axis set with ``n`` axes and uniform weights.

    n=3: octahedron half {x, y, z}; n=4: the tetrahedron vertices; n=6 and
    n=8 add the opposite vectors ``-n_i`` to the n=3 / n=4 sets.
    """
    if n == 3:
        axes = _OCTAHEDRON_HALF
    elif n == 4:
        axes = _TETRAHEDRON
    elif n == 6:
        axes = np.vstack([_OCTAHEDRON_HALF, -_OCTAHEDRON_HALF])
    elif n == 8:
        axes = np.vstack([_TETRAHEDRON, -_TETRAHEDRON])
    else:
        raise ValidationError(
            f"unsupported axis count {n}: built-in sets exist for N in "
            f"{SUPPORTED_N} (octahedron/tetrahedron vertices and their "
            "opposite-vector doublings)"
        )
    return AxisSet(axes=axes, weights=np.full(n, 1.0 / n), label=f"N={n}")


@dataclass(frozen=True)
class Channel:
    """Mixed-unitary channel ``rho -> sum_k w_k U_k rho U_k^dagger``.

    Trace preservation holds by construction because every Kraus operator is
    unitary; the weights must form a probability distribution.
    """

    weights: np.ndarray
    ops: np.ndarray
    label: str = ""

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        ops = np.asarray(self.ops, dtype=complex)
        if ops.ndim != 3 or ops.shape[1:] != (2, 2) or ops.shape[0] != weights.shape[0]:
            raise ValidationError("ops must be (K, 2, 2) with one weight per operator")
        if abs(weights.sum() - 1.0) > ATOL or weights.min() < 0.0:
            raise ValidationError("weights must be probabilities summing to 1")
        eye = np.eye(2)
        for k in range(ops.shape[0]):
            if np.abs(ops[k].conj().T @ ops[k] - eye).max() > 1e-10:
                raise ValidationError(f"Kraus operator {k} is not unitary")
        object.__setattr__(self, "weights", _readonly(weights))
        object.__setattr__(self, "ops", _readonly(ops))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        out = np.einsum("k,kab,bc,kdc->ad", self.weights, self.ops, rho, self.ops.conj())
        return out


def make_unot(axes: AxisSet) -> Channel:
    """Uniformly weighted mixture of pi rotations about the given axes."""
    ops = np.stack([pauli_dot(n) for n in axes.axes])
    return Channel(weights=axes.weights.copy(), ops=ops, label=f"unot[{axes.label}]")


def chi_of_channel(channel: Channel) -> np.ndarray:
    """Exact process matrix in the Pauli basis (I, x, y, z).

    Expands each Kraus operator as ``sum_k c_k sigma_k`` and accumulates
    ``chi_ij = sum_k w_k c_i c_j^*``.
    """
    return _kernels.chi_from_unitary_kraus(channel.weights, channel.ops)


# ---------------------------------------------------------------------------
# generator-jitter error model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorErrorDraw:
    """One sampled set of error generator vectors, one 3-vector per axis."""

    eps: np.ndarray
    eps0: float

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        if eps.ndim != 2 or eps.shape[1] != 3:
            raise ValidationError("eps must be (N, 3)")
        if self.eps0 < 0:
            raise ValidationError("eps0 must be non-negative")
        if eps.size and np.abs(eps).max() > self.eps0 + ATOL:
            raise ValidationError("a component exceeds the stated bound eps0")
        object.__setattr__(self, "eps", _readonly(eps))

    @property
    def n_axes(self) -> int:
        return self.eps.shape[0]


def sample_generator_errors(
    n: int, eps0: float, rng: RngStream, dist: str = "uniform"
) -> GeneratorErrorDraw:
    """Draw ``n`` i.i.d. mean-zero error vectors with components in [-eps0, eps0].

    ``dist`` is "uniform" (default) or "gaussian"; the Gaussian variant uses
    scale ``eps0/3`` truncated at the bound by rejection, so both options are
    symmetric under inversion and keep every component within the bound.
    """
    if eps0 < 0:
        raise ValidationError("eps0 must be non-negative")
    gen = rng.generator()
    if eps0 == 0.0:
        return GeneratorErrorDraw(eps=np.zeros((n, 3)), eps0=0.0)
    if dist == "uniform":
        eps = gen.uniform(-eps0, eps0, size=(n, 3))
    elif dist == "gaussian":
        eps = gen.normal(0.0, eps0 / 3.0, size=(n, 3))
        bad = np.abs(eps) > eps0
        while bad.any():
            eps[bad] = gen.normal(0.0, eps0 / 3.0, size=int(bad.sum()))
            bad = np.abs(eps) > eps0
    else:
        raise ValidationError(f"unknown error distribution {dist!r}")
    return GeneratorErrorDraw(eps=eps, eps0=eps0)


def uniform_delta_r(eps0: float) -> float:
    """Per-component standard deviation of the uniform error model."""
    return eps0 / math.sqrt(3.0)


def truncated_gaussian_delta_r(eps0: float) -> float:
    """Per-component standard deviation of the truncated Gaussian model."""
    from scipy.stats import truncnorm

    if eps0 == 0.0:
        return 0.0
    return float(truncnorm.std(-3.0, 3.0, loc=0.0, scale=eps0 / 3.0))


def error_unitary(eps_vec: np.ndarray) -> np.ndarray:
    """Exact ``exp(i e . sigma) = cos|e| I + i sin|e| (ehat . sigma)``."""
    e = np.asarray(eps_vec, dtype=float)
    r = np.linalg.norm(e)
    if r == 0.0:
        return np.eye(2, dtype=complex)
    return math.cos(r) * np.eye(2) + 1j * math.sin(r) * pauli_dot(e / r)


def perturb_generator(channel: Channel, draw: GeneratorErrorDraw) -> Channel:
    """Compose each Kraus operator with its drawn error unitary."""
    if draw.n_axes != channel.ops.shape[0]:
        raise ValidationError(
            f"draw has {draw.n_axes} error vectors for {channel.ops.shape[0]} operators"
        )
    ops = np.stack(
        [error_unitary(draw.eps[i]) @ channel.ops[i] for i in range(draw.n_axes)]
    )
    return Channel(weights=channel.weights.copy(), ops=ops, label=channel.label + "+gen-err")


# ---------------------------------------------------------------------------
# waveplate realization and plate-rotation jitter
# ---------------------------------------------------------------------------

QWP_RETARDANCE = math.pi / 2
HWP_RETARDANCE = math.pi

PLATE_KINDS = ("qwp", "hwp", "qwp")


def waveplate_unitary(kind: str, angle: float) -> np.ndarray:
    """Jones matrix of a retarder with its fast axis at ``angle``.

    Convention: ``R(angle) diag(1, exp(i Gamma)) R(-angle)`` with Gamma = pi/2
    for a QWP and pi for an HWP.  All composite claims hold up to a global
    phase.
    """
    if kind == "qwp":
        gamma = QWP_RETARDANCE
    elif kind == "hwp":
        gamma = HWP_RETARDANCE
    else:
        raise ValidationError(f"unknown plate kind {kind!r} (expected 'qwp' or 'hwp')")
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return rot @ np.diag([1.0, np.exp(1j * gamma)]) @ rot.T


@dataclass(frozen=True)
class WaveplateSetting:
    """Fast-axis angles of one QWP-HWP-QWP triple, plus per-plate offsets."""

    angles: tuple[float, float, float]
    offsets: tuple[float, float, float] = (0.0, 0.0, 0.0)
    kinds: tuple[str, str, str] = PLATE_KINDS

    def composite(self) -> np.ndarray:
        """Product of the three plates at angle + offset, leftmost applied last."""
        u = np.eye(2, dtype=complex)
        for kind, angle, off in zip(self.kinds, self.angles, self.offsets):
            u = u @ waveplate_unitary(kind, angle + off)
        return u


class DecompositionError(RuntimeError):
    """The plate-angle solver failed to reach the target unitary."""

    def __init__(self, message: str, best_residual: float):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


def _phase_aligned_residual(composite: np.ndarray, target: np.ndarray) -> float:
    tr = np.trace(target.conj().T @ composite)
    phase = tr / abs(tr) if abs(tr) > 1e-12 else 1.0
    return float(np.abs(composite - phase * target).max())


def _residual_vector(angles, target):
    u = WaveplateSetting(angles=tuple(angles)).composite()
    tr = np.trace(target.conj().T @ u)
    phase = tr / abs(tr) if abs(tr) > 1e-12 else 1.0
    d = u - phase * target
    return np.concatenate([d.real.ravel(), d.imag.ravel()])


# Deterministic multi-start list for the three-angle solve.  The first start
# that converges wins, which pins the solution branch (several distinct
# plate-angle triples realize the same unitary).
_SOLVER_STARTS = tuple(
    (q1, h, q2)
    for q1 in np.deg2rad([0.0, 45.0, -45.0, 90.0])
    for h in np.deg2rad([0.0, 22.5, -22.5, 45.0, 67.5, -67.5, 90.0])
    for q2 in np.deg2rad([0.0, 45.0, -45.0, 90.0])
)


def decompose_qwp_hwp_qwp(target: np.ndarray, tol: float = 1e-10) -> WaveplateSetting:
    """Plate angles realizing ``target`` up to a global phase.

    Levenberg-Marquardt on the phase-aligned entrywise residual from a fixed
    list of starting angles; raises ``DecompositionError`` with the best
    residual if no start converges below ``tol``.
    """
    target = np.asarray(target, dtype=complex)
    if np.abs(target.conj().T @ target - np.eye(2)).max() > 1e-10:
        raise ValidationError("decomposition target must be unitary")
    best = math.inf
    for start in _SOLVER_STARTS:
        fit = least_squares(
            _residual_vector,
            start,
            args=(target,),
            method="lm",
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
        )
        setting = WaveplateSetting(angles=tuple(float(a) for a in fit.x))
        residual = _phase_aligned_residual(setting.composite(), target)
        if residual <= tol:
            return setting
        best = min(best, residual)
    raise DecompositionError(
        f"no QWP-HWP-QWP start converged below {tol:g} after "
        f"{len(_SOLVER_STARTS)} restarts",
        best,
    )


def pi_rotation_plate_angles(axis: np.ndarray) -> tuple[float, float, float]:
    """Canonical plate triple for the pi rotation ``axis . sigma``.

    Uses the conjugated-half-wave construction QWP(p) HWP(h) QWP(p + 90deg),
    which equals ``Q(p) H(h) Q(p)^dagger`` up to phase: the quarter-wave pair
    rotates the half-wave's flip axis ``(sin 2h, 0, cos 2h)`` by 90 degrees
    about ``(sin 2p, 0, cos 2p)``.  Solving that rotation for the target axis
    gives the closed form

        p = atan2(n_x, n_z) / 2,    h = p + asin(n_y) / 2.

    Canonical and branch-free (``atan2(0, 0) = 0`` pins the poles), so every
    axis gets the same plate-level error geometry up to conjugation, which
    keeps the jitter response uniform across the built-in sets.
    """
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > AXIS_ATOL:
        raise ValidationError("plate construction needs a unit 3-vector axis")
    p = math.atan2(n[0], n[2]) / 2.0
    h = p + math.asin(max(-1.0, min(1.0, n[1]))) / 2.0
    return (p, h, p + math.pi / 2.0)


@lru_cache(maxsize=None)
def _builtin_plate_angles(n: int) -> np.ndarray:
    axes = axis_set(n)
    return _readonly(np.array([pi_rotation_plate_angles(v) for v in axes.axes]))


def plate_angles_for(axes: AxisSet) -> np.ndarray:
    """Plate-angle triples for every axis of the set, shape (N, 3)."""
    n = axes.n_axes
    if n in SUPPORTED_N and np.array_equal(axes.axes, axis_set(n).axes):
        return _builtin_plate_angles(n)
    return np.array([pi_rotation_plate_angles(v) for v in axes.axes])


def perturb_waveplates(axes: AxisSet, phi_e: float, rng: RngStream) -> Channel:
    """Channel with every plate angle jittered uniformly in [-phi_e, phi_e].

    One draw per channel instance: the 3N offsets are fixed for the lifetime
    of the returned channel, the way plate misalignment stays fixed during a
    tomography run.  ``phi_e`` is in radians.
    """
    if phi_e < 0:
        raise ValidationError("phi_e must be non-negative")
    base = plate_angles_for(axes)
    offsets = rng.generator().uniform(-phi_e, phi_e, size=base.shape) if phi_e else np.zeros(base.shape)
    ops = np.stack(
        [
            WaveplateSetting(angles=tuple(base[i]), offsets=tuple(offsets[i])).composite()
            for i in range(axes.n_axes)
        ]
    )
    return Channel(weights=axes.weights.copy(), ops=ops, label=f"waveplate[{axes.label}]")


# ---------------------------------------------------------------------------
# ancilla-assisted realization
# ---------------------------------------------------------------------------

def ancilla_realization(axes: AxisSet, rho: np.ndarray) -> np.ndarray:
    """Run the channel as one controlled operation on an equal-superposition ancilla.

    Builds ``|psi_0><psi_0| (x) rho`` with ``|psi_0> = sum_i sqrt(p_i) |i>``
    (the equal superposition for uniform weights), applies
    ``U = sum_i |i><i| (x) (n_i . sigma)`` and traces out the ancilla.
    Algebraically identical to applying the stochastic mixture directly.
    """
    rho = check_density_matrix(rho)
    n = axes.n_axes
    psi0 = np.sqrt(axes.weights).astype(complex)
    joint = np.kron(np.outer(psi0, psi0.conj()), rho)
    u = np.zeros((2 * n, 2 * n), dtype=complex)
    for i, v in enumerate(axes.axes):
        u[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = pauli_dot(v)
    out = u @ joint @ u.conj().T
    # partial trace over the ancilla register
    return out.reshape(n, 2, n, 2).trace(axis1=0, axis2=2)
