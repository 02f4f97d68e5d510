"""Named verification checks with measured margins.

Each check returns a ``CheckResult`` whose ``margin`` is the worst measured
value relative to its bound (margin < 1 passes).  The CLI ``verify``
subcommand runs them and exits non-zero on any failure; the acceptance test
suite asserts the same bounds at the same tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import experiments, fidanal
from .channels import (
    Channel,
    GeneratorErrorDraw,
    ancilla_realization,
    axis_set,
    chi_of_channel,
    make_unot,
    perturb_generator,
)
from .pauli import RngStream, ValidationError, haar_random_unitary


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str


def random_density_matrix(gen: np.random.Generator) -> np.ndarray:
    """Random mixed state: Haar eigenbasis with a random spectrum."""
    u = haar_random_unitary(gen)
    p = gen.dirichlet((1.0, 1.0))
    return (u * p) @ u.conj().T


def random_unitary_mixture(gen: np.random.Generator, max_terms: int = 5) -> Channel:
    k = int(gen.integers(2, max_terms + 1))
    w = gen.dirichlet(np.ones(k))
    ops = np.stack([haar_random_unitary(gen) for _ in range(k)])
    return Channel(weights=w, ops=ops, label="random-mixture")


def random_tp_chi(gen: np.random.Generator) -> np.ndarray:
    """Random Hermitian trace-preserving chi, not necessarily positive."""
    chi = chi_of_channel(random_unitary_mixture(gen))
    if gen.random() < 0.5:
        other = chi_of_channel(random_unitary_mixture(gen))
        chi = 1.5 * chi - 0.5 * other  # affine TP combination, may lose positivity
    return chi


def isotropy_check() -> CheckResult:
    """Every built-in axis set satisfies sum_i p_i n_i n_i^T = I/3 to 1e-10."""
    worst = 0.0
    for n in (3, 4, 6, 8):
        a = axis_set(n)
        moment = np.einsum("i,ia,ib->ab", a.weights, a.axes, a.axes)
        worst = max(worst, float(np.abs(moment - np.eye(3) / 3.0).max()))
    return CheckResult(
        name="isotropy",
        passed=worst <= 1e-10,
        margin=worst / 1e-10,
        detail=f"max |second moment - I/3| = {worst:.3e} (bound 1e-10)",
    )


def closed_form_check(samples: int = 100, seed: int = 2024) -> CheckResult:
    """Closed-form F and Delta agree with the quadrature oracle to 1e-6."""
    gen = RngStream(seed).generator()
    worst = 0.0
    for _ in range(samples):
        chi = random_tp_chi(gen)
        quad = fidanal.fidelity_quadrature(chi)
        worst = max(
            worst,
            abs(fidanal.fidelity_closed_form(chi) - quad.fidelity),
            abs(fidanal.deviation_closed_form(chi) - quad.deviation),
        )
    return CheckResult(
        name="closed-form",
        passed=worst <= 1e-6,
        margin=worst / 1e-6,
        detail=f"max |closed - quadrature| = {worst:.3e} over {samples} random TP chi (bound 1e-6)",
    )


def first_order_check(seed: int = 5, bound: float = 1.0) -> CheckResult:
    """chi_exact - chi_ideal - dchi1 shrinks quadratically with the error scale."""
    gen = RngStream(seed).generator()
    worst_ratio = 0.0
    detail = []
    for n in (3, 4):
        base = gen.uniform(-1.0, 1.0, size=(n, 3))
        ratios = []
        for scale in (1e-2, 1e-3, 1e-4):
            eps = scale * base
            draw = GeneratorErrorDraw(eps=eps, eps0=scale)
            chi = chi_of_channel(perturb_generator(make_unot(axis_set(n)), draw))
            dchi = fidanal.predicted_delta_chi_first_order(n, draw)
            residual = float(np.abs(chi - fidanal.chi_ideal() - dchi).max())
            ratios.append(residual / scale**2)
        worst_ratio = max(worst_ratio, max(ratios))
        spread = max(ratios) / min(ratios)
        detail.append(f"N={n}: residual/eps0^2 in [{min(ratios):.4f}, {max(ratios):.4f}]")
        if spread > 1.5:
            return CheckResult(
                name="first-order",
                passed=False,
                margin=spread,
                detail="; ".join(detail) + " (ratio not constant across scales)",
            )
    return CheckResult(
        name="first-order",
        passed=worst_ratio <= bound,
        margin=worst_ratio / bound,
        detail="; ".join(detail) + f" (bound {bound})",
    )


def ancilla_check(samples: int = 100, seed: int = 11) -> CheckResult:
    """Controlled-operation realization matches the stochastic mixture to 1e-12."""
    gen = RngStream(seed).generator()
    worst = 0.0
    for n in (3, 4, 6, 8):
        axes = axis_set(n)
        channel = make_unot(axes)
        for _ in range(samples // 4):
            rho = random_density_matrix(gen)
            diff = np.abs(ancilla_realization(axes, rho) - channel.apply(rho)).max()
            worst = max(worst, float(diff))
    return CheckResult(
        name="ancilla",
        passed=worst <= 1e-12,
        margin=worst / 1e-12,
        detail=f"max |controlled - stochastic| = {worst:.3e} (bound 1e-12)",
    )


def scaling_law_check(
    trials: int = 10_000,
    eps0: float = 0.05,
    seed: int = 0,
    alpha: float = fidanal.ALPHA,
    rel_tol: float = 0.03,
    f_tol: float = 0.005,
) -> CheckResult:
    """Monte Carlo deviation means track alpha * delta_r / sqrt(N).

    ``alpha`` is exposed so a deliberately wrong constant makes the check
    fail (mutation test); production callers leave the default.
    """
    from .channels import uniform_delta_r

    config = experiments.SweepConfig(
        model=experiments.GENERATOR,
        magnitudes=(eps0,),
        trials=trials,
        seed=seed,
        label="scaling-check",
    )
    result = experiments.run_sweep(config)
    delta_r = uniform_delta_r(eps0)
    worst_rel = 0.0
    worst_f = 0.0
    details = []
    for n in config.ns:
        cell = result.cell(n, eps0)
        predicted = alpha * delta_r / math.sqrt(n)
        rel = abs(cell.delta_bar / predicted - 1.0)
        worst_rel = max(worst_rel, rel)
        worst_f = max(worst_f, abs(cell.mean_f - 2.0 / 3.0))
        details.append(f"N={n}: delta_bar={cell.delta_bar:.6f} vs {predicted:.6f} ({100*rel:.2f}%)")
    passed = worst_rel <= rel_tol and worst_f <= f_tol
    margin = max(worst_rel / rel_tol, worst_f / f_tol)
    return CheckResult(
        name="scaling",
        passed=passed,
        margin=margin,
        detail="; ".join(details) + f"; max |mean F - 2/3| = {worst_f:.5f}",
    )


CHECKS = {
    "isotropy": isotropy_check,
    "closed-form": closed_form_check,
    "first-order": first_order_check,
    "ancilla": ancilla_check,
    "scaling": scaling_law_check,
}


def run_checks(names=None, scaling_trials: int = 10_000) -> list[CheckResult]:
    if names is None:
        names = list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValidationError(f"unknown checks {unknown}; available: {sorted(CHECKS)}")
    results = []
    for name in names:
        if name == "scaling":
            results.append(scaling_law_check(trials=scaling_trials))
        else:
            results.append(CHECKS[name]())
    return results
