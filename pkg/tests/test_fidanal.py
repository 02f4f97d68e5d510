import math

import numpy as np
import pytest

from unotsim.channels import (
    AxisSet,
    Channel,
    GeneratorErrorDraw,
    axis_set,
    chi_of_channel,
    make_unot,
    perturb_generator,
)
from unotsim.fidanal import (
    ALPHA,
    QuadratureSpec,
    SensitivityModel,
    chi_ideal,
    check_chi,
    delta3_closed,
    delta4_closed,
    deviation_closed_form,
    fidelity_closed_form,
    fidelity_quadrature,
    first_order_delta_chi,
    first_order_deviation,
    mean_fidelity_prediction,
    predicted_delta_chi_first_order,
    predicted_mean_deviation,
    trace_preservation_residual,
)
from unotsim.pauli import RngStream, ValidationError
from unotsim.verify import random_tp_chi

R2, R3, R6, R15 = math.sqrt(2), math.sqrt(3), math.sqrt(6), math.sqrt(15)


class TestClosedForms:
    def test_ideal_chi(self):
        assert abs(fidelity_closed_form(chi_ideal()) - 2 / 3) <= 1e-15
        assert deviation_closed_form(chi_ideal()) == 0.0

    def test_identity_channel_chi(self):
        chi = np.diag([1.0, 0, 0, 0]).astype(complex)
        assert fidelity_closed_form(chi) == 0.0
        assert deviation_closed_form(chi) == 0.0

    def test_single_x_flip_chi(self):
        chi = np.diag([0, 1.0, 0, 0]).astype(complex)
        assert abs(fidelity_closed_form(chi) - 2 / 3) <= 1e-15
        assert abs(deviation_closed_form(chi) - math.sqrt(4 / 45)) <= 1e-15

    def test_variance_form_nonnegative_for_hermitian_inputs(self):
        # both pieces of the quadratic form are sums of squares, so any
        # Hermitian chi (physical or not) yields a real deviation
        gen = RngStream(55).generator()
        for _ in range(20):
            h = gen.normal(size=(4, 4)) + 1j * gen.normal(size=(4, 4))
            deviation_closed_form((h + h.conj().T) / 2)

    def test_non_hermitian_rejected(self):
        bad = chi_ideal()
        bad[0, 1] = 0.5
        with pytest.raises(ValidationError):
            fidelity_closed_form(bad)


class TestQuadratureOracle:
    def test_ideal_channel(self):
        report = fidelity_quadrature(make_unot(axis_set(3)))
        assert abs(report.fidelity - 2 / 3) <= 1e-8
        assert report.deviation <= 1e-8

    def test_identity_channel(self):
        channel = Channel(weights=np.array([1.0]), ops=np.eye(2, dtype=complex)[None])
        report = fidelity_quadrature(channel)
        assert abs(report.fidelity) <= 1e-12
        assert report.deviation <= 1e-8

    def test_closed_forms_match_oracle_on_random_tp_chi(self):
        gen = RngStream(77).generator()
        for _ in range(20):
            chi = random_tp_chi(gen)
            report = fidelity_quadrature(chi)
            assert abs(fidelity_closed_form(chi) - report.fidelity) <= 1e-6
            assert abs(deviation_closed_form(chi) - report.deviation) <= 1e-6

    def test_channel_and_chi_routes_agree(self):
        draw = GeneratorErrorDraw(eps=RngStream(1).generator().uniform(-0.2, 0.2, (4, 3)), eps0=0.2)
        channel = perturb_generator(make_unot(axis_set(4)), draw)
        a = fidelity_quadrature(channel)
        b = fidelity_quadrature(chi_of_channel(channel))
        assert abs(a.fidelity - b.fidelity) <= 1e-12
        assert abs(a.deviation - b.deviation) <= 1e-10

    def test_trapezoid_rule_converges_to_gauss(self):
        chi = random_tp_chi(RngStream(3).generator())
        exact = fidelity_quadrature(chi)  # gauss rule, exact for these integrands
        coarse = fidelity_quadrature(chi, QuadratureSpec(101, 201, rule="trapezoid"))
        fine = fidelity_quadrature(chi, QuadratureSpec(201, 401, rule="trapezoid"))
        err_coarse = abs(coarse.fidelity - exact.fidelity)
        err_fine = abs(fine.fidelity - exact.fidelity)
        assert err_fine <= err_coarse / 3  # second-order rule: x4 per halving

    def test_pauli_relabeling_invariance(self):
        # conjugating by the axis permutation rotation (x->y->z->x) must not
        # change either figure of merit
        n = np.ones(3) / R3
        rotator = math.cos(math.pi / 3) * np.eye(2) - 1j * math.sin(math.pi / 3) * (
            n[0] * np.array([[0, 1], [1, 0]])
            + n[1] * np.array([[0, -1j], [1j, 0]])
            + n[2] * np.array([[1, 0], [0, -1]])
        )
        draw = GeneratorErrorDraw(
            eps=RngStream(4).generator().uniform(-0.1, 0.1, (3, 3)), eps0=0.1
        )
        channel = perturb_generator(make_unot(axis_set(3)), draw)
        conjugated = Channel(
            weights=channel.weights.copy(),
            ops=np.stack([rotator @ op @ rotator.conj().T for op in channel.ops]),
        )
        chi_a, chi_b = chi_of_channel(channel), chi_of_channel(conjugated)
        assert abs(fidelity_closed_form(chi_a) - fidelity_closed_form(chi_b)) <= 1e-12
        assert abs(deviation_closed_form(chi_a) - deviation_closed_form(chi_b)) <= 1e-12

    def test_spec_validation(self):
        with pytest.raises(ValidationError):
            QuadratureSpec(2, 401)
        with pytest.raises(ValidationError):
            QuadratureSpec(rule="simpson")


class TestFirstOrderPredictor:
    def test_zero_draw_gives_zero_matrix(self):
        draw = GeneratorErrorDraw(eps=np.zeros((3, 3)), eps0=0.0)
        np.testing.assert_array_equal(predicted_delta_chi_first_order(3, draw), np.zeros((4, 4)))

    def test_single_parallel_component_pattern(self):
        e = 0.37
        eps = np.zeros((3, 3))
        eps[0, 0] = e  # parallel to the x-axis flip
        dchi = predicted_delta_chi_first_order(3, GeneratorErrorDraw(eps=eps, eps0=e))
        expected = np.zeros((4, 4), dtype=complex)
        expected[0, 1] = 1j * e / 3
        expected[1, 0] = -1j * e / 3
        np.testing.assert_allclose(dchi, expected, atol=1e-15)

    def test_n3_matches_published_matrix_layout(self):
        gen = RngStream(21).generator()
        e = gen.uniform(-1, 1, (3, 3))
        draw = GeneratorErrorDraw(eps=e, eps0=1.0)
        expected = np.array(
            [
                [0, 1j * e[0, 0], 1j * e[1, 1], 1j * e[2, 2]],
                [-1j * e[0, 0], 0, e[1, 2] - e[0, 2], e[0, 1] - e[2, 1]],
                [-1j * e[1, 1], e[1, 2] - e[0, 2], 0, e[2, 0] - e[1, 0]],
                [-1j * e[2, 2], e[0, 1] - e[2, 1], e[2, 0] - e[1, 0], 0],
            ],
            dtype=complex,
        ) / 3.0
        np.testing.assert_allclose(predicted_delta_chi_first_order(3, draw), expected, atol=1e-14)

    def test_unsupported_n_rejected(self):
        draw = GeneratorErrorDraw(eps=np.zeros((6, 3)), eps0=0.0)
        with pytest.raises(ValidationError):
            predicted_delta_chi_first_order(6, draw)

    @pytest.mark.parametrize("n", [3, 4])
    def test_residual_shrinks_quadratically(self, n):
        gen = RngStream(22).generator()
        base = gen.uniform(-1, 1, (n, 3))
        ratios = []
        for scale in (1e-2, 1e-3, 1e-4):
            draw = GeneratorErrorDraw(eps=scale * base, eps0=scale)
            chi = chi_of_channel(perturb_generator(make_unot(axis_set(n)), draw))
            dchi = predicted_delta_chi_first_order(n, draw)
            residual = np.abs(chi - chi_ideal() - dchi).max()
            ratios.append(residual / scale**2)
        assert max(ratios) <= 1.0
        assert max(ratios) / min(ratios) <= 1.2


# The published first-order matrix for the 4-axis channel is written for a
# tetrahedron rotated into the plate plane, with each error vector expanded in
# a transverse frame per axis.  Rebuilding that frame exactly and comparing
# validates both the general formula and the published entries.
APPENDIX_AXES = np.array(
    [[R2, 1, 0], [-R2, 1, 0], [0, -1, R2], [0, -1, -R2]]
) / R3
APPENDIX_FRAME_A = np.array(
    [[1, -R2, 0], [1, R2, 0], [0, R2, 1], [0, -R2, 1]]
) / R3
APPENDIX_FRAME_B = np.array(
    [[0, 0, -1], [0, 0, -1], [-1, 0, 0], [-1, 0, 0]], dtype=float
)


def appendix_frame_eps(local):
    """Error vectors from (eps_i1, eps_i2) coefficients in the rotated frame."""
    return local[:, 0:1] * APPENDIX_FRAME_A + local[:, 1:2] * APPENDIX_FRAME_B


def published_delta_chi4(local):
    e = local
    return np.array(
        [
            [0, 0, 0, 0],
            [
                0,
                2 * R2 * (-e[0, 1] + e[1, 1]),
                e[0, 1] + e[1, 1] + R3 * (e[2, 0] + e[3, 0]),
                R6 * (-e[0, 0] + e[1, 0] - e[2, 0] + e[3, 0]),
            ],
            [
                0,
                e[0, 1] + e[1, 1] + R3 * (e[2, 0] + e[3, 0]),
                2 * R2 * (e[0, 1] - e[1, 1] + e[2, 1] - e[3, 1]),
                -R3 * (e[0, 0] + e[1, 0]) - e[2, 1] - e[3, 1],
            ],
            [
                0,
                R6 * (-e[0, 0] + e[1, 0] - e[2, 0] + e[3, 0]),
                -R3 * (e[0, 0] + e[1, 0]) - e[2, 1] - e[3, 1],
                2 * R2 * (-e[2, 1] + e[3, 1]),
            ],
        ],
        dtype=complex,
    ) / 12.0


class TestAppendixTetrahedronFixture:
    def setup_method(self):
        # right-handed orthonormal frames transverse to each rotated axis
        for i in range(4):
            assert abs(APPENDIX_FRAME_A[i] @ APPENDIX_AXES[i]) < 1e-12
            assert abs(APPENDIX_FRAME_B[i] @ APPENDIX_AXES[i]) < 1e-12
            np.testing.assert_allclose(
                np.cross(APPENDIX_FRAME_A[i], APPENDIX_FRAME_B[i]), APPENDIX_AXES[i], atol=1e-12
            )

    def test_rotated_tetrahedron_is_isotropic(self):
        AxisSet(axes=APPENDIX_AXES, weights=np.full(4, 0.25))

    def test_general_formula_reproduces_published_matrix(self):
        gen = RngStream(23).generator()
        local = gen.uniform(-1, 1, (4, 2))
        axes = AxisSet(axes=APPENDIX_AXES, weights=np.full(4, 0.25))
        dchi = first_order_delta_chi(axes, appendix_frame_eps(local))
        np.testing.assert_allclose(dchi, published_delta_chi4(local), atol=1e-14)

    def test_published_deviation_formula_matches_quadratic_form(self):
        gen = RngStream(24).generator()
        local = gen.uniform(-1, 1, (4, 2))
        e = local
        alpha_p = (e[0, 0] + e[1, 0]) / R2
        alpha_m = (e[0, 0] - e[1, 0]) / R2
        beta_p = (e[0, 1] + e[1, 1]) / R2
        beta_m = (e[0, 1] - e[1, 1]) / R2
        gamma_p = (e[2, 0] + e[3, 0]) / R2
        gamma_m = (e[2, 0] - e[3, 0]) / R2
        delta_p = (e[2, 1] + e[3, 1]) / R2
        delta_m = (e[2, 1] - e[3, 1]) / R2
        r = np.array(
            [
                (R3 * alpha_p + delta_p) / 2,
                (alpha_m + gamma_m) / R2,
                (beta_p + R3 * gamma_p) / 2,
                (beta_m + delta_m) / R2,
                (beta_m - delta_m) / R2,
            ]
        )
        published = (R2 / (3 * R15)) * math.sqrt(
            r[0] ** 2 + 3 * r[1] ** 2 + r[2] ** 2 + 3 * r[3] ** 2 + r[4] ** 2
        )
        quadratic = first_order_deviation(published_delta_chi4(local))
        assert abs(published - quadratic) <= 1e-14

    def test_second_moment_reproduces_sensitivity_law(self):
        # E[Delta^2] over isotropic errors equals (8/15) delta_r^2 / 4
        gen = RngStream(25).generator()
        local = gen.normal(0.0, 1.0, size=(200_000, 4, 2))
        axes = AxisSet(axes=APPENDIX_AXES, weights=np.full(4, 0.25))
        total = 0.0
        for i in range(0, 200_000, 50_000):
            block = local[i : i + 50_000]
            eps = (
                block[:, :, 0:1] * APPENDIX_FRAME_A[None]
                + block[:, :, 1:2] * APPENDIX_FRAME_B[None]
            )
            from unotsim import _kernels

            chis = _kernels.generator_chi_batch(APPENDIX_AXES * 1.0, 1e-3 * eps)
            _, devs = _kernels.fidelity_deviation_batch(chis)
            total += float((devs**2).sum())
        mean_sq = total / 200_000
        predicted = (8 / 15) * (1e-3) ** 2 / 4
        assert abs(mean_sq / predicted - 1.0) <= 0.02


class TestDeltaClosedForms:
    def test_zero_draws(self):
        assert delta3_closed(GeneratorErrorDraw(eps=np.zeros((3, 3)), eps0=0.0)) == 0.0
        assert delta4_closed(GeneratorErrorDraw(eps=np.zeros((4, 3)), eps0=0.0)) == 0.0

    def test_single_transverse_component(self):
        eps = np.zeros((3, 3))
        eps[0, 1] = 0.1
        value = delta3_closed(GeneratorErrorDraw(eps=eps, eps0=0.1))
        assert abs(value - 0.2 / (3 * R15)) <= 1e-15
        assert abs(value - 0.0172133) <= 1e-6

    def test_parallel_errors_do_not_contribute(self):
        eps = np.diag([0.2, -0.1, 0.3])  # each vector parallel to its axis
        assert delta3_closed(GeneratorErrorDraw(eps=eps, eps0=0.3)) == 0.0
        eps4 = 0.1 * axis_set(4).axes  # parallel draws for the tetrahedron
        assert delta4_closed(GeneratorErrorDraw(eps=eps4, eps0=0.1)) <= 1e-15

    def test_literal_n3_formula(self):
        gen = RngStream(26).generator()
        e = gen.uniform(-0.2, 0.2, (3, 3))
        literal = (2 / (3 * R15)) * math.sqrt(
            (e[0, 2] - e[1, 2]) ** 2 + (e[1, 0] - e[2, 0]) ** 2 + (e[0, 1] - e[2, 1]) ** 2
        )
        assert abs(delta3_closed(GeneratorErrorDraw(eps=e, eps0=0.2)) - literal) <= 1e-14

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            delta3_closed(GeneratorErrorDraw(eps=np.zeros((4, 3)), eps0=0.0))
        with pytest.raises(ValidationError):
            delta4_closed(GeneratorErrorDraw(eps=np.zeros((3, 3)), eps0=0.0))


class TestSensitivityLaw:
    def test_zero_delta_r(self):
        assert predicted_mean_deviation(3, 0.0) == 0.0

    def test_reference_value(self):
        assert abs(predicted_mean_deviation(3, 0.028868) - 0.012172) <= 1e-6

    def test_ratio_between_n3_and_n4(self):
        ratio = predicted_mean_deviation(3, 0.5) / predicted_mean_deviation(4, 0.5)
        assert abs(ratio - math.sqrt(4 / 3)) <= 1e-12

    def test_strictly_decreasing_in_n(self):
        values = [predicted_mean_deviation(n, 0.1) for n in range(3, 20)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_alpha_constant(self):
        assert abs(ALPHA - math.sqrt(8 / 15)) <= 1e-15
        assert abs(SensitivityModel(4).sensitivity - ALPHA / 2) <= 1e-15

    def test_mean_fidelity_prediction(self):
        for n in (3, 4, 6, 8, 12):
            assert mean_fidelity_prediction(n) == 2 / 3
        with pytest.raises(ValidationError):
            mean_fidelity_prediction(2)

    def test_invalid_arguments(self):
        with pytest.raises(ValidationError):
            predicted_mean_deviation(2, 0.1)
        with pytest.raises(ValidationError):
            predicted_mean_deviation(3, -0.1)


def test_trace_preservation_residual():
    assert trace_preservation_residual(chi_ideal()) <= 1e-15
    assert trace_preservation_residual(np.diag([0.5, 0, 0, 0]).astype(complex)) >= 0.4
