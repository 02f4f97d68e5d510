import math

import numpy as np
import pytest

from unotsim.pauli import (
    PureStateAngles,
    RngStream,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ValidationError,
    bloch_of,
    check_density_matrix,
    conjugate_by,
    density_of,
    haar_random_unitary,
    orthogonal_state,
    pauli_coefficients,
    pauli_dot,
    pure_state,
    trace_distance,
)

RHO_0 = np.diag([1.0, 0.0]).astype(complex)
RHO_1 = np.diag([0.0, 1.0]).astype(complex)
RHO_PLUS = np.full((2, 2), 0.5, dtype=complex)


class TestPureStates:
    def test_north_pole(self):
        np.testing.assert_allclose(pure_state(PureStateAngles(0.0)), RHO_0, atol=1e-15)

    def test_south_pole(self):
        np.testing.assert_allclose(pure_state(PureStateAngles(math.pi)), RHO_1, atol=1e-15)

    def test_plus_state(self):
        np.testing.assert_allclose(pure_state(PureStateAngles(math.pi / 2)), RHO_PLUS, atol=1e-15)

    def test_orthogonal_of_zero(self):
        np.testing.assert_allclose(orthogonal_state(PureStateAngles(0.0)), RHO_1, atol=1e-15)

    def test_orthogonal_of_plus_is_minus(self):
        minus = np.array([[0.5, -0.5], [-0.5, 0.5]])
        np.testing.assert_allclose(orthogonal_state(PureStateAngles(math.pi / 2)), minus, atol=1e-15)

    @pytest.mark.parametrize("theta", np.linspace(0, math.pi, 7))
    @pytest.mark.parametrize("phi", np.linspace(0, 2 * math.pi, 5, endpoint=False))
    def test_orthogonality_by_construction(self, theta, phi):
        angles = PureStateAngles(theta, phi)
        overlap = np.trace(pure_state(angles) @ orthogonal_state(angles))
        assert abs(overlap) <= 1e-12

    @pytest.mark.parametrize("theta", np.linspace(0, math.pi, 7))
    @pytest.mark.parametrize("phi", np.linspace(0, 2 * math.pi, 5, endpoint=False))
    def test_bloch_vector_of_pure_state(self, theta, phi):
        r = bloch_of(pure_state(PureStateAngles(theta, phi)))
        expected = np.array(
            [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
        )
        np.testing.assert_allclose(r, expected, atol=1e-12)

    @pytest.mark.parametrize("theta", np.linspace(0, math.pi, 5))
    def test_orthogonal_state_negates_bloch_vector(self, theta):
        angles = PureStateAngles(theta, 1.1)
        np.testing.assert_allclose(
            bloch_of(orthogonal_state(angles)), -bloch_of(pure_state(angles)), atol=1e-12
        )

    def test_angle_ranges_validated(self):
        with pytest.raises(ValidationError):
            PureStateAngles(-0.1)
        with pytest.raises(ValidationError):
            PureStateAngles(1.0, 7.0)


class TestPauliDot:
    def test_z_axis(self):
        np.testing.assert_allclose(pauli_dot([0, 0, 1]), SIGMA_Z, atol=1e-15)

    def test_x_axis(self):
        np.testing.assert_allclose(pauli_dot([1, 0, 0]), SIGMA_X, atol=1e-15)

    def test_tetrahedron_vertex_squares_to_identity(self):
        n = np.ones(3) / math.sqrt(3)
        op = pauli_dot(n)
        np.testing.assert_allclose(op, (SIGMA_X + SIGMA_Y + SIGMA_Z) / math.sqrt(3), atol=1e-15)
        np.testing.assert_allclose(op @ op, np.eye(2), atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_any_unit_axis_squares_to_identity(self, seed):
        gen = RngStream(seed).generator()
        n = gen.normal(size=3)
        n /= np.linalg.norm(n)
        op = pauli_dot(n)
        np.testing.assert_allclose(op @ op, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(op, op.conj().T, atol=1e-12)

    def test_non_normalized_axis_rejected(self):
        with pytest.raises(ValidationError):
            pauli_dot([1.0, 1.0, 0.0])


class TestBlochConversions:
    def test_examples(self):
        np.testing.assert_allclose(bloch_of(RHO_0), [0, 0, 1], atol=1e-15)
        np.testing.assert_allclose(bloch_of(np.eye(2) / 2), [0, 0, 0], atol=1e-15)
        np.testing.assert_allclose(bloch_of(RHO_PLUS), [1, 0, 0], atol=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_round_trip(self, seed):
        gen = RngStream(seed).generator()
        r = gen.uniform(-1, 1, 3)
        r *= gen.uniform(0, 1) / np.linalg.norm(r)
        np.testing.assert_allclose(bloch_of(density_of(r)), r, atol=1e-12)

    def test_outside_sphere_rejected(self):
        with pytest.raises(ValidationError):
            density_of(np.array([0.8, 0.8, 0.8]))

    def test_density_validation(self):
        check_density_matrix(RHO_PLUS)
        with pytest.raises(ValidationError):
            check_density_matrix(np.array([[1.0, 0.5], [0.2, 0.0]]))
        with pytest.raises(ValidationError):
            check_density_matrix(np.diag([0.8, 0.8]))


class TestConjugateBy:
    def test_bit_flip(self):
        np.testing.assert_allclose(conjugate_by(SIGMA_X, RHO_0), RHO_1, atol=1e-15)

    def test_identity(self):
        rho = density_of(np.array([0.3, -0.2, 0.4]))
        np.testing.assert_allclose(conjugate_by(np.eye(2), rho), rho, atol=1e-15)

    def test_z_on_plus_gives_minus(self):
        minus = np.array([[0.5, -0.5], [-0.5, 0.5]])
        np.testing.assert_allclose(conjugate_by(SIGMA_Z, RHO_PLUS), minus, atol=1e-15)


class TestPauliCoefficients:
    @pytest.mark.parametrize("seed", range(5))
    def test_reconstruction(self, seed):
        gen = RngStream(seed).generator()
        u = haar_random_unitary(gen)
        c = pauli_coefficients(u)
        from unotsim.pauli import PAULIS

        np.testing.assert_allclose(np.einsum("k,kab->ab", c, PAULIS), u, atol=1e-12)


class TestRngStream:
    def test_equal_seeds_emit_identical_draws(self):
        a = RngStream(123, 45).generator().random(1_000_000)
        b = RngStream(123, 45).generator().random(1_000_000)
        np.testing.assert_array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(123, 0).generator().random(100)
        b = RngStream(123, 1).generator().random(100)
        assert not np.array_equal(a, b)

    def test_substream_deterministic_and_distinct(self):
        s = RngStream(9)
        assert s.substream(1, 2, 3) == s.substream(1, 2, 3)
        assert s.substream(1, 2, 3) != s.substream(1, 2, 4)
        assert s.substream(1, 2, 3) != s.substream(3, 2, 1)


def test_trace_distance_basic():
    assert trace_distance(RHO_0, RHO_0) == 0.0
    assert abs(trace_distance(RHO_0, RHO_1) - 1.0) <= 1e-12
