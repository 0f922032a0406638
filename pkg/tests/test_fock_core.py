import math

import numpy as np
import pytest

from src.entropies import z_purity
from src.errors import InvalidParameterError, TruncationError
from src.fock_core import (
    annihilation,
    coherent_amplitudes,
    coherent_cutoff,
    coherent_state,
    coherent_tail,
    density_from_pure,
    displacement_block,
    displacement_matrix,
    embed,
    expectation,
    fock_state,
    partial_trace,
    pure_state,
    random_pure_state,
    support_dim,
    tensor,
    thermal_cutoff,
    thermal_state,
)
from src.models import DensityOperator


class TestCutoffs:
    def test_vacuum_has_no_tail(self):
        assert coherent_tail(0.0, 3) == 0.0

    def test_coherent_state_rejects_short_cutoff(self):
        with pytest.raises(TruncationError):
            coherent_state(2.0, 10)

    def test_coherent_cutoff_meets_tolerance(self):
        dim = coherent_cutoff(2.0)
        psi = coherent_state(2.0, dim)
        assert psi.tail_mass < 1e-8
        assert coherent_tail(2.0, dim - 1) >= 1e-8

    def test_thermal_cutoff(self):
        assert thermal_cutoff(0.0) == 1
        # (1/2)^27 < 1e-8 <= (1/2)^26
        assert thermal_cutoff(1.0) == 27

    def test_thermal_cutoff_rejects_negative(self):
        with pytest.raises(InvalidParameterError):
            thermal_cutoff(-0.1)


class TestStates:
    def test_thermal_populations(self):
        rho = thermal_state(1.0, 40)
        expected = 0.5 ** (np.arange(40) + 1)
        assert np.allclose(np.diag(rho.matrix).real, expected, atol=1e-10)

    def test_thermal_purity(self):
        assert z_purity(thermal_state(1.0, 60), 2) == pytest.approx(1 / 3, abs=1e-12)

    def test_coherent_mean(self):
        rho = density_from_pure(coherent_state(0.5 - 0.2j, 20))
        assert abs(expectation(rho, annihilation(20)) - (0.5 - 0.2j)) < 1e-8

    def test_fock_state_level_outside_cutoff(self):
        with pytest.raises(InvalidParameterError):
            fock_state(3, 3)

    def test_pure_state_normalizes(self):
        psi = pure_state([1.0, 1.0j], dim=4)
        assert psi.dim == 4
        assert np.allclose(np.abs(psi.amplitudes[:2]) ** 2, 0.5)
        assert np.allclose(psi.amplitudes[2:], 0.0)

    @pytest.mark.parametrize("amplitudes", [[0.0, 0.0], []])
    def test_pure_state_rejects_zero_vector(self, amplitudes):
        with pytest.raises(InvalidParameterError):
            pure_state(amplitudes)

    def test_pure_state_rejects_small_cutoff(self):
        with pytest.raises(InvalidParameterError):
            pure_state([1.0, 1.0, 1.0], dim=2)

    def test_random_pure_state_support(self, rng):
        psi = random_pure_state(3, 6, rng)
        assert psi.dim == 6
        assert support_dim(psi) <= 3
        assert np.allclose(psi.amplitudes[3:], 0.0)

    def test_support_dim(self):
        psi = pure_state([1.0, 0.0, 1.0, 0.0, 0.0])
        assert support_dim(psi) == 3
        assert support_dim(density_from_pure(psi)) == 3


class TestEmbed:
    def test_pad(self):
        padded = embed(fock_state(1, 2), 5)
        assert padded.dim == 5
        assert padded.amplitudes[1] == 1.0

    def test_crop_empty_levels(self):
        cropped = embed(density_from_pure(pure_state([1.0, 0.0, 0.0, 0.0])), 2)
        assert cropped.dim == 2
        assert cropped.matrix[0, 0] == pytest.approx(1.0)

    def test_crop_occupied_level_raises(self):
        with pytest.raises(TruncationError):
            embed(fock_state(3, 4), 2)


class TestDisplacement:
    def test_vacuum_column_is_coherent_state(self):
        mu = 0.7 + 0.3j
        block = displacement_block([mu], 15)[0]
        assert np.allclose(block[:, 0], coherent_amplitudes([mu], 15)[0], atol=1e-12)

    def test_adjoint_is_negative_displacement(self):
        mu = -0.4 + 1.1j
        forward = displacement_matrix(mu, 12).matrix
        backward = displacement_matrix(-mu, 12).matrix
        assert np.allclose(forward.conj().T, backward, atol=1e-12)

    def test_low_columns_are_orthonormal(self):
        block = displacement_block([1.0], 40)[0][:, :5]
        assert np.allclose(block.conj().T @ block, np.eye(5), atol=1e-10)

    def test_zero_displacement_is_identity(self):
        assert np.allclose(displacement_matrix(0.0, 6).matrix, np.eye(6), atol=1e-14)

    def test_inverse_on_low_block(self):
        mu = 0.3 + 0.4j
        forward = displacement_matrix(mu, 60).matrix
        product = forward @ displacement_matrix(-mu, 60).matrix
        assert np.allclose(product[:20, :20], np.eye(20), atol=1e-8)

    def test_composition_phase_on_low_block(self):
        mu, nu = 0.3 + 0.4j, -0.2 + 0.5j
        forward = displacement_matrix(mu, 60).matrix
        product = forward @ displacement_matrix(nu, 60).matrix
        phase = np.exp(0.5 * (mu * np.conj(nu) - np.conj(mu) * nu))
        expected = phase * displacement_matrix(mu + nu, 60).matrix
        assert np.allclose(product[:20, :20], expected[:20, :20], atol=1e-8)

    def test_coherent_overlap(self):
        alpha, beta = 0.5 - 0.2j, -0.3 + 0.7j
        a, b = coherent_amplitudes([alpha, beta], 40)
        assert abs(np.vdot(a, b)) ** 2 == pytest.approx(
            math.exp(-abs(alpha - beta) ** 2), abs=1e-12
        )


class TestTwoMode:
    def test_partial_trace_recovers_factors(self):
        a = thermal_state(0.5, 20)
        b = density_from_pure(fock_state(1, 3))
        joint = tensor(a, b)
        assert joint.dim == 60
        assert np.allclose(partial_trace(joint, 0, (20, 3)).matrix, a.matrix)
        assert np.allclose(partial_trace(joint, 1, (20, 3)).matrix, b.matrix)

    def test_purity_is_multiplicative(self):
        a = thermal_state(0.5, 20)
        b = density_from_pure(pure_state([1.0, 1.0j, 0.5]))
        b = DensityOperator(dim=3, matrix=0.6 * b.matrix + 0.4 * np.eye(3) / 3)
        assert z_purity(tensor(a, b), 2) == pytest.approx(
            z_purity(a, 2) * z_purity(b, 2), abs=1e-12
        )

    def test_partial_trace_rejects_bad_dims(self):
        joint = tensor(thermal_state(0.5, 20), density_from_pure(fock_state(1, 3)))
        with pytest.raises(InvalidParameterError):
            partial_trace(joint, 0, (7, 7))
        with pytest.raises(InvalidParameterError):
            partial_trace(joint, 2, (20, 3))

    def test_product_dimension_limit(self, monkeypatch):
        monkeypatch.setenv("BOSONIC_MINENT_MAX_PRODUCT_DIM", "4")
        rho = density_from_pure(fock_state(0, 3))
        with pytest.raises(TruncationError):
            tensor(rho, rho)


class TestOperators:
    def test_number_operator(self):
        a = annihilation(5)
        rho = density_from_pure(fock_state(3, 5))
        assert expectation(rho, a.conj().T @ a) == pytest.approx(3.0)

    def test_expectation_shape_mismatch(self):
        with pytest.raises(InvalidParameterError):
            expectation(density_from_pure(fock_state(0, 3)), annihilation(4))

    def test_coherent_amplitudes_are_poisson(self):
        amplitudes = coherent_amplitudes([1.5], 30)[0]
        populations = np.abs(amplitudes) ** 2
        expected = [math.exp(-2.25) * 2.25**m / math.factorial(m) for m in range(30)]
        assert np.allclose(populations, expected, atol=1e-14)
