import math

import numpy as np
import pytest

from src.channels import (
    apply_channel,
    apply_classical_noise,
    apply_superoperator,
    apply_thermal_noise,
    beam_splitter_unitary,
    channel_superoperator,
    classical_noise_superoperator,
    classical_quadrature,
    effective_thermal_photon,
    gaussian_moments,
    output_cutoff,
    propagate_gaussian,
    squeezed_gaussian,
    thermal_noise_superoperator,
    verify_composition,
    working_dim,
)
from src.entropies import renyi_entropy, z_purity
from src.errors import ConvergenceError, InvalidParameterError, TruncationError
from src.fock_core import (
    annihilation,
    coherent_state,
    density_from_pure,
    embed,
    expectation,
    fock_state,
    pure_state,
    random_pure_state,
    thermal_cutoff,
    thermal_state,
)
from src.models import ClassicalNoiseSpec, DensityOperator, ThermalNoiseSpec


class TestQuadrature:
    def test_weights_integrate_to_one(self, quad_n1):
        assert quad_n1.size == 40 * 64
        assert quad_n1.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_second_moment_is_noise(self):
        quad = classical_quadrature(2.5)
        assert np.dot(quad.weights, np.abs(quad.nodes) ** 2) == pytest.approx(2.5)

    def test_negative_noise_rejected(self):
        with pytest.raises(InvalidParameterError):
            classical_quadrature(-1.0)


class TestCutoffPolicy:
    def test_working_dim(self):
        assert working_dim(3, 1.0) == 23

    def test_identity_channel_needs_no_headroom(self):
        assert output_cutoff(3, 0.0) == 3

    def test_output_cutoff_is_at_least_working_dim(self):
        assert output_cutoff(3, 1.0) >= working_dim(3, 1.0)


class TestClassicalNoise:
    def test_vacuum_becomes_thermal(self, quad_n1):
        vacuum = embed(density_from_pure(fock_state(0, 1)), 60)
        out = apply_classical_noise(vacuum, ClassicalNoiseSpec(n=1.0), quad_n1)
        assert z_purity(out, 2) == pytest.approx(1.0 / 3.0, abs=1e-6)
        assert renyi_entropy(out, 2) == pytest.approx(math.log(3.0), abs=1e-5)

    def test_zero_noise_is_identity(self):
        rho = density_from_pure(fock_state(2, 3))
        assert apply_classical_noise(rho, ClassicalNoiseSpec(n=0.0)) is rho

    def test_missing_headroom_raises(self):
        rho = density_from_pure(fock_state(2, 5))
        with pytest.raises(TruncationError):
            apply_classical_noise(rho, ClassicalNoiseSpec(n=1.0))

    def test_quadrature_for_other_noise_raises(self):
        rho = embed(density_from_pure(fock_state(0, 1)), 40)
        with pytest.raises(InvalidParameterError):
            apply_classical_noise(
                rho, ClassicalNoiseSpec(n=1.0), classical_quadrature(2.0)
            )

    def test_mean_kept_and_photons_added(self):
        rho = density_from_pure(coherent_state(0.5, 20))
        out = apply_channel(rho, ClassicalNoiseSpec(n=1.0))
        a = annihilation(out.dim)
        assert abs(expectation(out, a) - 0.5) < 1e-6
        assert expectation(out, a.conj().T @ a).real == pytest.approx(1.25, abs=1e-5)

    @pytest.mark.parametrize("n", [1.0, 3.0])
    def test_doubling_the_quadrature_changes_nothing(self, n):
        quad = classical_quadrature(n)
        spec = ClassicalNoiseSpec(n=n)
        for m in range(6):
            rho = embed(density_from_pure(fock_state(m, m + 1)), 80)
            coarse = apply_classical_noise(rho, spec, quad)
            fine = apply_classical_noise(rho, spec, quad.doubled())
            assert np.max(np.abs(coarse.matrix - fine.matrix)) < 1e-8
            checked = apply_classical_noise(rho, spec, quad, check_convergence=True)
            assert np.allclose(checked.matrix, coarse.matrix, atol=1e-14)

    def test_coarse_quadrature_fails_the_check(self):
        rho = embed(density_from_pure(fock_state(5, 6)), 40)
        coarse = classical_quadrature(1.0, radial_order=4, angular_count=8)
        with pytest.raises(ConvergenceError):
            apply_classical_noise(
                rho, ClassicalNoiseSpec(n=1.0), coarse, check_convergence=True
            )

    def test_unital(self):
        rho = DensityOperator(dim=20, matrix=np.eye(20) / 20.0)
        out = apply_channel(rho, ClassicalNoiseSpec(n=0.5))
        assert np.allclose(20.0 * out.matrix[:4, :4], np.eye(4), atol=1e-6)

    @pytest.mark.parametrize("m", [0, 2])
    def test_fock_moments_follow_gaussian_propagation(self, m):
        rho = density_from_pure(fock_state(m, m + 1))
        for channel in (ClassicalNoiseSpec(n=1.0), ThermalNoiseSpec(eta=0.5, N=1.0)):
            expected = propagate_gaussian(gaussian_moments(rho), channel)
            got = gaussian_moments(apply_channel(rho, channel))
            assert abs(got.mean) < 1e-8
            assert np.allclose(got.cov, expected.cov, atol=1e-6)

    def test_superoperator_matches_direct_application(self, rng):
        psi = random_pure_state(3, 3, rng)
        superop = classical_noise_superoperator(1.0, 3)
        dim = superop.shape[0]
        direct = apply_classical_noise(
            embed(density_from_pure(psi), dim), ClassicalNoiseSpec(n=1.0)
        )
        block = np.outer(psi.amplitudes, psi.amplitudes.conj())
        out = apply_superoperator(superop, block)
        assert np.allclose(out, direct.matrix, atol=1e-7)

    def test_identity_superoperator(self):
        superop = classical_noise_superoperator(0.0, 2)
        block = np.array([[0.5, 0.5j], [-0.5j, 0.5]])
        assert np.allclose(apply_superoperator(superop, block), block)


class TestThermalNoise:
    def test_vacuum_reaches_equivalent_thermal_state(self):
        vacuum = density_from_pure(fock_state(0, 1))
        out = apply_thermal_noise(vacuum, ThermalNoiseSpec(eta=0.5, N=2.0))
        assert renyi_entropy(out, 2) == pytest.approx(math.log(3.0), abs=1e-6)

    def test_unit_transmissivity_is_identity(self):
        rho = density_from_pure(fock_state(1, 2))
        assert apply_thermal_noise(rho, ThermalNoiseSpec(eta=1.0, N=3.0)) is rho

    def test_mean_scales_with_amplitude_transmission(self):
        rho = density_from_pure(coherent_state(0.8, 12))
        out = apply_thermal_noise(rho, ThermalNoiseSpec(eta=0.5, N=0.5))
        mean = expectation(out, annihilation(out.dim))
        assert abs(mean - math.sqrt(0.5) * 0.8) < 1e-6

    def test_superoperator_matches_dilation(self, rng):
        spec = ThermalNoiseSpec(eta=0.7, N=0.5)
        psi = random_pure_state(3, 3, rng)
        superop = channel_superoperator(spec, 3)
        block = np.outer(psi.amplitudes, psi.amplitudes.conj())
        direct = apply_thermal_noise(density_from_pure(psi), spec)
        out = apply_superoperator(superop, block)
        assert np.allclose(out, direct.matrix, atol=1e-8)

    @pytest.mark.parametrize("N, photons", [(2.0, 1.0), (3.0, 1.5)])
    def test_strong_environment_at_default_settings(self, vacuum, N, photons):
        spec = ThermalNoiseSpec(eta=0.5, N=N)
        out = apply_thermal_noise(vacuum, spec)
        assert renyi_entropy(out, 2) == pytest.approx(
            math.log(2 * photons + 1), abs=1e-6
        )

        coherent = density_from_pure(coherent_state(1.0, 14))
        out = apply_thermal_noise(coherent, spec)
        mean = expectation(out, annihilation(out.dim))
        assert abs(mean - math.sqrt(0.5)) < 1e-6
        assert z_purity(out, 2) == pytest.approx(1 / (2 * photons + 1), abs=1e-6)

    def test_two_mode_limit_does_not_apply(self, monkeypatch, vacuum):
        monkeypatch.setenv("BOSONIC_MINENT_MAX_PRODUCT_DIM", "4")
        out = apply_thermal_noise(vacuum, ThermalNoiseSpec(eta=0.5, N=1.0))
        assert renyi_entropy(out, 2) == pytest.approx(math.log(2.0), abs=1e-6)

    def test_zero_transmissivity_swaps_in_environment(self):
        rho = density_from_pure(fock_state(2, 3))
        out = apply_thermal_noise(rho, ThermalNoiseSpec(eta=0.0, N=1.0))
        assert out.dim == 29
        assert np.allclose(out.matrix, thermal_state(1.0, 29).matrix, atol=1e-7)

    def test_superoperator_matches_full_beam_splitter(self):
        spec = ThermalNoiseSpec(eta=0.3, N=0.2)
        env_dim = thermal_cutoff(0.2)
        dim = 2 + env_dim - 1
        unitary = beam_splitter_unitary(0.3, dim, dim).reshape(dim, dim, dim, dim)
        kraus = unitary[:, :, :2, :env_dim]
        populations = np.diag(thermal_state(0.2, env_dim).matrix).real
        expected = np.einsum("pqmk,k,rqnk->prmn", kraus, populations, kraus)
        assert np.allclose(
            thermal_noise_superoperator(spec, 2), expected, atol=1e-12
        )

    def test_beam_splitter_is_orthogonal(self):
        unitary = beam_splitter_unitary(0.3, 4, 4)
        assert np.allclose(unitary @ unitary.T, np.eye(16), atol=1e-12)

    def test_beam_splitter_rejects_bad_eta(self):
        with pytest.raises(InvalidParameterError):
            beam_splitter_unitary(1.5, 2, 2)

    @pytest.mark.slow
    @pytest.mark.parametrize("eta, N", [(0.3, 1.0), (0.7, 0.5)])
    def test_composition_rule(self, eta, N):
        states = [
            density_from_pure(fock_state(0, 1)),
            density_from_pure(fock_state(1, 2)),
            density_from_pure(coherent_state(0.5, 12)),
            density_from_pure(pure_state([1.0, 1.0j, -0.5])),
            density_from_pure(pure_state([0.2, 0.0, 1.0])),
        ]
        spec = ThermalNoiseSpec(eta=eta, N=N)
        for rho in states:
            assert verify_composition(rho, spec) < 1e-6


class TestGaussian:
    def test_squeezed_output_covariance(self):
        out = propagate_gaussian(squeezed_gaussian(4.0), ClassicalNoiseSpec(n=1.0))
        assert np.allclose(out.cov, np.diag([3.0, 1.125]))
        assert effective_thermal_photon(out) == pytest.approx(math.sqrt(3.375) - 0.5)

    def test_thermal_propagation_matches_equivalent_noise(self):
        out = propagate_gaussian(
            squeezed_gaussian(1.0, mean=1.0), ThermalNoiseSpec(eta=0.5, N=1.0)
        )
        assert abs(out.mean - math.sqrt(0.5)) < 1e-12
        assert effective_thermal_photon(out) == pytest.approx(0.5)

    def test_moments_of_coherent_state(self):
        rho = density_from_pure(coherent_state(0.3 + 0.4j, 20))
        g = gaussian_moments(rho)
        assert abs(g.mean - (0.3 + 0.4j)) < 1e-8
        assert np.allclose(g.cov, 0.5 * np.eye(2), atol=1e-8)

    def test_moments_of_vacuum(self, vacuum):
        g = gaussian_moments(vacuum)
        assert g.mean == 0
        assert np.allclose(g.cov, 0.5 * np.eye(2))

    def test_invalid_squeeze(self):
        with pytest.raises(InvalidParameterError):
            squeezed_gaussian(0.0)

    def test_covariance_below_uncertainty_limit(self):
        with pytest.raises(InvalidParameterError):
            effective_thermal_photon(np.diag([0.1, 0.1]))
