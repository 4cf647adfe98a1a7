import numpy as np
import pytest
from hypothesis import given, strategies as st

from decohere.densmat import random_density_matrix, random_unitary
from decohere.entropy import (CorrelationBlock, Spectrum, compute_y, dof_entropy_ratio,
                              entropy_from_modes, entropy_timescale, linear_entropy,
                              local_timescale, partition_function, pointer_width,
                              thermal_entropy_via_free_energy, thermal_state,
                              validate_density_matrix, von_neumann_entropy)
from decohere.errors import (DomainError, InvalidInputError, NonPhysicalCorrelationError,
                             UndefinedTimescaleError)


def _shannon(p):
    # independent oracle: plain sum over strictly positive weights
    return -sum(x * np.log(x) for x in p if x > 0)


class TestVonNeumann:
    def test_pure_state_is_zero(self):
        assert von_neumann_entropy(np.diag([1.0, 0.0])) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 5, 16])
    def test_uniform_is_log_n(self, n):
        assert abs(von_neumann_entropy(np.eye(n) / n) - np.log(n)) < 1e-12

    def test_two_level_value(self):
        assert von_neumann_entropy(np.diag([0.9, 0.1])) == pytest.approx(0.325083, abs=1e-6)
        assert von_neumann_entropy(np.diag([0.9, 0.1])) == pytest.approx(_shannon([0.9, 0.1]), abs=1e-14)

    def test_matches_eigenvalue_oracle(self, rng):
        rho = random_density_matrix(6, rng)
        p = np.linalg.eigvalsh(rho)
        assert von_neumann_entropy(rho) == pytest.approx(_shannon(p), abs=1e-12)

    @pytest.mark.parametrize("bad", [
        np.array([[0.5, 0.1], [0.2, 0.5]]),
        np.diag([0.6, 0.6]),
        np.diag([1.2, -0.2]),
        np.ones(3),
    ])
    def test_rejects_invalid(self, bad):
        with pytest.raises(InvalidInputError):
            validate_density_matrix(bad)

    @given(st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
    def test_bounds_and_unitary_invariance(self, dim, seed):
        g = np.random.default_rng(seed)
        rho = random_density_matrix(dim, g, rank=int(g.integers(1, dim + 1)))
        s = von_neumann_entropy(rho)
        assert -1e-12 <= s <= np.log(dim) + 1e-12
        u = random_unitary(dim, g)
        assert von_neumann_entropy(u @ rho @ u.conj().T) == pytest.approx(s, abs=1e-9)
        assert -1e-12 <= linear_entropy(rho) <= 1 - 1 / dim + 1e-12


class TestLinearEntropy:
    def test_values(self):
        assert linear_entropy(np.diag([1.0, 0.0])) == pytest.approx(0.0)
        assert linear_entropy(np.diag([0.5, 0.5])) == pytest.approx(0.5)
        assert linear_entropy(np.diag([0.9, 0.1])) == pytest.approx(0.18)


class TestThermal:
    def test_infinite_temperature_is_uniform(self, rng):
        e = np.sort(rng.uniform(0, 3, 5))
        rho = thermal_state(e, 1e9 * np.max(np.abs(e)))
        assert np.allclose(np.diag(rho).real, 0.2, atol=1e-6)

    def test_two_level_weights(self):
        rho = thermal_state([0.0, 1.0], 1.0)
        assert np.allclose(np.diag(rho).real, [0.731059, 0.268941], atol=1e-6)
        assert partition_function([0.0, 1.0], 1.0) == pytest.approx(1 + np.exp(-1))

    def test_ground_state_limit(self):
        rho = thermal_state([0.0, 1.0], 1e-6)
        assert np.allclose(np.diag(rho).real, [1.0, 0.0], atol=1e-12)

    def test_free_energy_route_two_level(self):
        s = thermal_entropy_via_free_energy([0.0, 1.0], 1.0, dT=1e-4)
        w = np.array([1.0, np.exp(-1.0)]) / (1 + np.exp(-1.0))
        assert s == pytest.approx(_shannon(w), abs=1e-7)
        assert s == pytest.approx(0.582203, abs=1e-6)

    def test_gapped_low_temperature(self):
        assert thermal_entropy_via_free_energy([0.0, 1.0, 2.0], 1e-3) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("temp", [0.01, 1.0, 100.0])
    def test_degenerate_level(self, temp):
        spec = Spectrum(np.array([1.5]), np.array([4]))
        assert thermal_entropy_via_free_energy(spec, temp) == pytest.approx(np.log(4), abs=1e-8)
        assert von_neumann_entropy(thermal_state(spec, temp)) == pytest.approx(np.log(4), abs=1e-12)

    def test_rejects_bad_temperature(self):
        with pytest.raises(DomainError):
            thermal_state([0.0, 1.0], 0.0)
        with pytest.raises(DomainError):
            thermal_entropy_via_free_energy([0.0, 1.0], 1.0, dT=2.0)

    def test_rejects_unsorted(self):
        with pytest.raises(InvalidInputError):
            Spectrum(np.array([1.0, 0.0]))

    @given(st.integers(0, 2 ** 32 - 1), st.sampled_from([0.1, 1.0, 10.0]))
    def test_identity_on_random_spectra(self, seed, temp):
        e = np.sort(np.random.default_rng(seed).uniform(0, 5, 8))
        s_fd = thermal_entropy_via_free_energy(e, temp)
        assert s_fd == pytest.approx(von_neumann_entropy(thermal_state(e, temp)), abs=1e-6)


class TestCorrelationKernels:
    def test_uncorrelated(self):
        assert compute_y(0.7, 1.3, 0.0, 0.0) == 0.0

    def test_direct_values(self):
        assert compute_y(1, 1, 0, 1) == pytest.approx(3 - 2 * np.sqrt(2), abs=1e-12)
        assert compute_y(1, 1, 0, 1) == pytest.approx(0.171573, abs=1e-6)
        y = compute_y(1, 1, 0, 0.2)
        assert y == pytest.approx(0.009805, abs=1e-6)
        assert abs(y / 0.01 - 1) < 0.02

    def test_nonphysical(self):
        with pytest.raises(NonPhysicalCorrelationError):
            compute_y(1.0, 1.0, 1.0, 0.0)

    def test_mode_entropy(self):
        assert entropy_from_modes([0.0, 0.0]) == 0.0
        assert entropy_from_modes([0.5]) == pytest.approx(2 * np.log(2), abs=1e-12)
        assert entropy_from_modes([0.5, 0.5]) == pytest.approx(2.772589, abs=1e-6)
        assert entropy_from_modes([0.5, 0.5], weights=[2.0, 1.0]) == pytest.approx(6 * np.log(2))

    def test_pointer_width(self):
        assert pointer_width(0.3, 0.9, 0.0, 0.0) == pytest.approx(1.2)
        assert pointer_width(1, 1, 0.5, 0) == pytest.approx(4 / 0.75)
        assert pointer_width(1, 1, 0, 0.5) == pytest.approx(3.2)
        blk = CorrelationBlock(1.0, 1.0, 0.0, 0.5)
        assert blk.pointer_width == pytest.approx(3.2)
        assert blk.entropy == pytest.approx(entropy_from_modes([blk.y]))

    @given(st.floats(0.05, 5), st.floats(0.05, 5), st.floats(-1, 1), st.floats(-3, 3))
    def test_y_range_and_entropy_monotone(self, g1, g2, u, s12):
        g12 = 0.99 * u / np.sqrt(g1 * g2)
        y = compute_y(g1, g2, g12, s12)
        assert 0 <= y < 1
        assert entropy_from_modes([y]) >= 0
        assert entropy_from_modes([min(y + 0.01, 0.999)]) >= entropy_from_modes([y])


class TestTimescales:
    def test_exponential(self):
        t = np.linspace(0, 2, 41)
        assert entropy_timescale(t, 1e-3 * np.exp(t / 0.37)) == pytest.approx(0.37, rel=1e-6)

    def test_quadratic_gives_half_t(self):
        t = np.linspace(1e-3, 0.1, 100)
        tau = local_timescale(t, 5 * t ** 2)
        assert np.allclose(tau[10:-1] / t[10:-1], 0.5, rtol=2e-2)

    def test_constant_is_undefined(self):
        with pytest.raises(UndefinedTimescaleError) as err:
            entropy_timescale(np.linspace(0, 1, 10), np.full(10, 0.2))
        assert err.value.tau == np.inf


class TestDofRatio:
    def test_values(self):
        assert dof_entropy_ratio(2, 37) == pytest.approx(0.054054, abs=1e-6)
        assert dof_entropy_ratio(5, 5) == 1.0
        assert dof_entropy_ratio(6, 3) == 2.0

    def test_rejects_nonpositive(self):
        with pytest.raises((InvalidInputError, DomainError)):
            dof_entropy_ratio(0, 3)
