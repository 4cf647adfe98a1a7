import numpy as np
import pytest
from hypothesis import given, strategies as st

from decohere.chaos import (ClassifierThresholds, SweepConfig, calibrate_thresholds,
                            classify_spectrum, closed_curve_residual, density_diagonal_series,
                            energy_sweep, lyapunov_exponent, occupancy, on_shell_state,
                            poincare_section, system_energy, system_trajectory)
from decohere.errors import DomainError, InvalidInputError
from decohere.numerics import dominant_lines, power_spectrum
from decohere.tdhf import PotentialSpec, calibrate_double_well

HARMONIC = PotentialSpec.harmonic(1.0)


@pytest.fixture(scope="module")
def well():
    return calibrate_double_well(24.0, -24.3, 1.0)


class TestStates:
    def test_on_shell_energy(self, well):
        for e in (-24.0, -6.0, 10.0):
            y0 = on_shell_state(well, e)
            assert system_energy(y0, well, 1.0)[0] == pytest.approx(e, abs=1e-10)
            assert y0[0] < 0 and y0[1] >= 0 and y0[3] == 0

    def test_below_minimum(self, well):
        with pytest.raises(DomainError):
            on_shell_state(well, -30.0)

    def test_energy_conserved_on_run(self, well):
        run = system_trajectory(on_shell_state(well, -6.0), well, 1.0, 100.0)
        assert run.energy_drift < 1e-7


class TestDensityDiagonal:
    def test_static_state_is_constant(self):
        y = np.tile([0.0, 0.0, 0.5, 0.0], (10, 1))
        s = density_diagonal_series(y, 0.2)
        assert np.all(s == s[0])

    def test_normalisation(self, well):
        run = system_trajectory(on_shell_state(well, -6.0), well, 1.0, 5.0, dt_sample=0.5)
        x = np.linspace(-12, 12, 24001)
        rows = np.array([density_diagonal_series(run.states, xs) for xs in x])
        norm = np.trapezoid(rows, x, axis=0)
        assert np.max(np.abs(norm - 1)) < 1e-8

    def test_coherent_state_harmonics(self):
        run = system_trajectory([1.0, 0.0, 0.5, 0.0], HARMONIC, 1.0, 409.6, dt_sample=0.1)
        s = density_diagonal_series(run.states, 0.3)
        f, p = power_spectrum(s[:4096], 0.1)
        base = 1 / (2 * np.pi)
        for freq, _ in dominant_lines(f, p):
            k = freq / base
            assert abs(k - round(k)) * base < 2 * f[1]

    def test_classical_needs_width(self):
        with pytest.raises(InvalidInputError):
            density_diagonal_series(np.zeros((3, 4)), 0.0, hbar=0.0)


class TestClassifier:
    def test_sinusoid_is_regular(self):
        t = np.arange(8192) * 0.05
        rep = classify_spectrum(np.sin(1.7 * t), 0.05)
        assert rep.classification == "regular"
        assert rep.normalized_entropy < 0.3
        assert len(rep.dominant_lines) == 1

    def test_noise_is_chaotic(self):
        x = np.random.default_rng(7).standard_normal(16384)
        rep = classify_spectrum(x)
        assert rep.classification == "chaotic"
        assert abs(rep.normalized_entropy - 1) < 0.05

    def test_thresholds_calibration_reproduces_defaults(self):
        th = calibrate_thresholds(seed=0)
        frozen = ClassifierThresholds()
        assert th.regular_below == pytest.approx(frozen.regular_below, abs=1e-3)
        assert th.chaotic_above == pytest.approx(frozen.chaotic_above, abs=1e-3)

    def test_constant_series(self):
        assert classify_spectrum(np.ones(2048)).classification == "regular"

    def test_short_series(self):
        with pytest.raises(InvalidInputError):
            classify_spectrum(np.ones(100))

    def test_threshold_order(self):
        with pytest.raises(InvalidInputError):
            ClassifierThresholds(0.7, 0.6)


class TestLyapunov:
    def test_harmonic_is_zero(self):
        est = lyapunov_exponent(np.array([1.0, 0.0, 0.5, 0.0]), HARMONIC, 1.0, horizon=300)
        assert abs(est.value) < 1e-3

    @pytest.mark.parametrize("energy", [-20.0, -6.0, 5.0, 50.0])
    def test_classical_limit_is_regular(self, well, energy):
        est = lyapunov_exponent(on_shell_state(well, energy, 0.0), well, 0.0, horizon=3000)
        assert abs(est.value) < 1e-3

    def test_chaotic_band_positive_and_agrees(self, well):
        rows = energy_sweep([-6.0], SweepConfig(well))
        assert rows[0].lyapunov > 0.05
        assert rows[0].label == "chaotic" == rows[0].lyapunov_label


class TestSections:
    def test_harmonic_closed_curve(self):
        sec = poincare_section(np.array([1.0, 0.3, 0.4, 0.1]), HARMONIC, 1.0, 60)
        assert sec.complete
        assert closed_curve_residual(sec.points) < 1e-3
        assert sec.energy_error < 1e-8

    def test_occupancy_contrast(self, well):
        reg = poincare_section(on_shell_state(well, -23.0), well, 1.0, 600).points
        cha = poincare_section(on_shell_state(well, -6.0), well, 1.0, 600).points
        both = np.vstack([reg, cha])
        box = ((both[:, 0].min(), both[:, 0].max()), (both[:, 1].min(), both[:, 1].max()))
        assert occupancy(cha, 50, box) > 10 * occupancy(reg, 50, box)

    def test_incomplete_section(self, well):
        sec = poincare_section(on_shell_state(well, -6.0), well, 1.0, 10_000, max_time=50.0)
        assert not sec.complete and len(sec.points) > 0

    @given(st.integers(6, 40), st.floats(0.5, 3), st.floats(0.2, 2))
    def test_ellipse_residual_property(self, n, a, b):
        th = np.linspace(0, 2 * np.pi, n, endpoint=False)
        assert closed_curve_residual(np.column_stack([a * np.cos(th), b * np.sin(th)])) < 1e-8


class TestSweep:
    def test_regular_chaotic_regular(self, well):
        rows = energy_sweep([-24.0, -6.0, 100.0], SweepConfig(well))
        assert [r.label for r in rows] == ["regular", "chaotic", "regular"]

    def test_resonance_is_regular(self, well):
        rows = energy_sweep([-3.68601, -6.0], SweepConfig(well))
        assert rows[0].label == "regular"
        assert rows[0].normalized_entropy < rows[1].normalized_entropy

    def test_failed_row_is_recorded(self, well):
        rows = energy_sweep([-40.0], SweepConfig(well))
        assert rows[0].label == "failed" and "DomainError" in rows[0].error

    def test_parallel_matches_serial(self, well):
        cfg = SweepConfig(well, horizon=120.0)
        a = energy_sweep([-20.0, -6.0], cfg, workers=1)
        b = energy_sweep([-20.0, -6.0], cfg, workers=2)
        assert [r.spectral_entropy for r in a] == [r.spectral_entropy for r in b]
