import numpy as np
import pytest
from hypothesis import given, strategies as st

from decohere.errors import InvalidInputError
from decohere.numerics import (IntegrationError, OdeProblem, dominant_lines, gaussian_entropy,
                               gaussian_purity, integrate, is_physical, jit_rhs, linear_flow,
                               locate_events, mode_entropy, power_spectrum, random_symplectic,
                               reduce_covariance, sign_flips, spectral_entropy,
                               symplectic_defect, symplectic_eigenvalues, symplectic_form)


def oscillator(t, y):
    return np.array([y[1], -y[0]])


@jit_rhs
def jit_oscillator(t, y, p):
    out = np.empty(2)
    out[0] = y[1]
    out[1] = -p[0] * y[0]
    return out


class TestIntegrator:
    def test_closed_orbit(self):
        traj = integrate(OdeProblem(oscillator, (0, 2 * np.pi), [1.0, 0.0], rtol=1e-12, atol=1e-14))
        assert abs(traj.y[-1, 0] - 1.0) < 1e-8

    def test_jitted_matches_python(self):
        p = OdeProblem(jit_oscillator, (0, 5.0), [1.0, 0.0], params=np.array([1.0]))
        traj = integrate(p)
        assert traj(5.0)[0] == pytest.approx(np.cos(5.0), abs=1e-8)

    def test_dense_output_accuracy(self):
        traj = integrate(OdeProblem(oscillator, (0, 10), [1.0, 0.0], rtol=1e-11, atol=1e-13))
        t = np.linspace(0, 10, 777)
        assert np.max(np.abs(traj(t)[:, 0] - np.cos(t))) < 1e-8

    def test_fifth_order_convergence(self):
        def err(h):
            tr = integrate(OdeProblem(oscillator, (0, 2.0), [1.0, 0.0]), fixed_step=h)
            return np.linalg.norm(tr.y[-1] - [np.cos(2.0), -np.sin(2.0)])

        ratio = err(0.2) / err(0.1)
        assert abs(ratio / 32 - 1) < 0.2

    def test_nan_rhs_fails(self):
        with pytest.raises(IntegrationError) as info:
            integrate(OdeProblem(lambda t, y: y * np.nan, (0, 1), [1.0]))
        assert info.value.t_last == 0.0

    def test_max_steps(self):
        with pytest.raises(IntegrationError):
            integrate(OdeProblem(oscillator, (0, 100), [1.0, 0.0]), max_steps=5)

    def test_out_of_span_query(self):
        traj = integrate(OdeProblem(oscillator, (0, 1), [1.0, 0.0]))
        with pytest.raises(ValueError):
            traj(2.0)

    @given(st.floats(0.2, 3.0), st.floats(-2, 2))
    def test_energy_of_oscillator(self, omega, x0):
        p = OdeProblem(jit_oscillator, (0, 10.0), [x0, 0.3], rtol=1e-11, atol=1e-13,
                       params=np.array([omega ** 2]))
        y = integrate(p).y
        e = 0.5 * y[:, 1] ** 2 + 0.5 * omega ** 2 * y[:, 0] ** 2
        assert np.max(np.abs(e - e[0])) < 1e-8 * max(1.0, e[0])


class TestEvents:
    def _traj(self):
        return integrate(OdeProblem(lambda t, y: np.array([1.0]), (0, 10), [0.0], rtol=1e-10))

    def test_sine_crossings(self):
        hits = locate_events(self._traj(), lambda t, y: np.sin(t), substeps=20)
        assert np.allclose([h[0] for h in hits], [np.pi, 2 * np.pi, 3 * np.pi], atol=1e-8)

    def test_direction_filter(self):
        hits = locate_events(self._traj(), lambda t, y: np.sin(t), direction=1, substeps=20)
        assert np.allclose([h[0] for h in hits], [2 * np.pi], atol=1e-8)

    def test_sign_flip_oracle_on_tdhf_run(self):
        from decohere.chaos import on_shell_state, system_trajectory
        from decohere.tdhf import calibrate_double_well
        pot = calibrate_double_well()
        run = system_trajectory(on_shell_state(pot, -6.0), pot, 1.0, 60.0, dt_sample=0.002)
        sigma = run.states[:, 3]
        from decohere.chaos import _params, _system_rhs
        traj = integrate(OdeProblem(_system_rhs, (0, 60.0), run.states[0], rtol=1e-11,
                                    atol=1e-12, params=_params(pot, 1.0)))
        rising = locate_events(traj, lambda t, y: y[3], direction=1, substeps=8)
        both = locate_events(traj, lambda t, y: y[3], direction=0, substeps=8)
        flips = sign_flips(sigma)
        assert abs(len(both) - flips) <= 1
        assert abs(len(rising) - flips / 2) <= 1

    def test_sign_flips(self):
        assert sign_flips([1, -1, 0, -2, 3]) == 2


class TestGaussian:
    def test_vacuum(self):
        assert np.allclose(symplectic_eigenvalues(np.eye(2) / 2), [0.5])
        assert gaussian_entropy(np.eye(2) / 2) == pytest.approx(0.0, abs=1e-12)
        assert gaussian_purity(np.eye(2) / 2) == pytest.approx(1.0)

    def test_thermal_mode(self):
        assert np.allclose(symplectic_eigenvalues(2 * np.eye(2)), [2.0])

    def test_mode_entropy_value(self):
        assert mode_entropy(1.0) == pytest.approx(1.5 * np.log(1.5) - 0.5 * np.log(0.5))
        assert mode_entropy(1.0) == pytest.approx(0.954771, abs=1e-6)

    def test_pure_two_mode_reductions_equal(self, rng):
        s = random_symplectic(2, rng, scale=0.6)
        v = 0.5 * s @ s.T
        a = symplectic_eigenvalues(reduce_covariance(v, [0]))
        b = symplectic_eigenvalues(reduce_covariance(v, [1]))
        assert a == pytest.approx(b, abs=1e-10)
        assert gaussian_purity(v) == pytest.approx(1.0, abs=1e-10)

    def test_rejects_indefinite(self):
        with pytest.raises(InvalidInputError):
            symplectic_eigenvalues(np.diag([1.0, -1.0]))
        assert not is_physical(np.diag([0.1, 0.1]))

    def test_flow_identity_and_rotation(self):
        assert np.allclose(linear_flow(np.zeros((2, 2)), 3.0), np.eye(2))
        a = np.array([[0.0, 1.0], [-1.0, 0.0]])
        t = 0.7
        assert np.allclose(linear_flow(a, t), [[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]])

    def test_bath_generator_is_symplectic(self):
        from decohere.brownian import BathModel, BathSpec, ParticleInit
        m = BathModel.from_spec(ParticleInit(), BathSpec(1.0, 1.0, None, 10))
        assert symplectic_defect(linear_flow(m.generator, 3.0)) < 1e-9

    @given(st.integers(1, 4), st.integers(0, 2 ** 32 - 1), st.floats(0.5, 3.0))
    def test_spectrum_properties(self, n, seed, nu):
        g = np.random.default_rng(seed)
        s = random_symplectic(n, g, scale=0.5)
        assert symplectic_defect(s) < 1e-9
        v = nu * s @ s.T
        ev = symplectic_eigenvalues(v)
        assert np.allclose(ev, nu, rtol=1e-7)
        assert gaussian_purity(v) == pytest.approx((2 * nu) ** -n, rel=1e-7)
        assert symplectic_form(n).shape == (2 * n, 2 * n)


class TestSpectral:
    def test_single_tone(self):
        t = np.arange(4096) * 0.05
        f, p = power_spectrum(np.sin(2 * np.pi * 1.3 * t), 0.05)
        lines = dominant_lines(f, p)
        assert len(lines) == 1
        assert lines[0][0] == pytest.approx(1.3, abs=f[1])
        assert lines[0][1] > 0.99

    def test_two_tones(self):
        t = np.arange(8192) * 0.05
        x = np.sin(2 * np.pi * 0.9 * t) + 0.7 * np.sin(2 * np.pi * np.sqrt(2) * t)
        assert len(dominant_lines(*power_spectrum(x, 0.05))) == 2

    def test_white_noise_entropy(self, rng):
        n = 4096
        acc = 0.0
        for _ in range(32):
            f, p = power_spectrum(rng.standard_normal(n), 1.0)
            acc += p
        assert abs(spectral_entropy(acc) / np.log(acc.size) - 1) < 0.05

    @given(st.integers(0, 2 ** 32 - 1))
    def test_parseval_without_window(self, seed):
        x = np.random.default_rng(seed).standard_normal(256)
        _, p = power_spectrum(x, 1.0, window=None)
        assert np.sum(p) == pytest.approx(np.var(x), rel=1e-10)

    def test_rejects_short(self):
        with pytest.raises(InvalidInputError):
            power_spectrum(np.ones(4))

    def test_nonuniform_times(self):
        t = np.sort(np.random.default_rng(0).uniform(0, 10, 64))
        with pytest.raises(InvalidInputError):
            power_spectrum(np.sin(t), times=t)
