import numpy as np
import pytest
from hypothesis import given, strategies as st

from decohere.errors import DegenerateCorrelationError, InvalidInputError, PositivityError
from decohere.tdhf import (VARIANTS, CouplingSpec, PotentialSpec, TdhfModel, TdhfState,
                           calibrate_double_well, conserved_energy, decoherence_time_analytic,
                           decoherence_time_numeric, evolve, formal_solution_residual,
                           local_decoherence_times, rhs, short_time_correlations,
                           static_energy, static_minimum)

SYS = PotentialSpec(1.0, 6.0)
ENV = PotentialSpec.harmonic(1.2)
STATE = TdhfState(0.5, 0.3, 0.6, 0.15, 0.4, -0.05)


def coupled(mu12=0.8, variant="exact"):
    return TdhfModel(SYS, ENV, CouplingSpec(mu12), variant)


class TestPotential:
    def test_invariants(self):
        with pytest.raises(InvalidInputError):
            PotentialSpec(1.0, -1.0)
        with pytest.raises(InvalidInputError):
            PotentialSpec(1.0, 0.0)

    def test_derivatives(self):
        p = PotentialSpec(2.0, 6.0)
        x, h = 0.7, 1e-5
        assert p.d1(x) == pytest.approx((p.v(x + h) - p.v(x - h)) / (2 * h), rel=1e-8)
        assert p.d2(x) == pytest.approx((p.d1(x + h) - p.d1(x - h)) / (2 * h), rel=1e-8)
        assert p.d3(x) == pytest.approx((p.d2(x + h) - p.d2(x - h)) / (2 * h), rel=1e-8)


class TestRhs:
    def test_harmonic_fixed_point(self):
        m = TdhfModel(PotentialSpec.harmonic(2.0), PotentialSpec.harmonic(1.0))
        s = TdhfState(0.0, 0.0, 0.25, 0.0, 0.5, 0.0)
        assert np.max(np.abs(rhs(s, m))) < 1e-14

    def test_zero_correlation_rates(self):
        s = TdhfState(0.3, 0.1, 0.7, 0.2, 0.4, -0.1)
        d = dict(zip(("phi1", "pi1", "g1", "s1", "g2", "s2", "g12", "s12"),
                     rhs(s, coupled(1.0))))
        assert d["s12"] == pytest.approx(2.0)
        assert d["g12"] == pytest.approx(0.0, abs=1e-15)

    @given(st.floats(0.05, 3), st.floats(-2, 2), st.floats(0.05, 3), st.floats(-2, 2),
           st.floats(-2, 2))
    def test_width_follows_sigma(self, g1, s1, g2, s2, phi):
        d = rhs(TdhfState(phi, 0.0, g1, s1, g2, s2), coupled(0.5))
        assert np.sign(d[2]) == np.sign(s1)
        assert np.sign(d[4]) == np.sign(s2)

    def test_variants_agree_without_correlations(self):
        s = TdhfState(0.3, 0.1, 0.7, 0.2, 0.4, -0.1)
        ref = rhs(s, coupled(0.0))
        for v in VARIANTS:
            assert np.allclose(rhs(s, coupled(0.0, v)), ref)

    def test_unknown_variant(self):
        with pytest.raises(InvalidInputError):
            coupled(0.5, "other")


class TestEnergy:
    def test_zero_point(self):
        for omega in (0.5, 1.0, 3.0):
            e = static_energy(0.0, 1 / (2 * omega), PotentialSpec.harmonic(omega), 1.0)
            assert e == pytest.approx(omega / 2)

    def test_classical_limit(self):
        s = TdhfState(0.8, 0.4, 0.3, 0.1, 0.5, 0.0, hbar=1e-9)
        m = TdhfModel(SYS, ENV)
        assert conserved_energy(s, m) == pytest.approx(0.5 * 0.4 ** 2 + SYS.v(0.8), abs=1e-7)

    def test_calibrated_minimum(self):
        pot = calibrate_double_well(24.0, -24.3, 1.0)
        e_min, phi, g = static_minimum(pot, 1.0)
        assert e_min == pytest.approx(-24.3, abs=1e-9)
        assert phi > 0 and g > 0
        assert static_energy(phi, g, pot, 1.0) == pytest.approx(-24.3, abs=1e-9)


class TestEvolve:
    def test_decoupled_entropy_is_zero(self):
        tr = evolve(TdhfState(0.7, 0.1, 0.5, 0.1, 0.4, 0.0), coupled(0.0), 10.0, 501)
        assert np.all(tr.entropy == 0.0)

    def test_harmonic_coherent_state(self):
        omega = 1.5
        m = TdhfModel(PotentialSpec.harmonic(omega), PotentialSpec.harmonic(1.0))
        tr = evolve(TdhfState(0.8, 0.0, 1 / (2 * omega), 0.0, 0.5, 0.0), m, 10.0, 401)
        assert np.allclose(tr.column("phi1"), 0.8 * np.cos(omega * tr.t), atol=1e-8)
        assert np.allclose(tr.column("g1"), 1 / (2 * omega), atol=1e-10)

    def test_entropy_grows_from_zero(self):
        tr = evolve(TdhfState(0.5, 0.3, 0.6, 0.0, 0.4, 0.0), coupled(1.0), 0.2, 101)
        assert tr.entropy[0] == 0.0
        assert np.all(np.diff(tr.entropy[1:20]) > 0)

    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.3, 0.8), st.floats(-0.2, 0.2),
           st.floats(0.0, 1.0))
    def test_energy_conservation(self, phi, pi, g1, s1, mu12):
        tr = evolve(TdhfState(phi, pi, g1, s1, 0.5, 0.0), coupled(mu12), 5.0, 101)
        assert tr.energy_drift < 1e-6

    def test_reduced_variants_lose_positivity(self):
        with pytest.raises(PositivityError):
            evolve(STATE, coupled(0.8, "literal"), 20.0, 2001)

    def test_advisory(self):
        tr = evolve(TdhfState(0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.01), coupled(2.0), 5.0, 201)
        assert tr.advisories and "Y reached" in tr.advisories[0]


class TestShortTime:
    def test_initial_values(self):
        s = STATE.replace(g12=0.1, s12=0.2)
        g, sg = short_time_correlations(s, CouplingSpec(0.8), np.array([0.0]))
        assert g[0] == pytest.approx(0.1) and sg[0] == pytest.approx(0.2)

    def test_direct_substitution(self):
        s = TdhfState(0.0, 0.0, 1.0, 0.0, 1.0, 0.0)
        t = np.linspace(0, 0.1, 5)
        g, sg = short_time_correlations(s, CouplingSpec(1.0), t)
        assert np.allclose(sg, 2 * t) and np.allclose(g, -t ** 2)

    def test_cubic_deviation(self):
        m = coupled(0.8)
        devs = []
        for window in (0.1, 0.05):
            tr = evolve(STATE, m, window, 201)
            g, sg = short_time_correlations(STATE, m.coupling, tr.t)
            devs.append(np.max(np.abs(tr.column("g12") - g)) + np.max(np.abs(tr.column("s12") - sg)))
        assert abs(devs[0] / devs[1] / 8 - 1) < 0.25


class TestFormalResidual:
    def test_decoupled(self):
        tr = evolve(TdhfState(0.7, 0.1, 0.5, 0.1, 0.4, 0.0), coupled(0.0), 3.0, 201)
        assert formal_solution_residual(tr) == 0.0

    def test_harmonic_coupled_refines(self):
        m = TdhfModel(PotentialSpec.harmonic(1.0), ENV, CouplingSpec(0.5))
        s = TdhfState(0.5, 0.0, 0.5, 0.1, 0.4, 0.0)
        r = []
        for n in (1001, 2001):
            tr = evolve(s, m, 3.0, n)
            r.append(formal_solution_residual(tr) / np.max(np.abs(tr.column("g12"))))
        assert r[1] < 1e-4
        assert r[0] / r[1] == pytest.approx(4.0, rel=0.2)

    def test_needs_samples(self):
        tr = evolve(STATE, coupled(), 1.0, 20)
        with pytest.raises(InvalidInputError):
            formal_solution_residual(tr)


class TestDecoherenceTime:
    def test_sigma_term(self):
        s = TdhfState(0.0, 0.0, 1.0, 0.25, 1.0, 0.25, 0.1, 0.0)
        assert decoherence_time_analytic(s, CouplingSpec(0.0)) == pytest.approx(0.5)
        assert decoherence_time_analytic(s, CouplingSpec(0.0), "consistent") == np.inf

    def test_coupling_term(self):
        s = TdhfState(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.1)
        assert decoherence_time_analytic(s, CouplingSpec(1.0)) == pytest.approx(0.025)

    def test_degenerate(self):
        with pytest.raises(DegenerateCorrelationError):
            decoherence_time_analytic(TdhfState(0, 0, 1, 0, 1, 0), CouplingSpec(1.0))

    def test_numeric_matches_analytic(self):
        s = TdhfState(0.5, 0.3, 0.6, 0.0, 0.4, 0.0, 0.0, 0.01)
        m = coupled(1.0)
        tau = decoherence_time_analytic(s, m.coupling)
        tr = evolve(s, m, 0.05 * tau, 201)
        assert abs(decoherence_time_numeric(tr) / tau - 1) < 0.05

    def test_zero_correlation_local_time(self):
        tr = evolve(TdhfState(0.5, 0.3, 0.6, 0.0, 0.4, 0.0), coupled(1.0), 0.01, 201)
        t, tau = local_decoherence_times(tr)
        assert np.all(np.abs(tau[2:20] / t[2:20] / 0.5 - 1) < 0.1)
