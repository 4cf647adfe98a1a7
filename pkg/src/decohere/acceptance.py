"""Acceptance checks shared by ``decohere verify`` and the test suite.

Each check returns a :class:`CriterionResult`. Checks look up library
functions through this module's globals, so a test can substitute a broken
kernel and confirm that the harness reports it.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .brownian import BathModel, BathSpec, ParticleInit, discretize_bath, effective_g0, ground_state_width, run as brownian_run
from .chaos import (SweepConfig, energy_sweep, occupancy, on_shell_state, poincare_section)
from .densmat import (entropy_equality_check, random_density_matrix, random_hermitian,
                      random_pure_bipartite, schmidt_entropy, unitary_evolve)
from .entropy import (dof_entropy_ratio, thermal_entropy_via_free_energy, thermal_state,
                      von_neumann_entropy)
from .numerics.gaussian import gaussian_purity, random_symplectic
from .tdhf import (CouplingSpec, PotentialSpec, TdhfModel, TdhfState, calibrate_double_well,
                   decoherence_time_analytic, decoherence_time_numeric, evolve,
                   formal_solution_residual, local_decoherence_times, short_time_correlations)

__all__ = ["CRITERIA", "SUITES", "CriterionResult", "run_criterion", "run_suite"]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0
    budget: float = float("inf")

    @property
    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.name} ({self.elapsed:.1f}s)"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["details"] = {k: _plain(v) for k, v in self.details.items()}
        return d


def _plain(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


# ---------------------------------------------------------------- kernels

def _c1_entropy_kernels(rng):
    pure_max = 0.0
    for dim in range(2, 9):
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi /= np.linalg.norm(psi)
        pure_max = max(pure_max, abs(von_neumann_entropy(np.outer(psi, psi.conj()))))
    uniform_err = max(abs(von_neumann_entropy(np.eye(n) / n) - np.log(n)) for n in range(1, 17))
    thermal_err = 0.0
    for _ in range(20):
        spec = np.sort(rng.uniform(0.0, 5.0, 8))
        for temp in (0.1, 1.0, 10.0):
            s_fd = thermal_entropy_via_free_energy(spec, temp)
            s_vn = von_neumann_entropy(thermal_state(spec, temp))
            thermal_err = max(thermal_err, abs(s_fd - s_vn))
    ok = pure_max < 1e-12 and uniform_err < 1e-12 and thermal_err < 1e-6
    return ok, dict(pure_max=pure_max, uniform_err=uniform_err, thermal_err=thermal_err)


def _c2_unitary_invariance(rng):
    worst = 0.0
    for _ in range(200):
        dim = int(rng.integers(2, 9))
        rho = random_density_matrix(dim, rng)
        h = random_hermitian(dim, rng)
        t = float(rng.uniform(0.0, 5.0))
        worst = max(worst, abs(von_neumann_entropy(unitary_evolve(rho, h, t))
                               - von_neumann_entropy(rho)))
    return worst < 1e-9, dict(max_entropy_change=worst)


def _bath_model(w0=1.0, v0=1.0, g=8.0, n_modes=256, mass=1.0):
    return BathModel.from_spec(ParticleInit(mass, w0, v0), BathSpec(1.0, g, None, n_modes))


def _c3_schmidt(rng):
    gap_max, oracle_max = 0.0, 0.0
    for _ in range(1000):
        da, db = (int(x) for x in rng.integers(1, 9, size=2))
        psi = random_pure_bipartite(da, db, rng)
        s_a, _, gap = entropy_equality_check(psi)
        gap_max = max(gap_max, gap)
        oracle_max = max(oracle_max, abs(s_a - schmidt_entropy(psi)))
    model = _bath_model(w0=0.3)
    res = brownian_run(model, np.linspace(0.0, 20.0, 20))
    gauss_gap = float(np.max(np.abs(res.s_vn - res.s_env)))
    ok = gap_max < 1e-9 and oracle_max < 1e-9 and gauss_gap < 1e-6
    return ok, dict(max_gap=gap_max, max_schmidt_oracle_diff=oracle_max,
                    gaussian_gap=gauss_gap, final_particle_entropy=float(res.s_vn[-1]))


def _c11_gaussian_purity(rng):
    worst = 0.0
    for _ in range(10):
        nu = rng.uniform(0.5, 2.0)
        s = random_symplectic(1, rng, scale=0.4)
        v = nu * s @ s.T
        a, b, c = v[0, 0], v[1, 1], v[0, 1]
        coh = b - c * c / a
        half = 7.0 * max(np.sqrt(a), 1.0 / np.sqrt(coh))
        x = np.linspace(-half, half, 512)
        dx = x[1] - x[0]
        xx, xp = np.meshgrid(x, x, indexing="ij")
        mid, dif = 0.5 * (xx + xp), xx - xp
        rho = (np.exp(-mid ** 2 / (2 * a) - 0.5 * coh * dif ** 2 + 1j * (c / a) * mid * dif)
               / np.sqrt(2 * np.pi * a))
        grid_purity = float(np.sum(np.abs(rho) ** 2) * dx * dx)
        worst = max(worst, abs(grid_purity - gaussian_purity(v)))
    return worst < 1e-3, dict(max_purity_diff=worst)


def _c12_dof_ratio(rng):
    r = dof_entropy_ratio(2, 37)
    return abs(r - 0.054054) < 1e-6 and abs(r - 2 / 37) < 1e-9, dict(ratio=r)


# ---------------------------------------------------------------- brownian

def _c4_brownian_exactness(rng):
    n = 256
    t_end = 2 * np.pi * n / 4.0
    times = np.linspace(0.0, t_end, 21)
    res = brownian_run(_bath_model(w0=0.5, n_modes=n), times)
    free_model = _bath_model(w0=0.5, g=0.0, n_modes=n)
    free = brownian_run(free_model, times, env_entropy=False)
    w0, mass = 0.5, 1.0
    law = np.sqrt(w0 ** 2 + (times / (2 * mass * w0)) ** 2) / w0
    width_err = float(np.max(np.abs(free.width_ratio - law) / law))
    ok = res.purity_defect < 1e-8 and res.energy_drift < 1e-8 and width_err < 1e-8
    return ok, dict(purity_defect=res.purity_defect, energy_drift=res.energy_drift,
                    free_width_rel_err=width_err, t_end=t_end)


def _c5_brownian_regimes(rng):
    spec = BathSpec(1.0, 8.0, None, 256)
    g0 = effective_g0(*discretize_bath(spec), 1.0)
    wgs = ground_state_width(1.0, 1.0, g0)
    t_star = (np.pi / 2) / np.sqrt(2 * g0)
    times = np.linspace(0.0, t_star, 17)
    out = {}
    for name, w0 in (("small", wgs / 4), ("medium", wgs), ("large", 4 * wgs)):
        r = brownian_run(BathModel.from_spec(ParticleInit(1.0, w0, 1.0), spec), times,
                         env_entropy=False)
        free = np.sqrt(1 + (t_star / (2 * w0 ** 2)) ** 2)
        out[name] = dict(w0=w0, alpha=r.alpha, width_ratio=float(r.width_ratio[-1]),
                         free_ratio=float(free), entropy=float(r.s_vn[-1]),
                         velocity_decreasing=bool(np.all(np.diff(r.velocity_ratio) < 0)))
    a_ok = all(v["velocity_decreasing"] for v in out.values())
    small_faster = out["small"]["width_ratio"] > out["small"]["free_ratio"]
    large_squeezed = out["large"]["width_ratio"] < 1.0
    change = {k: abs(np.log(v["width_ratio"])) for k, v in out.items()}
    medium_least = change["medium"] == min(change.values())
    ent = {k: v["entropy"] for k, v in out.items()}
    c_ok = ent["medium"] == min(ent.values())
    details = dict(t_star=t_star, g0_eff=g0, ground_state_width=wgs, packets=out,
                   a_velocity_decreasing=a_ok, b_small_spreads_faster=small_faster,
                   b_large_squeezed=large_squeezed, b_medium_least_change=medium_least,
                   c_medium_lowest_entropy=c_ok)
    return a_ok and small_faster and large_squeezed and medium_least and c_ok, details


# ---------------------------------------------------------------- tdhf

def _anharmonic_model(mu12=0.8, variant="exact"):
    return TdhfModel(PotentialSpec(1.0, 6.0), PotentialSpec.harmonic(1.2), CouplingSpec(mu12), variant)


def _c6_tdhf_conservation(rng):
    drifts = []
    for k in range(6):
        s0 = TdhfState(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.3, 0.8),
                       rng.uniform(-0.2, 0.2), rng.uniform(0.3, 0.8), rng.uniform(-0.2, 0.2))
        tr = evolve(s0, _anharmonic_model(mu12=0.2 * k), 20.0, 2001)
        drifts.append(tr.energy_drift)
    dec = evolve(TdhfState(0.7, 0.1, 0.5, 0.1, 0.4, 0.0), _anharmonic_model(0.0), 20.0, 2001)
    decoupled_max = float(np.max(np.abs(dec.entropy)))
    drifts.append(dec.energy_drift)
    omega1, omega2 = 2.0, 1.0
    fixed = TdhfState(0.0, 0.0, 0.5 / omega1, 0.0, 0.5 / omega2, 0.0)
    fm = TdhfModel(PotentialSpec.harmonic(omega1), PotentialSpec.harmonic(omega2))
    ft = evolve(fixed, fm, 20.0, 201)
    static_dev = float(np.max(np.abs(ft.states - fixed.to_array())))
    ok = max(drifts) < 1e-6 and decoupled_max == 0.0 and static_dev < 1e-10
    return ok, dict(max_energy_drift=max(drifts), decoupled_max_entropy=decoupled_max,
                    fixed_point_deviation=static_dev)


def _c7_short_time(rng):
    m = _anharmonic_model(0.8)
    s = TdhfState(0.5, 0.3, 0.6, 0.15, 0.4, -0.05)
    devs = []
    for window in (0.2, 0.1, 0.05):
        tr = evolve(s, m, window, 401)
        g, sg = short_time_correlations(s, m.coupling, tr.t)
        devs.append(max(np.max(np.abs(tr.column("g12") - g)),
                        np.max(np.abs(tr.column("s12") - sg))))
    ratios = [devs[0] / devs[1], devs[1] / devs[2]]
    order_ok = all(abs(r / 8.0 - 1.0) <= 0.25 for r in ratios)
    s0 = TdhfState(0.5, 0.3, 0.6, 0.0, 0.4, 0.0)
    tr = evolve(s0, m, 0.01, 201)
    a = 1 / s0.g1 + 1 / s0.g2
    mu = m.coupling.mu12_sq
    c_s = np.polyfit(tr.t, tr.column("s12"), 3)[-2] / (2 * mu)
    c_g = np.polyfit(tr.t, tr.column("g12"), 4)[-3] / (-0.5 * mu * a)
    coef_ok = abs(c_s - 1) < 0.02 and abs(c_g - 1) < 0.02
    return order_ok and coef_ok, dict(deviations=devs, halving_ratios=ratios,
                                      s12_linear_coeff_ratio=c_s, g12_quadratic_coeff_ratio=c_g)


def _c8_decoherence_times(rng):
    m = _anharmonic_model(1.0)
    s1 = TdhfState(0.5, 0.3, 0.6, 0.0, 0.4, 0.0, 0.0, 0.01)
    tau_a = decoherence_time_analytic(s1, m.coupling)
    tr = evolve(s1, m, 0.05 * tau_a, 201)
    tau_n = decoherence_time_numeric(tr)
    rel = abs(tau_n / tau_a - 1)
    s0 = TdhfState(0.5, 0.3, 0.6, 0.0, 0.4, 0.0)
    tr0 = evolve(s0, m, 0.01, 201)
    t, tau = local_decoherence_times(tr0)
    ratio = tau[2:20] / t[2:20]
    local_ok = bool(np.all(np.abs(ratio / 0.5 - 1) < 0.10))
    return rel < 0.05 and local_ok, dict(tau_analytic=tau_a, tau_numeric=tau_n,
                                         relative_error=rel,
                                         local_ratio_range=[float(ratio.min()), float(ratio.max())])


def _c9_formal_residual(rng):
    m = _anharmonic_model(0.8)
    s = TdhfState(0.5, 0.3, 0.6, 0.15, 0.4, -0.05)
    res = {}
    for n in (1001, 2001):
        tr = evolve(s, m, 3.0, n)
        res[n] = formal_solution_residual(tr) / float(np.max(np.abs(tr.column("g12"))))
    ok = res[2001] < 1e-4 and res[2001] < res[1001]
    return ok, dict(relative_residual_1001=res[1001], relative_residual_2001=res[2001],
                    refinement_ratio=res[1001] / res[2001])


# ---------------------------------------------------------------- chaos

SWEEP_ENERGIES = (-24.0, -23.0, -20.0, -16.0, -12.0, -10.0, -8.0, -7.0, -6.0, -5.0,
                  -3.68601, -2.0, 0.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0)


def _pattern(labels):
    """True if some chaotic label has a regular label on both sides."""
    for j, lab in enumerate(labels):
        if lab == "chaotic" and "regular" in labels[:j] and "regular" in labels[j + 1:]:
            return True
    return False


def _c10_chaos(rng):
    pot = calibrate_double_well(24.0, -24.3, 1.0)
    rows = energy_sweep(SWEEP_ENERGIES, SweepConfig(pot, hbar=1.0))
    labels = [r.label for r in rows]
    decided = [r for r in rows if r.label in ("regular", "chaotic")]
    agree = sum(r.label == r.lyapunov_label for r in decided) / max(len(decided), 1)
    low_line_like = all(r.label == "regular" for r in rows[:2])
    high_regular = all(r.label == "regular" for r in rows[-2:])
    resonance = rows[SWEEP_ENERGIES.index(-3.68601)].label
    classical = energy_sweep(SWEEP_ENERGIES, SweepConfig(pot, hbar=0.0))
    classical_chaotic = sum(r.label == "chaotic" or r.lyapunov_label == "chaotic" for r in classical)
    failures = [r.error for r in rows + classical if r.error]
    reg = poincare_section(on_shell_state(pot, -23.0), pot, 1.0, 2000).points
    cha = poincare_section(on_shell_state(pot, -6.0), pot, 1.0, 2000).points
    both = np.vstack([reg, cha])
    bounds = ((both[:, 0].min(), both[:, 0].max()), (both[:, 1].min(), both[:, 1].max()))
    occ_reg, occ_cha = occupancy(reg, 50, bounds), occupancy(cha, 50, bounds)
    ok = (_pattern(labels) and low_line_like and high_regular and agree >= 0.9
          and classical_chaotic == 0 and not failures and occ_cha > 10 * occ_reg)
    return ok, dict(mu_sq=pot.mu_sq, lam=pot.lam, labels=dict(zip(SWEEP_ENERGIES, labels)),
                    lyapunov=[r.lyapunov for r in rows], agreement=agree,
                    resonance_label=resonance, classical_chaotic_rows=classical_chaotic,
                    section_occupancy=(occ_reg, occ_cha), failures=failures)


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    suite: str
    check: Callable
    budget: float


CRITERIA = (
    Criterion(1, "entropy kernels", "kernels", _c1_entropy_kernels, 1.0),
    Criterion(2, "unitary invariance", "kernels", _c2_unitary_invariance, 5.0),
    Criterion(3, "Schmidt equality", "kernels", _c3_schmidt, 30.0),
    Criterion(4, "Brownian exactness", "brownian", _c4_brownian_exactness, 30.0),
    Criterion(5, "Brownian regime properties", "brownian", _c5_brownian_regimes, 120.0),
    Criterion(6, "TDHF conservation and decoupling", "tdhf", _c6_tdhf_conservation, 10.0),
    Criterion(7, "short-time expansion", "tdhf", _c7_short_time, 10.0),
    Criterion(8, "decoherence times", "tdhf", _c8_decoherence_times, 10.0),
    Criterion(9, "formal-solution residual", "tdhf", _c9_formal_residual, 10.0),
    Criterion(10, "chaos phenomenology", "chaos", _c10_chaos, 300.0),
    Criterion(11, "Gaussian purity oracle", "kernels", _c11_gaussian_purity, 30.0),
    Criterion(12, "degree-of-freedom entropy ratio", "kernels", _c12_dof_ratio, 1.0),
)

SUITES = ("kernels", "brownian", "tdhf", "chaos", "all")


def run_criterion(number: int, seed: int = 20240611) -> CriterionResult:
    """Run one criterion with a fresh generator derived from ``seed``."""
    crit = next(c for c in CRITERIA if c.number == number)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(number)[-1])
    t0 = time.perf_counter()
    try:
        passed, details = crit.check(rng)
    except Exception as exc:  # a crash is a failure of that criterion
        passed, details = False, {"exception": f"{type(exc).__name__}: {exc}"}
    elapsed = time.perf_counter() - t0
    details["within_time_budget"] = elapsed <= crit.budget
    return CriterionResult(crit.number, crit.name, bool(passed), details, elapsed, crit.budget)


def run_suite(suite: str = "all", seed: int = 20240611, echo: Callable = None) -> list[CriterionResult]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    out = []
    for crit in CRITERIA:
        if suite in ("all", crit.suite):
            res = run_criterion(crit.number, seed)
            if echo is not None:
                echo(res.line)
            out.append(res)
    return out
