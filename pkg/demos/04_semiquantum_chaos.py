"""Chaos in a double well once quantum fluctuations are dynamical.

The mean field and its width form a 4-D flow that can be chaotic. With the
width frozen (hbar = 0) the flow is 2-D and always regular.
Run with ``python demos/04_semiquantum_chaos.py`` (about 20 seconds).
"""

import numpy as np

from decohere.chaos import SweepConfig, energy_sweep, occupancy, on_shell_state, poincare_section
from decohere.tdhf import calibrate_double_well, static_minimum

# %% Calibrate the well so the lowest static energy is -24.3.
pot = calibrate_double_well(lam=24.0, e_min=-24.3)
e_min, phi, g = static_minimum(pot)
print(f"mu^2 = {pot.mu_sq:.10f}, lambda = {pot.lam}, E_min = {e_min:.10f} at phi = {phi:.4f}")

# %% Energy sweep: spectral entropy of the density diagonal at x = 0 and the
# largest Lyapunov exponent, side by side.
energies = [-23.0, -16.0, -8.0, -6.0, -3.68601, 0.0, 5.0, 100.0]
for hbar in (1.0, 0.0):
    print(f"\nhbar = {hbar}")
    for r in energy_sweep(energies, SweepConfig(pot, hbar=hbar)):
        print(f"  E={r.energy:9.4f}  H/ln(n)={r.normalized_entropy:.3f}  "
              f"lyapunov={r.lyapunov:+.4f}  {r.label:13s} ({r.lyapunov_label})")

# %% Poincare sections at Sigma = 0: a curve at low energy, a filled region
# in the chaotic band.
reg = poincare_section(on_shell_state(pot, -23.0), pot, 1.0, 800).points
cha = poincare_section(on_shell_state(pot, -6.0), pot, 1.0, 800).points
both = np.vstack([reg, cha])
box = ((both[:, 0].min(), both[:, 0].max()), (both[:, 1].min(), both[:, 1].max()))
print("\noccupied cells of a 50x50 grid:", occupancy(reg, 50, box), "vs", occupancy(cha, 50, box))
