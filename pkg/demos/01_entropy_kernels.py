"""Entropy of density matrices, and why an isolated system never gains any.

Run with ``python demos/01_entropy_kernels.py``.
"""

import numpy as np

from decohere.densmat import (entropy_equality_check, random_density_matrix, random_hermitian,
                              random_pure_bipartite, unitary_evolve)
from decohere.entropy import (dof_entropy_ratio, thermal_entropy_via_free_energy, thermal_state,
                              von_neumann_entropy)

rng = np.random.default_rng(0)

# %% A pure state carries no entropy and the uniform mixture of N levels carries ln N.
print("pure:", von_neumann_entropy(np.diag([1.0, 0.0])))
print("uniform N=6:", von_neumann_entropy(np.eye(6) / 6), "ln 6 =", np.log(6))

# %% Thermal states: the entropy from -Tr rho ln rho equals the temperature
# derivative of T ln Z.
levels = np.sort(rng.uniform(0, 5, 8))
for temp in (0.1, 1.0, 10.0):
    s_direct = von_neumann_entropy(thermal_state(levels, temp))
    s_free = thermal_entropy_via_free_energy(levels, temp)
    print(f"T={temp:5.1f}  direct={s_direct:.9f}  via free energy={s_free:.9f}")

# %% Unitary evolution leaves the entropy unchanged.
rho = random_density_matrix(5, rng)
h = random_hermitian(5, rng)
for t in (0.0, 1.0, 10.0):
    print(f"t={t:4.1f}  S={von_neumann_entropy(unitary_evolve(rho, h, t)):.12f}")

# %% Entropy appears only after tracing out a partner. For a global pure
# state both halves then carry the same entropy.
psi = random_pure_bipartite(3, 7, rng)
s_a, s_b, gap = entropy_equality_check(psi)
print(f"S_A={s_a:.12f}  S_B={s_b:.12f}  gap={gap:.1e}")

# %% If every degree of freedom shares an entropy budget, a subsystem with
# 2 of 37 degrees of freedom holds about 5% of it.
print("share of 2 out of 37:", dof_entropy_ratio(2, 37))
