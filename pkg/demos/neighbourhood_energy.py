"""
Lowest energy near a state
==========================

States that are close in trace distance can have very different energies.
Here rho1 puts weight 1/n on level n and the rest on the ground state: it has
one unit of energy, yet the ground state is only 1/n away.
"""
import numpy as np

from gate_energy.emin import (corollary3_bound, emin_exact_diagonal,
                              emin_primal_small)
from gate_energy.fock import harmonic_hamiltonian

for n in (2, 5, 10, 100):
    H = harmonic_hamiltonian(n + 1, vacuum_offset=0)
    p = np.zeros(n + 1)
    p[0], p[n] = 1 - 1 / n, 1 / n
    exact = emin_exact_diagonal(p, H, 1 / n).value
    best = max(corollary3_bound(p, H, 1 / n, e) for e in np.linspace(0.1, 2 * n, 200))
    print(f"n={n:3d}: min energy within 1/n = {exact:.3g}, best threshold bound = {best:.3g}")

# a dense random state: primal solver and its dual certificate
rng = np.random.default_rng(0)
g = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
rho = g @ g.conj().T
rho /= np.trace(rho)
H = harmonic_hamiltonian(6)
res = emin_primal_small(rho, H, 0.1)
print(f"\ndense state: E_min in [{res.lower:.8f}, {res.upper:.8f}] after {res.iterations} iterations")
for eb in (1.0, 2.5, 4.0, 6.0):
    print(f"  threshold {eb:3.1f}: lower bound {corollary3_bound(rho, H, 0.1, eb):8.4f}")
