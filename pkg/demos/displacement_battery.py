"""
Battery energy needed for a displacement gate
=============================================

A displacement D(z) on an oscillator changes the energy of its input by an
amount that depends on the input. Any energy-conserving implementation has
to borrow that energy from a battery, and the closer the implementation is
to the ideal gate, the larger the battery has to be.
"""
import math

import numpy as np

from gate_energy.gates import (DisplacementCase, displacement_bound,
                               displacement_bound_asymptotic, nu_ratio)

# probe with input energy E = 4 (hbar*omega = 1), displacement z = 1
case = DisplacementCase(z=1, E=4.0, eps=1e-6)
print("output/input energy ratio nu =", round(nu_ratio(case.E, case.z), 6))

report = displacement_bound(case)
print("optimal threshold      :", report.ebar_used)
print("battery energy at least:", round(report.bound, 3))
for name, value in report.components:
    print(f"  {name:18s} {value:12.4f}")

# the bound scales as 1/sqrt(eps)
print("\n    eps        bound   bound*sqrt(eps)")
for eps in np.geomspace(1e-8, 1e-4, 5):
    b = displacement_bound(DisplacementCase(1, 4.0, eps)).bound
    print(f"{eps:9.1e} {b:12.3f} {b * math.sqrt(eps):10.4f}")

# and grows, sub-linearly, with the input energy budget
print("\n E      bound    bound/E")
for E in range(1, 11):
    b = displacement_bound(DisplacementCase(1, float(E), 1e-6)).bound
    print(f"{E:2d} {b:10.2f} {b / E:9.2f}")

# the closed form with threshold E ln(1/eps) is weaker but simple
asym = displacement_bound_asymptotic(DisplacementCase(1, 4.0, 1e-10))
print("\nclosed form at eps=1e-10:", round(asym.bound, 2), " valid below eps0 =", asym.extras["eps0"])
