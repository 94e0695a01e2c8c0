"""
An explicit battery for the X gate
==================================

The qubit X gate is realized by swapping one quantum between the qubit and a
ladder battery. The battery starts in a uniform window of L levels; a wider
window makes the implemented channel closer to X.
"""
from gate_energy.finite_models import (bound_consistency_check, build_shift_model,
                                       fidelity_scaling, implementation_fidelity,
                                       recycling_run)

scan = fidelity_scaling(n0=10, Ls=[2, 4, 8, 16, 32, 64])
for L, infid in scan["infidelity"].items():
    print(f"L={L:3d}: 1 - F = {infid:.5f}")
print("fitted c in 1 - F <= c/L:", round(scan["c"], 6))

model = build_shift_model("qubit_X", n0=50, L=32)
eps = 1 - implementation_fidelity(model, 1.0).lower
rep = bound_consistency_check(model, 1.0, eps)
print(f"\nbattery energy {rep.battery_energy:.2f} vs lower bound {rep.bound:.4f} (slack {rep.slack:.2f})")

# reuse one battery for m gate pairs; the error grows at most linearly
model = build_shift_model("qubit_X", n0=20, L=8)
for m in range(1, 5):
    r = recycling_run(model, m, 1.0)
    print(f"m={m}: error {r.measured_error:.4f}")
