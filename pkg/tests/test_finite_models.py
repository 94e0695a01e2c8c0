import math

import numpy as np
import pytest

from gate_energy.finite_models import (BoundViolation, ResourceCapExceeded, RecyclingRun,
                                       bound_consistency_check, build_shift_model, default_probes,
                                       fidelity_scaling, implementation_fidelity, recycling_network,
                                       recycling_run)


def test_model_invariants():
    m = build_shift_model("qubit_X", 50, 32)
    assert m.commutation_residual() <= 1e-10
    V = m.V
    assert np.max(np.abs(V.conj().T @ V - np.eye(V.shape[0]))) < 1e-12
    assert np.allclose(V @ V, np.eye(V.shape[0]))
    assert m.battery_energy() == pytest.approx(50 + 31 / 2)
    assert np.all(m.H_B.energies >= 0)


def test_model_validation():
    with pytest.raises(ValueError):
        build_shift_model("qubit_X", 0, 4)
    with pytest.raises(ValueError):
        build_shift_model("qubit_X", 5, 4, battery_dim=9)
    with pytest.raises(ValueError):
        build_shift_model("hadamard", 5, 4)


def test_kraus_is_trace_preserving():
    m = build_shift_model("qubit_X", 3, 5)
    s = sum(k.conj().T @ k for k in m.kraus())
    assert np.allclose(s, np.eye(2))


def test_identity_model_is_perfect():
    m = build_shift_model("identity", 4, 4)
    b = implementation_fidelity(m, 1.0)
    assert b.lower == pytest.approx(1.0, abs=1e-12)


def test_single_level_battery_is_worse():
    b1 = implementation_fidelity(build_shift_model("qubit_X", 20, 1), 1.0)
    b16 = implementation_fidelity(build_shift_model("qubit_X", 20, 16), 1.0)
    assert b1.upper < 1
    assert b1.upper < b16.lower


def test_fidelity_scaling_with_window():
    res = fidelity_scaling(10, [4, 8, 16, 32, 64])
    for L, infid in res["infidelity"].items():
        assert infid <= res["c"] / L + 1e-12
    assert res["c"] == pytest.approx(1.0, abs=1e-6)


def test_fidelity_unconstrained_matches_closed_form():
    # coherences are damped by (L - 2)/L, so the worst probe |+> gives 1 - 1/L
    for L in (3, 8):
        b = implementation_fidelity(build_shift_model("qubit_X", 10, L), 1.0)
        assert b.lower == pytest.approx(1 - 1 / L, abs=1e-8)


def test_fidelity_energy_zero_is_exact():
    b = implementation_fidelity(build_shift_model("qubit_X", 10, 1), 0.0)
    assert b.lower == pytest.approx(1.0, abs=1e-10)


def test_probes_respect_energy():
    for E in (0.0, 0.3, 1.0):
        for q in default_probes(E):
            assert abs(q[1]) ** 2 <= E + 1e-12
            assert np.linalg.norm(q) == pytest.approx(1.0)


def test_recycling_m1_matches_channel():
    m = build_shift_model("qubit_X", 20, 8)
    net = recycling_network(m, 1)
    q = np.array([1, 1]) / math.sqrt(2)
    rho, _ = net.run(np.kron(q, q))
    # two independent uses of the induced channel do not share a battery,
    # but the pair output must still be a valid state close to the ideal
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-12
    run = recycling_run(m, 1, 1.0)
    assert 0 < run.measured_error < 1


def test_recycling_linear_growth_and_energy():
    m = build_shift_model("qubit_X", 20, 8)
    e1 = recycling_run(m, 1, 1.0)
    for k in (2, 3, 4):
        r = recycling_run(m, k, 1.0)
        assert r.measured_error <= k * e1.measured_error + 1e-9
        assert r.energy_excess <= 1e-9


def test_recycling_identity_has_no_error():
    r = recycling_run(build_shift_model("identity", 5, 4), 2, 1.0)
    assert r.measured_error == pytest.approx(0.0, abs=1e-12)


def test_recycling_resource_cap():
    with pytest.raises(ResourceCapExceeded):
        recycling_network(build_shift_model("qubit_X", 5, 4), 12)


def test_recycling_run_validation():
    with pytest.raises(ValueError):
        RecyclingRun(1, 1.5, 0.0, 1.0)


def test_bound_consistency_examples():
    m = build_shift_model("qubit_X", 50, 32)
    b = implementation_fidelity(m, 1.0)
    rep = bound_consistency_check(m, 1.0, 1 - b.lower)
    assert rep.consistent and rep.slack > 0
    m1 = build_shift_model("qubit_X", 5, 1)
    b1 = implementation_fidelity(m1, 1.0)
    rep1 = bound_consistency_check(m1, 1.0, 1 - b1.lower)
    assert rep1.eps_measured == pytest.approx(0.5)
    assert rep1.bound < rep.bound
    mi = build_shift_model("identity", 5, 4)
    repi = bound_consistency_check(mi, 1.0, 0.0)
    assert repi.delta_E == 0 and repi.bound <= 0


def test_bound_violation_raises():
    # a tiny claimed error forces the bound above the battery energy
    m = build_shift_model("qubit_X", 1, 1)
    with pytest.raises(BoundViolation):
        bound_consistency_check(m, 1.0, 1e-8)
