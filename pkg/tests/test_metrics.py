import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gate_energy.fock import Hamiltonian, harmonic_hamiltonian
from gate_energy.metrics import (FidelityBracket, InfeasibleConstraint, ProbeState,
                                 constrained_min, ec_channel_fidelity, ec_unitary_fidelity,
                                 fuchs_bounds, probe_fidelity, state_fidelity, trace_distance)

X = np.array([[0, 1], [1, 0]], dtype=complex)


def random_state(d, rng, rank=None):
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    r = g @ g.conj().T
    return r / np.trace(r)


def random_unitary(d, rng):
    q, r = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rho1(n):
    p = np.zeros(n + 1)
    p[0], p[n] = 1 - 1 / n, 1 / n
    return np.diag(p).astype(complex)


def ket0(d):
    r = np.zeros((d, d), dtype=complex)
    r[0, 0] = 1
    return r


def test_state_fidelity_examples():
    rng = np.random.default_rng(1)
    r = random_state(4, rng)
    assert state_fidelity(r, r) == pytest.approx(1.0, abs=1e-10)
    assert state_fidelity(ket0(2), np.diag([0, 1])) == pytest.approx(0.0, abs=1e-12)
    assert state_fidelity(ket0(5), rho1(4)) == pytest.approx(0.75, abs=1e-12)


def test_state_fidelity_symmetric():
    rng = np.random.default_rng(2)
    a, b = random_state(5, rng), random_state(5, rng, 2)
    assert state_fidelity(a, b) == pytest.approx(state_fidelity(b, a), abs=1e-10)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        state_fidelity(ket0(2), ket0(3))
    with pytest.raises(ValueError):
        trace_distance(ket0(2), ket0(3))


def test_trace_distance_examples():
    assert trace_distance(ket0(3), ket0(3)) == 0
    for n in (2, 5, 10):
        assert trace_distance(ket0(n + 1), rho1(n)) == pytest.approx(1 / n, abs=1e-12)
    assert trace_distance(ket0(2), np.diag([0, 1])) == pytest.approx(1.0)


def test_fuchs_bounds_examples():
    assert fuchs_bounds(1.0) == (0.0, 0.0)
    assert fuchs_bounds(0.0) == (1.0, 1.0)
    lo, hi = fuchs_bounds(0.75)
    assert lo == pytest.approx(1 - math.sqrt(0.75))
    assert hi == pytest.approx(0.5)
    with pytest.raises(ValueError):
        fuchs_bounds(1.1)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2 ** 31))
def test_fuchs_sandwich_property(d, seed):
    rng = np.random.default_rng(seed)
    a = random_state(d, rng, rng.integers(1, d + 1))
    b = random_state(d, rng, rng.integers(1, d + 1))
    lo, hi = fuchs_bounds(state_fidelity(a, b))
    t = trace_distance(a, b)
    assert lo - 1e-12 <= t <= hi + 1e-12


# --- probes --------------------------------------------------------------------

def test_probe_state_energy_and_marginal():
    H = Hamiltonian(np.array([0.0, 1.0]))
    psi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    p = ProbeState.from_pure(psi, H, ref_dim=2)
    assert p.system_energy == pytest.approx(0.5)
    assert np.allclose(p.system_marginal(), np.eye(2) / 2)


def test_probe_fidelity_examples():
    H = Hamiltonian(np.array([0.0, 1.0]))
    rng = np.random.default_rng(3)
    U, V = random_unitary(2, rng), random_unitary(2, rng)
    psi = np.array([0.6, 0.8j])
    p = ProbeState.from_pure(psi, H, ref_dim=1)
    assert probe_fidelity(U, U, p) == pytest.approx(1.0, abs=1e-10)
    ref = abs(psi.conj() @ U.conj().T @ V @ psi) ** 2
    assert probe_fidelity(U, V, p) == pytest.approx(ref, abs=1e-9)
    assert probe_fidelity(V, U, p) == pytest.approx(ref, abs=1e-9)
    p0 = ProbeState.from_pure(np.array([1, 0]), H, ref_dim=1)
    assert probe_fidelity(X, np.eye(2), p0) == pytest.approx(0.0, abs=1e-12)


# --- constrained minimization -------------------------------------------------

def test_constrained_min_matches_unconstrained_when_loose():
    rng = np.random.default_rng(4)
    A = random_state(4, rng) - np.eye(4) / 4
    H = harmonic_hamiltonian(4)
    res = constrained_min(A, H, 10.0)
    assert res.value == pytest.approx(np.linalg.eigvalsh(A)[0], abs=1e-9)
    assert res.lower <= res.value + 1e-12


def test_constrained_min_respects_budget():
    rng = np.random.default_rng(5)
    A = random_state(5, rng)
    A = -(A + A.conj().T)
    H = harmonic_hamiltonian(5)
    res = constrained_min(A, H, 1.0)
    assert np.real(np.trace(res.rho @ np.diag(H.energies))) <= 1.0 + 1e-9
    assert res.lower <= res.value + 1e-12
    assert res.value - res.lower < 1e-7


def test_constrained_min_infeasible():
    with pytest.raises(InfeasibleConstraint):
        constrained_min(np.eye(2), harmonic_hamiltonian(2), 0.1)


# --- energy-constrained fidelity -----------------------------------------------

def test_bracket_invariants():
    b = FidelityBracket(0.2, 0.5)
    assert b.width == pytest.approx(0.3)
    with pytest.raises(ValueError):
        FidelityBracket(0.6, 0.2)


def test_ec_unitary_identical():
    rng = np.random.default_rng(6)
    U = random_unitary(3, rng)
    b = ec_unitary_fidelity(U, U, harmonic_hamiltonian(3), 1.0)
    assert b.lower == b.upper == 1.0


def test_ec_unitary_infeasible_budget():
    with pytest.raises(InfeasibleConstraint):
        ec_unitary_fidelity(X, np.eye(2), harmonic_hamiltonian(2), 0.2)


def _exhaustive(W, H, E, n=10000, seed=0):
    # pure probes with energy <= E plus mixtures of pairs of them
    rng = np.random.default_rng(seed)
    d = W.shape[0]
    g = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    # bias toward low energy so the constraint set is well sampled
    g *= np.exp(-rng.uniform(0, 3) * np.arange(d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    e = np.einsum("ni,i,ni->n", g.conj(), H.energies, g).real
    g = g[e <= E]
    vals = np.einsum("ni,ij,nj->n", g.conj(), W, g)
    return float(np.min(np.abs(vals) ** 2)), vals, e[e <= E]


def test_ec_unitary_unconstrained_matches_eigen_mixtures():
    rng = np.random.default_rng(7)
    H = harmonic_hamiltonian(3)
    U, V = random_unitary(3, rng), random_unitary(3, rng)
    W = U.conj().T @ V
    b = ec_unitary_fidelity(U, V, H, H.norm + 1)
    # W normal: reachable set is the hull of its eigenvalues
    lam = np.linalg.eigvals(W)
    from gate_energy.metrics import _min_norm_hull
    dist, _ = _min_norm_hull(lam)
    assert b.lower == pytest.approx(dist ** 2, abs=1e-6)
    assert b.upper == pytest.approx(dist ** 2, abs=1e-6)


@pytest.mark.parametrize("seed", range(6))
def test_ec_unitary_bracket_contains_exhaustive(seed):
    rng = np.random.default_rng(100 + seed)
    d = int(rng.integers(2, 5))
    H = harmonic_hamiltonian(d)
    U, V = random_unitary(d, rng), random_unitary(d, rng)
    E = float(rng.uniform(0.6, d))
    b = ec_unitary_fidelity(U, V, H, E)
    best, _, _ = _exhaustive(U.conj().T @ V, H, E, seed=seed)
    assert b.lower <= best + 1e-9
    assert b.upper <= best + 1e-6 or b.width < 1e-6


def test_ec_unitary_monotone_in_budget():
    rng = np.random.default_rng(8)
    H = harmonic_hamiltonian(4)
    U, V = random_unitary(4, rng), random_unitary(4, rng)
    lowers = [ec_unitary_fidelity(U, V, H, E).lower for E in (3.5, 2.5, 1.5, 0.8, 0.5)]
    assert all(b >= a - 1e-9 for a, b in zip(lowers, lowers[1:]))


def test_ec_channel_reduces_to_unitary_case():
    rng = np.random.default_rng(9)
    H = harmonic_hamiltonian(3)
    U, V = random_unitary(3, rng), random_unitary(3, rng)
    for E in (0.8, 1.5, 3.0):
        a = ec_unitary_fidelity(U, V, H, E)
        b = ec_channel_fidelity([V], U, H, E)
        assert abs(a.lower - b.lower) < 1e-5 or abs(a.upper - b.upper) < 1e-5
        assert b.lower <= a.upper + 1e-8 and a.lower <= b.upper + 1e-8


def test_ec_channel_dephasing():
    # X followed by full dephasing: probe |+> gives fidelity 1/2, |0> gives 1
    H = Hamiltonian(np.array([0.0, 1.0]))
    kraus = [np.diag([1, 0]) @ X, np.diag([0, 1]) @ X]
    b = ec_channel_fidelity(kraus, X, H, 1.0)
    assert b.lower == pytest.approx(0.5, abs=1e-8)
    b0 = ec_channel_fidelity(kraus, X, H, 0.0)
    assert b0.lower == pytest.approx(1.0, abs=1e-8)
