"""An explicit energy-conserving qubit gate with a ladder battery.

The system is a qubit with ``H_S = diag(0, 1)`` and the battery a ladder
``H_B = diag(0, 1, ..., D-1)``. The X gate is realized by the permutation

    V|0, n> = |1, n-1>,  V|1, n> = |0, n+1>

which moves one quantum between system and battery, with the two boundary
states ``|0, 0>`` and ``|1, D-1>`` left fixed. ``V`` is an involution, so the
same matrix also implements the inverse gate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bounds import ConstraintFn, corollary6_bound, delta_E_bounded, epsilon_prime
from .fock import Hamiltonian, StateVector
from .metrics import FidelityBracket, ec_channel_fidelity

COMMUTATION_TOL = 1e-10
MAX_STATE_SIZE = 1 << 22
GATES = ("qubit_X", "identity")

_X = np.array([[0, 1], [1, 0]], dtype=complex)


class ResourceCapExceeded(ValueError):
    pass


class BoundViolation(AssertionError):
    pass


@dataclass(frozen=True)
class ShiftModel:
    gate: str
    n0: int
    L: int
    V: np.ndarray = field(repr=False)
    beta: StateVector = field(repr=False)
    H_S: Hamiltonian = field(repr=False)
    H_B: Hamiltonian = field(repr=False)

    @property
    def system_dim(self) -> int:
        return self.H_S.dim

    @property
    def battery_dim(self) -> int:
        return self.H_B.dim

    @property
    def target(self) -> np.ndarray:
        return _X if self.gate == "qubit_X" else np.eye(2, dtype=complex)

    def total_hamiltonian(self) -> np.ndarray:
        """``H_S (x) I + I (x) H_B`` as a diagonal matrix (system index first)."""
        e = np.add.outer(self.H_S.energies, self.H_B.energies).reshape(-1)
        return np.diag(e)

    def commutation_residual(self) -> float:
        h = self.total_hamiltonian()
        return float(np.linalg.norm(self.V @ h - h @ self.V, 2))

    def battery_energy(self) -> float:
        p = np.abs(self.beta.amplitudes) ** 2
        return float(np.dot(p, self.H_B.energies))

    def kraus(self) -> list[np.ndarray]:
        """Kraus operators of ``rho -> tr_B V (rho (x) beta) V^dag``."""
        d, D = self.system_dim, self.battery_dim
        t = self.V.reshape(d, D, d, D)
        k = np.einsum("ajbn,n->jab", t, np.asarray(self.beta.amplitudes))
        return [k[j] for j in range(D) if np.any(k[j])]


def _shift_unitary(D: int) -> np.ndarray:
    V = np.zeros((2 * D, 2 * D))

    def idx(s, n):
        return s * D + n

    for n in range(D):
        if n >= 1:
            V[idx(1, n - 1), idx(0, n)] = 1
        else:
            V[idx(0, 0), idx(0, 0)] = 1
        if n <= D - 2:
            V[idx(0, n + 1), idx(1, n)] = 1
        else:
            V[idx(1, D - 1), idx(1, D - 1)] = 1
    return V.astype(complex)


def build_shift_model(gate: str = "qubit_X", n0: int = 50, L: int = 32,
                      battery_dim: Optional[int] = None, margin: int = 8) -> ShiftModel:
    """Shift model with a uniform battery window over levels ``[n0, n0 + L)``.

    ``battery_dim`` defaults to ``n0 + L + 2 + margin``; the margin keeps
    recycled runs away from the top boundary.
    """
    if gate not in GATES:
        raise ValueError(f"unknown gate {gate!r}")
    if n0 < 1 or L < 1:
        raise ValueError("need n0 >= 1 and L >= 1")
    D = n0 + L + 2 + margin if battery_dim is None else int(battery_dim)
    if D < n0 + L + 2:
        raise ValueError(f"battery_dim {D} too small for window [{n0}, {n0 + L})")
    amps = np.zeros(D, dtype=complex)
    amps[n0:n0 + L] = 1 / math.sqrt(L)
    V = _shift_unitary(D) if gate == "qubit_X" else np.eye(2 * D, dtype=complex)
    model = ShiftModel(gate, n0, L, V, StateVector(amps),
                       Hamiltonian(np.array([0.0, 1.0])), Hamiltonian(np.arange(D, dtype=float)))
    res = model.commutation_residual()
    if res > COMMUTATION_TOL:
        raise AssertionError(f"V does not conserve energy (residual {res:.3e})")
    return model


def implementation_fidelity(model: ShiftModel, E: float, **kw) -> FidelityBracket:
    """Energy-constrained fidelity of the induced channel to the target gate.

    Probes may be entangled with a reference; the estimator works with the
    probe's system marginal, which covers every such probe.
    """
    return ec_channel_fidelity(model.kraus(), model.target, model.H_S, E, **kw)


def fidelity_scaling(n0: int, Ls: Sequence[int], E: float = 1.0) -> dict:
    """Measured ``c = max_L L (1 - F_lower)`` over window lengths ``Ls``."""
    infid = {}
    for L in Ls:
        br = implementation_fidelity(build_shift_model("qubit_X", n0, L), E)
        infid[int(L)] = 1.0 - br.lower
    return {"infidelity": infid, "c": max(L * v for L, v in infid.items())}


# ---------------------------------------------------------------------------
# Recycling network
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecyclingRun:
    m: int
    measured_error: float
    predicted_cap: float
    battery_energy: float
    energy_excess: float = 0.0
    probe_errors: tuple = ()

    def __post_init__(self):
        if not -1e-12 <= self.measured_error <= 1 + 1e-12:
            raise ValueError("measured_error must lie in [0, 1]")


class RecyclingNetwork:
    """``V`` on odd systems and ``V^-1`` on even ones, sharing one battery.

    Acts on ``2m`` qubits plus the battery; the battery is traced out last.
    """

    def __init__(self, model: ShiftModel, m: int):
        if m < 1:
            raise ValueError("m must be >= 1")
        size = model.system_dim ** (2 * m) * model.battery_dim
        if size > MAX_STATE_SIZE:
            raise ResourceCapExceeded(f"state size {size} exceeds cap {MAX_STATE_SIZE}")
        self.model, self.m = model, m
        d, D = model.system_dim, model.battery_dim
        self._fwd = model.V.reshape(d, D, d, D)
        self._inv = model.V.conj().T.reshape(d, D, d, D)

    @property
    def n_systems(self) -> int:
        return 2 * self.m

    def ideal(self) -> np.ndarray:
        u = self.model.target
        pair = np.kron(u, u.conj().T)
        out = np.eye(1, dtype=complex)
        for _ in range(self.m):
            out = np.kron(out, pair)
        return out

    def run(self, psi_sys: np.ndarray) -> tuple[np.ndarray, float]:
        """Output system density matrix and final battery energy for a pure input."""
        d, D, k = self.model.system_dim, self.model.battery_dim, self.n_systems
        psi = np.asarray(psi_sys, dtype=complex).reshape(-1)
        state = np.kron(psi, np.asarray(self.model.beta.amplitudes)).reshape((d,) * k + (D,))
        for i in range(k):
            gate = self._fwd if i % 2 == 0 else self._inv
            # contract gate[a, j, b, n] with system axis i and the battery axis
            state = np.tensordot(gate, state, axes=([2, 3], [i, k]))
            state = np.moveaxis(state, [0, 1], [i, k])
        flat = state.reshape(d ** k, D)
        rho = flat @ flat.conj().T
        pb = np.sum(np.abs(flat) ** 2, axis=0)
        return rho, float(np.dot(pb, self.model.H_B.energies))


def recycling_network(model: ShiftModel, m: int) -> RecyclingNetwork:
    return RecyclingNetwork(model, m)


def default_probes(E: float, n_theta: int = 7, n_phi: int = 4) -> list[np.ndarray]:
    """Pure qubit probes ``cos t|0> + e^{i phi} sin t|1>`` with energy ``<= E``."""
    tmax = math.asin(math.sqrt(min(max(E, 0.0), 1.0)))
    out = []
    for t in np.linspace(0, tmax, n_theta):
        for phi in np.linspace(0, 2 * math.pi, n_phi, endpoint=False):
            out.append(np.array([math.cos(t), np.exp(1j * phi) * math.sin(t)]))
            if t == 0:
                break
    return out


def _trace_distance_to_pure(rho: np.ndarray, phi: np.ndarray) -> float:
    w = np.linalg.eigvalsh(rho - np.outer(phi, phi.conj()))
    return min(0.5 * float(np.sum(np.abs(w))), 1.0)


def recycling_run(model: ShiftModel, m: int, E: float,
                  probes: Optional[Sequence[np.ndarray]] = None,
                  eps_prime: Optional[float] = None) -> RecyclingRun:
    """Worst-case trace distance of the network output from ``(U (x) U^-1)^m``.

    Inputs are product probes (one qubit probe copied onto all ``2m``
    systems). ``energy_excess`` is the largest value of output system energy
    minus input total energy, which must be non-positive.
    """
    net = recycling_network(model, m)
    probes = default_probes(E) if probes is None else probes
    ideal = net.ideal()
    hs = model.H_S.energies
    h_sys = np.zeros(1)
    for _ in range(net.n_systems):
        h_sys = np.add.outer(h_sys, hs).reshape(-1)
    e_beta = model.battery_energy()
    errors, excess, e_batt = [], -math.inf, e_beta
    for q in probes:
        q = np.asarray(q, dtype=complex)
        psi = np.ones(1, dtype=complex)
        for _ in range(net.n_systems):
            psi = np.kron(psi, q)
        rho, e_batt = net.run(psi)
        errors.append(_trace_distance_to_pure(rho, ideal @ psi))
        e_in = float(np.dot(np.abs(psi) ** 2, h_sys))
        e_out = float(np.real(np.dot(np.diag(rho), h_sys)))
        excess = max(excess, e_out - (e_in + e_beta))
    cap = math.nan if eps_prime is None else m * eps_prime
    return RecyclingRun(m, max(errors), cap, e_beta, excess, tuple(errors))


# ---------------------------------------------------------------------------
# Soundness of the lower bound against the explicit construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConsistencyReport:
    battery_energy: float
    bound: float
    eps_measured: float
    eps_prime: float
    delta_E: float
    slack: float

    @property
    def consistent(self) -> bool:
        return self.slack >= 0


def bound_consistency_check(model: ShiftModel, E: float, eps_measured: float) -> ConsistencyReport:
    """Compare the bounded-Hamiltonian bound at the measured error with ``E(beta)``.

    Raises ``BoundViolation`` if the bound exceeds the battery energy.
    """
    if not 0 <= eps_measured <= 1:
        raise ValueError("eps_measured must lie in [0, 1]")
    if E <= 0:
        raise ValueError("E must be positive")
    U = model.target
    g = ConstraintFn.from_unitary(U.conj().T, model.H_S)
    ep = epsilon_prime(eps_measured, E, g)
    dE = delta_E_bounded(U, model.H_S)
    if ep == 0 and dE > 0:
        bound = math.inf
    else:
        bound = corollary6_bound(dE, model.H_S.norm, ep)
    e_beta = model.battery_energy()
    rep = ConsistencyReport(e_beta, bound, eps_measured, ep, dE, e_beta - bound)
    if not rep.consistent:
        raise BoundViolation(f"battery energy {e_beta:.6g} below bound {bound:.6g}")
    return rep
