"""Minimum energy of any state inside a trace-distance ball.

``E_min(rho, eps) = min { tr(sigma H) : sigma a state, (1/2)||sigma - rho||_1 <= eps }``

Three routes are provided: an exact greedy solver for states diagonal in the
energy basis, a primal solver for small dense problems that also emits a
matching dual certificate, and the threshold certificate that lower-bounds
the minimum by ``truncated_energy(rho, ebar) - 2 eps ebar`` for any dimension.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fock import DensityMatrix, Hamiltonian

FEASIBILITY_TOL = 1e-9
CONTRACTION_TOL = 1e-10
GAP_ACCEPT = 1e-4
MAX_PRIMAL_DIM = 64


class InfeasibleCertificate(ValueError):
    def __init__(self, condition: str, violation: float):
        super().__init__(f"dual certificate violates {condition} by {violation:.3e}")
        self.condition = condition
        self.violation = violation


class EminConvergenceError(RuntimeError):
    def __init__(self, lower: float, upper: float, iterations: int):
        super().__init__(f"primal solver stopped after {iterations} iterations "
                         f"with bracket [{lower:.9g}, {upper:.9g}]")
        self.lower = lower
        self.upper = upper


@dataclass(frozen=True)
class DualCertificate:
    z: float
    y: float
    M: np.ndarray
    value: float


@dataclass(frozen=True)
class EminResult:
    value: float
    method: str  # greedy-diagonal | primal-solver | dual-threshold | dual-custom
    achiever: Optional[DensityMatrix] = None
    certificate: Optional[DualCertificate] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    iterations: int = 0

    @property
    def gap(self) -> float:
        if self.lower is None or self.upper is None:
            return 0.0
        return self.upper - self.lower


def _rho(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return np.asarray(rho.entries)
    m = np.asarray(rho, dtype=complex)
    if m.ndim == 1:
        return np.diag(m)
    return m


def _hmat(H) -> np.ndarray:
    if isinstance(H, Hamiltonian):
        return np.diag(H.energies).astype(complex)
    return np.asarray(H, dtype=complex)


def _check_eps(eps: float):
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")


# ---------------------------------------------------------------------------
# Exact solution for energy-diagonal states
# ---------------------------------------------------------------------------

def emin_exact_diagonal(p, H: Hamiltonian, eps: float) -> EminResult:
    """Move up to ``eps`` probability from the top occupied levels to the ground."""
    _check_eps(eps)
    p = np.array(p, dtype=float).reshape(-1)
    e = H.energies
    if p.size != e.size:
        raise ValueError("dimension mismatch")
    if abs(p.sum() - 1) > 1e-9 or np.any(p < -1e-15):
        raise ValueError("p is not a probability vector")
    p = np.clip(p, 0, None)
    budget = eps
    moved = 0.0
    for k in range(p.size - 1, 0, -1):
        if budget <= 0:
            break
        take = min(p[k], budget)
        p[k] -= take
        budget -= take
        moved += take
    p[0] += moved
    return EminResult(float(np.dot(p, e)), "greedy-diagonal",
                      achiever=DensityMatrix(np.diag(p).astype(complex), check=False))


# ---------------------------------------------------------------------------
# Dual certificates
# ---------------------------------------------------------------------------

def dual_value(rho, H, eps: float, z: float, y: float, M) -> DualCertificate:
    """Check a dual point ``(z, y, M)`` and return the value it certifies.

    Feasibility: ``z >= 0``, ``M^dag M <= I`` and
    ``(z/2)(M + M^dag) - y I <= H``. The certified value
    ``tr rho((z/2)(M + M^dag) - y I) - 2 z eps`` lower-bounds ``E_min``.
    """
    r, h = _rho(rho), _hmat(H)
    M = np.asarray(M, dtype=complex)
    if M.ndim == 0:
        M = M * np.eye(h.shape[0])
    if z < 0:
        raise InfeasibleCertificate("z >= 0", -z)
    smax = float(np.linalg.norm(M, 2)) if M.size else 0.0
    if smax > 1 + CONTRACTION_TOL:
        raise InfeasibleCertificate("M^dag M <= I", smax - 1)
    op = (z / 2) * (M + M.conj().T) - y * np.eye(h.shape[0])
    excess = float(np.linalg.eigvalsh(op - h)[-1])
    if excess > FEASIBILITY_TOL:
        raise InfeasibleCertificate("(z/2)(M + M^dag) - yI <= H", excess)
    value = float(np.real(np.trace(r @ op))) - 2 * z * eps
    return DualCertificate(float(z), float(y), M, value)


def certificate_from_multiplier(rho, H, eps: float, Y) -> DualCertificate:
    """Dual point built from any Hermitian multiplier ``Y``.

    ``z = ||Y||``, ``M = -Y/z`` and ``y = -lambda_min(H + Y)`` satisfy the
    constraints by construction.
    """
    h = _hmat(H)
    Y = np.asarray(Y, dtype=complex)
    Y = (Y + Y.conj().T) / 2
    z = float(np.max(np.abs(np.linalg.eigvalsh(Y)))) if Y.size else 0.0
    lam = float(np.linalg.eigvalsh(h + Y)[0])
    M = -Y / z if z > 0 else np.zeros_like(Y)
    return dual_value(rho, h, eps, z, -lam, M)


def corollary3_certificate(rho, H: Hamiltonian, eps: float, ebar: float) -> DualCertificate:
    """The threshold dual point ``z = ebar``, ``y = 0``, ``M = P H P / ebar``."""
    if ebar <= 0:
        raise ValueError("ebar must be positive")
    h_trunc = np.diag(np.where(H.levels_below(ebar), H.energies, 0.0)).astype(complex)
    return dual_value(rho, H, eps, float(ebar), 0.0, h_trunc / ebar)


def corollary3_bound(rho, H: Hamiltonian, eps: float, ebar: float) -> float:
    """``truncated_energy(rho, ebar) - 2 eps ebar``, a lower bound on ``E_min``."""
    r = _rho(rho)
    p = np.real(np.diag(r))
    keep = H.levels_below(ebar)
    trunc = float(np.dot(p[keep], H.energies[keep]))
    return trunc - 2 * eps * ebar


# ---------------------------------------------------------------------------
# Primal solver
# ---------------------------------------------------------------------------

def _project_simplex(v: np.ndarray, total: float = 1.0) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    k = np.arange(1, v.size + 1)
    ok = u - css / k > 0
    r = k[ok][-1]
    return np.maximum(v - css[ok][-1] / r, 0.0)


def _project_l1(v: np.ndarray, radius: float) -> np.ndarray:
    if np.sum(np.abs(v)) <= radius:
        return v
    return np.sign(v) * _project_simplex(np.abs(v), radius)


def _project_states(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return (v * _project_simplex(w)) @ v.conj().T


def _project_trace_ball(b: np.ndarray, radius: float) -> np.ndarray:
    w, v = np.linalg.eigh((b + b.conj().T) / 2)
    return (v * _project_l1(w, radius)) @ v.conj().T


def _trace_dist(a, b) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def emin_primal_small(rho, H, eps: float, tol: float = 1e-7,
                      max_iter: int = 50000, check_every: int = 20) -> EminResult:
    """Solve the minimum-energy problem for a dense state of dimension <= 64.

    Uses ADMM on the splitting ``sigma in states``, ``sigma - rho in trace
    ball``; both projections are exact eigen-projections. The scaled
    multiplier is turned into a dual certificate every ``check_every``
    iterations and the loop stops once the certified gap is below ``tol``.
    The returned value is the energy of a strictly feasible state.
    """
    _check_eps(eps)
    r = _rho(rho)
    h = _hmat(H)
    d = r.shape[0]
    if d > MAX_PRIMAL_DIM:
        raise ValueError(f"primal solver limited to dim <= {MAX_PRIMAL_DIM}")
    hw = np.linalg.eigvalsh((h + h.conj().T) / 2)
    if eps >= 1.0:
        v = np.linalg.eigh(h)[1][:, 0]
        return EminResult(float(hw[0]), "primal-solver",
                          achiever=DensityMatrix(np.outer(v, v.conj()), check=False),
                          lower=float(hw[0]), upper=float(hw[0]))
    e_rho = float(np.real(np.trace(r @ h)))
    if eps == 0.0:
        return EminResult(e_rho, "primal-solver", achiever=DensityMatrix(r, check=False),
                          lower=e_rho, upper=e_rho)

    step = max(float(hw[-1] - hw[0]), 1e-3)
    w = r.copy()
    u = np.zeros_like(r)
    best_lo, best_up = -math.inf, math.inf
    best_cert, best_state = None, r
    it = 0
    for it in range(1, max_iter + 1):
        x = _project_states(w - u - h / step)
        w = r + _project_trace_ball(x + u - r, 2 * eps)
        u = u + x - w
        if it % check_every:
            continue
        cert = certificate_from_multiplier(r, h, eps, step * u)
        if cert.value > best_lo:
            best_lo, best_cert = cert.value, cert
        dist = _trace_dist(x, r)
        cand = x if dist <= eps else (eps / dist) * x + (1 - eps / dist) * r
        up = float(np.real(np.trace(cand @ h)))
        if up < best_up:
            best_up, best_state = up, cand
        if best_up - best_lo <= tol:
            break
    if best_up - best_lo > GAP_ACCEPT:
        raise EminConvergenceError(best_lo, best_up, it)
    return EminResult(best_up, "primal-solver",
                      achiever=DensityMatrix(best_state, check=False),
                      certificate=best_cert, lower=best_lo, upper=best_up, iterations=it)
