"""State and channel comparison: fidelity, trace distance, and brackets on the
energy-constrained channel fidelity for small systems."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .fock import DensityMatrix, Hamiltonian


class InfeasibleConstraint(ValueError):
    pass


def _matrix(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return np.asarray(x.entries)
    return np.asarray(x, dtype=complex)


def _ham_matrix(H) -> np.ndarray:
    if isinstance(H, Hamiltonian):
        return np.diag(H.energies).astype(complex)
    return np.asarray(H, dtype=complex)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    # eigenvalues at round-off level are zero; their square roots are not small
    w = np.where(w > w.size * 4e-16 * max(w[-1], 0.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

def state_fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``."""
    r, s = _matrix(rho), _matrix(sigma)
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {s.shape}")
    # trace norm of sqrt(rho) sqrt(sigma)
    sv = np.linalg.svd(_psd_sqrt(r) @ _psd_sqrt(s), compute_uv=False)
    f = float(np.sum(sv) ** 2)
    return min(max(f, 0.0), 1.0)


def trace_distance(rho, sigma) -> float:
    r, s = _matrix(rho), _matrix(sigma)
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {s.shape}")
    d = r - s
    w = np.linalg.eigvalsh((d + d.conj().T) / 2)
    return min(0.5 * float(np.sum(np.abs(w))), 1.0)


def fuchs_bounds(fidelity: float) -> tuple[float, float]:
    """Error interval ``(1 - sqrt(F), sqrt(1 - F))`` implied by a fidelity."""
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"fidelity {fidelity} outside [0, 1]")
    return 1.0 - math.sqrt(fidelity), math.sqrt(1.0 - fidelity)


# ---------------------------------------------------------------------------
# Channels and probes
# ---------------------------------------------------------------------------

def _kraus(channel) -> list[np.ndarray]:
    if isinstance(channel, np.ndarray) and channel.ndim == 2:
        return [channel.astype(complex)]
    ops = [np.asarray(k, dtype=complex) for k in channel]
    if not ops:
        raise ValueError("empty Kraus list")
    return ops


@dataclass(frozen=True)
class ProbeState:
    """Probe on reference (first factor) tensor system (second factor)."""

    joint: DensityMatrix
    system_energy: float
    ref_dim: int

    @classmethod
    def from_pure(cls, psi, H, ref_dim: int) -> "ProbeState":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        rho = np.outer(psi, psi.conj())
        return cls.from_density(rho, H, ref_dim)

    @classmethod
    def from_density(cls, joint, H, ref_dim: int) -> "ProbeState":
        m = _matrix(joint)
        hs = _ham_matrix(H)
        if m.shape[0] != ref_dim * hs.shape[0]:
            raise ValueError("probe dimension does not match reference x system")
        e = float(np.real(np.trace(m @ np.kron(np.eye(ref_dim), hs))))
        return cls(DensityMatrix(m), e, ref_dim)

    @property
    def system_dim(self) -> int:
        return self.joint.dim // self.ref_dim

    def system_marginal(self) -> np.ndarray:
        d = self.system_dim
        t = np.asarray(self.joint.entries).reshape(self.ref_dim, d, self.ref_dim, d)
        return np.einsum("rarb->ab", t)


def apply_on_system(channel, probe: ProbeState) -> np.ndarray:
    """Output of ``(I_R (x) channel)`` on the probe."""
    ops = _kraus(channel)
    eye = np.eye(probe.ref_dim)
    rho = np.asarray(probe.joint.entries)
    out = np.zeros_like(rho)
    for k in ops:
        if k.shape[1] != probe.system_dim:
            raise ValueError("channel does not act on the probe's system")
        big = np.kron(eye, k)
        out = out + big @ rho @ big.conj().T
    return out


def probe_fidelity(channel_a, channel_b, probe: ProbeState) -> float:
    return state_fidelity(apply_on_system(channel_a, probe),
                          apply_on_system(channel_b, probe))


# ---------------------------------------------------------------------------
# Energy-constrained linear minimization
# ---------------------------------------------------------------------------

class ConstrainedMin(NamedTuple):
    lower: float       # certified by Lagrangian duality
    value: float       # tr(rho A) at the returned feasible state
    rho: np.ndarray


def _ground(m):
    w, v = np.linalg.eigh(m)
    return w[0], v[:, 0]


def constrained_min(A, H, E: float, iters: int = 80) -> ConstrainedMin:
    """Minimize ``tr(rho A)`` over states with ``tr(rho H) <= E``.

    Solved through the one-dimensional dual
    ``max_{lam >= 0} lambda_min(A + lam H) - lam E``: the lowest eigenvector
    energy is non-increasing in ``lam``, so bisection brackets the crossing
    and a two-vector mixture meets the energy constraint with equality.
    """
    A = np.asarray(A, dtype=complex)
    A = (A + A.conj().T) / 2
    hm = _ham_matrix(H)
    hm = (hm + hm.conj().T) / 2
    hw, hv = np.linalg.eigh(hm)
    e0 = hw[0]
    if E < e0 - 1e-12:
        raise InfeasibleConstraint(f"energy budget {E} below ground energy {e0}")

    def energy_of(v):
        return float(np.real(v.conj() @ hm @ v))

    w0, v0 = _ground(A)
    if energy_of(v0) <= E + 1e-13:
        return ConstrainedMin(float(w0), float(w0), np.outer(v0, v0.conj()))

    if E <= e0 + 1e-12:
        # only the ground eigenspace of H is feasible
        g = hv[:, hw <= e0 + 1e-12]
        w, v = _ground(g.conj().T @ A @ g)
        vec = g @ v
        return ConstrainedMin(float(w), float(w), np.outer(vec, vec.conj()))

    best_lower = float(w0)
    scale = max(np.max(np.abs(A)), 1.0) / max(E - e0, 1e-12)
    lo, v_lo = 0.0, v0
    hi = scale
    for _ in range(200):
        w, v = _ground(A + hi * hm)
        best_lower = max(best_lower, float(w) - hi * E)
        if energy_of(v) <= E:
            v_hi = v
            break
        lo, v_lo = hi, v
        hi *= 2.0
    else:  # pragma: no cover - guarded by the ground-space branch above
        raise InfeasibleConstraint("could not meet the energy budget")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        w, v = _ground(A + mid * hm)
        best_lower = max(best_lower, float(w) - mid * E)
        if energy_of(v) > E:
            lo, v_lo = mid, v
        else:
            hi, v_hi = mid, v
        if hi - lo <= 1e-15 * max(hi, 1.0):
            break
    e_lo, e_hi = energy_of(v_lo), energy_of(v_hi)
    t = 0.0 if e_lo == e_hi else min(max((E - e_hi) / (e_lo - e_hi), 0.0), 1.0)
    rho = t * np.outer(v_lo, v_lo.conj()) + (1 - t) * np.outer(v_hi, v_hi.conj())
    value = float(np.real(np.trace(rho @ A)))
    return ConstrainedMin(min(best_lower, value), value, rho)


# ---------------------------------------------------------------------------
# Energy-constrained fidelity brackets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FidelityBracket:
    lower: float
    upper: float

    def __post_init__(self):
        lo = min(max(float(self.lower), 0.0), 1.0)
        up = min(max(float(self.upper), 0.0), 1.0)
        if lo > up:
            if lo - up > 1e-9:
                raise ValueError(f"inverted bracket [{lo}, {up}]")
            lo = up
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _min_norm_hull(points: np.ndarray):
    """Closest point to the origin in the convex hull of complex points.

    Returns ``(distance, weights)``. In the plane the nearest point lies on a
    segment between two points unless the origin is inside the hull, which is
    settled by a feasibility LP.
    """
    pts = np.asarray(points, dtype=complex)
    n = pts.size
    if n == 1:
        return abs(pts[0]), np.ones(1)
    best = (math.inf, None)
    for i in range(n):
        a = pts[i]
        d = pts - a
        dd = np.abs(d) ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(dd > 0, np.clip(-np.real(np.conj(a) * d) / dd, 0, 1), 0.0)
        q = np.abs(a + t * d)
        j = int(np.argmin(q))
        if q[j] < best[0]:
            w = np.zeros(n)
            w[i] += 1 - t[j]
            w[j] += t[j]
            best = (float(q[j]), w)
    if best[0] > 0 and n >= 3:
        res = linprog(np.zeros(n),
                      A_eq=np.vstack([pts.real, pts.imag, np.ones(n)]),
                      b_eq=[0.0, 0.0, 1.0], bounds=(0, None), method="highs")
        if res.status == 0:
            w = np.clip(res.x, 0, None)
            return 0.0, w / w.sum()
    return best


def ec_unitary_fidelity(U, V, H, E: float, grid: int = 64) -> FidelityBracket:
    """Bracket on ``inf |tr(rho U^dag V)|^2`` over states with ``tr(rho H) <= E``.

    The reachable values ``tr(rho W)`` form a convex set in the plane, so the
    infimum is the squared distance from the origin to that set. The lower
    end maximizes certified support-function values over directions (a
    64-point angle grid refined once, then polished); the upper end is the
    best mixture of the probes found along the way.
    """
    W = np.asarray(U, dtype=complex).conj().T @ np.asarray(V, dtype=complex)
    hm = _ham_matrix(H)
    if E < np.linalg.eigvalsh(hm)[0] - 1e-12:
        raise InfeasibleConstraint(f"energy budget {E} below ground energy")
    d = W.shape[0]
    if np.allclose(W, W[0, 0] * np.eye(d), atol=1e-14) and abs(abs(W[0, 0]) - 1) < 1e-12:
        return FidelityBracket(1.0, 1.0)

    cands: list[np.ndarray] = []

    def support(theta):
        a = (np.exp(-1j * theta) * W + np.exp(1j * theta) * W.conj().T) / 2
        res = constrained_min(a, hm, E)
        cands.append(res.rho)
        return res.lower

    thetas = np.linspace(0, 2 * np.pi, grid, endpoint=False)
    vals = np.array([support(t) for t in thetas])
    i = int(np.argmax(vals))
    step = 2 * np.pi / grid
    fine = np.linspace(thetas[i] - step, thetas[i] + step, grid)
    fvals = np.array([support(t) for t in fine])
    j = int(np.argmax(fvals))
    lo_t = fine[max(j - 1, 0)]
    hi_t = fine[min(j + 1, grid - 1)]
    pol = minimize_scalar(lambda t: -support(t), bounds=(lo_t, hi_t),
                          method="bounded", options={"xatol": 1e-12})
    best = max(vals.max(), fvals.max(), -pol.fun)
    lower = max(best, 0.0) ** 2

    # add the eigenvectors of W so the unconstrained face is always represented
    _, ev = np.linalg.eig(W)
    for k in range(d):
        v = ev[:, k] / np.linalg.norm(ev[:, k])
        if np.real(v.conj() @ hm @ v) <= E + 1e-12:
            cands.append(np.outer(v, v.conj()))
    pts = np.array([np.trace(r @ W) for r in cands])
    dist, w = _min_norm_hull(pts)
    rho = sum(wk * r for wk, r in zip(w, cands) if wk > 0)
    upper = abs(np.trace(rho @ W)) ** 2
    return FidelityBracket(lower, max(upper, lower))


def ec_channel_fidelity(kraus: Sequence[np.ndarray], target, H, E: float,
                        max_iter: int = 3000, tol: float = 1e-10) -> FidelityBracket:
    """Bracket on the energy-constrained fidelity of a channel to a unitary.

    For a pure probe with system marginal ``rho`` the probe fidelity is
    ``sum_i |tr(rho U^dag K_i)|^2``, a convex quadratic in ``rho``; it is
    minimized by Frank-Wolfe with exact line search. Each iteration yields a
    certified lower bound from the linearization.
    """
    U = np.asarray(target, dtype=complex)
    B = np.array([U.conj().T @ np.asarray(k, dtype=complex) for k in kraus])
    hm = _ham_matrix(H)
    # B_i^T flattened so that tr(rho B_i) = rows . vec(rho)
    rows = np.transpose(B, (0, 2, 1)).reshape(len(B), -1)

    def coeffs(rho):
        return rows @ rho.reshape(-1)

    def grad(b):
        g = np.einsum("i,iab->ab", b.conj(), B)
        return g + g.conj().T

    rho = constrained_min(hm, hm, E).rho
    b = coeffs(rho)
    q = float(np.sum(np.abs(b) ** 2))
    upper, lower = q, 0.0
    for _ in range(max_iter):
        g = grad(b)
        lin = constrained_min(g, hm, E)
        cur = float(np.real(np.trace(rho @ g)))
        lower = max(lower, q + lin.lower - cur)
        if upper - lower <= tol:
            break
        c = coeffs(lin.rho)
        diff = c - b
        den = float(np.sum(np.abs(diff) ** 2))
        if den <= 0:
            break
        gamma = min(max(-float(np.real(np.vdot(b, diff))) / den, 0.0), 1.0)
        if gamma == 0.0:
            break
        rho = rho + gamma * (lin.rho - rho)
        b = b + gamma * diff
        q = float(np.sum(np.abs(b) ** 2))
        upper = min(upper, q)
    return FidelityBracket(lower, upper)
