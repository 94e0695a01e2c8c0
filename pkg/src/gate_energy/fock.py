"""Truncated Fock-space numerics for a single bosonic mode.

States live on the number basis ``|0>, ..., |dim-1>``. Probability weight
that analytically falls outside the kept block is carried explicitly as
``tail_mass`` so that energies computed on the block are known to be lower
bounds whenever the tail is non-zero.

Energies are in units of hbar*omega.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import mpmath
import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc, gammaln

DEFAULT_TAIL_CAP = 1e-10
NORM_TOL = 1e-12


class TruncationError(ValueError):
    """Raised when a truncated state would lose more weight than allowed."""

    def __init__(self, message, required_dim=None):
        super().__init__(message)
        self.required_dim = required_dim


def truncation_dim(mean_photons: float) -> int:
    """Default number of kept levels for a state of given mean photon number."""
    mu = max(float(mean_photons), 0.0)
    return int(math.ceil(mu + 12.0 * math.sqrt(mu + 1.0) + 20.0))


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Hamiltonian:
    """Grounded, discrete Hamiltonian diagonal in the number basis."""

    energies: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float).reshape(-1)
        if e.size == 0:
            raise ValueError("Hamiltonian needs at least one level")
        if e[0] < 0:
            raise ValueError(f"ground energy must be >= 0, got {e[0]}")
        if np.any(np.diff(e) < 0):
            raise ValueError("energies must be non-decreasing")
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)

    @property
    def dim(self) -> int:
        return self.energies.size

    @property
    def norm(self) -> float:
        """Operator norm of the kept block (largest energy)."""
        return float(self.energies[-1])

    @property
    def ground(self) -> float:
        return float(self.energies[0])

    def matrix(self) -> np.ndarray:
        return np.diag(self.energies).astype(complex)

    def levels_below(self, threshold: float) -> np.ndarray:
        """Boolean mask of levels kept by the projector ``P_threshold``."""
        return self.energies <= threshold + 1e-12

    def projector(self, threshold: float) -> np.ndarray:
        return np.diag(self.levels_below(threshold).astype(complex))


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)
        tail = float(self.tail_mass)
        if tail < 0:
            if tail < -NORM_TOL:
                raise ValueError(f"negative tail mass {tail}")
            tail = 0.0
        object.__setattr__(self, "tail_mass", tail)
        total = float(np.sum(np.abs(a) ** 2)) + tail
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"state not normalized: |a|^2 + tail = {total}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(np.outer(a, a.conj()), check=False)


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        if self.check:
            if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
                raise ValueError("density matrix is not Hermitian")
            tr = float(np.trace(m).real)
            if not (1 - 1e-9 <= tr <= 1 + 1e-12):
                raise ValueError(f"trace {tr} outside [1 - 1e-9, 1]")
            if np.linalg.eigvalsh(m)[0] < -1e-10:
                raise ValueError("density matrix has negative eigenvalues")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class Pmf:
    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if np.any(p < 0):
            raise ValueError("negative probability")
        if abs(p.sum() + self.tail_mass - 1.0) > 1e-10:
            raise ValueError(f"pmf does not sum to one: {p.sum() + self.tail_mass}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def dim(self) -> int:
        return self.probs.size

    def mean(self) -> float:
        return float(np.dot(np.arange(self.dim), self.probs))


class EnergyInterval(NamedTuple):
    value: float
    upper: float


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def harmonic_hamiltonian(dim: int, vacuum_offset: float = 0.5) -> Hamiltonian:
    """Ladder ``e_n = n + vacuum_offset`` on ``dim`` levels."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return Hamiltonian(np.arange(dim, dtype=float) + vacuum_offset)


def number_state(l: int, dim: int) -> StateVector:
    if l < 0 or l >= dim:
        raise IndexError(f"level {l} out of range for dim {dim}")
    a = np.zeros(dim, dtype=complex)
    a[l] = 1.0
    return StateVector(a, 0.0)


def _poisson_tail(mean: float, dim: int) -> float:
    # P(N >= dim) for N ~ Poisson(mean)
    if mean == 0:
        return 0.0
    return float(gammainc(dim, mean))


def coherent_state(alpha: complex, dim: int | None = None,
                   tail_cap: float = DEFAULT_TAIL_CAP) -> StateVector:
    """Coherent state ``|alpha>`` with amplitudes built in the log domain."""
    alpha = complex(alpha)
    mu = abs(alpha) ** 2
    if dim is None:
        dim = truncation_dim(mu)
    tail = _poisson_tail(mu, dim)
    if tail > tail_cap:
        need = dim
        while _poisson_tail(mu, need) > tail_cap:
            need = int(need * 1.25) + 1
        raise TruncationError(
            f"truncation too small: dim={dim} loses {tail:.3g} > {tail_cap:.1g}; "
            f"use dim >= {need}", required_dim=need)
    n = np.arange(dim)
    if mu == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return StateVector(amps, 0.0)
    logmag = -mu / 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    amps = np.exp(logmag) * np.exp(1j * n * np.angle(alpha))
    # recompute the tail from the kept block so the normalization invariant is exact
    tail = max(1.0 - float(np.sum(np.abs(amps) ** 2)), 0.0)
    return StateVector(amps, tail)


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def _guarded_expm(generator_of_dim, dim: int, guard: int | None) -> np.ndarray:
    # the exponential of a truncated generator is wrong near the cut; work in a
    # larger space and keep only the leading block
    if guard is None:
        guard = 2 * dim
    big = generator_of_dim(dim + guard)
    return expm(big)[:dim, :dim]


def unitarity_defect(u: np.ndarray, block: int | None = None) -> float:
    """Max-entry deviation of ``u^dag u`` from the identity on the leading block."""
    k = u.shape[0] if block is None else block
    g = u[:, :k].conj().T @ u[:, :k]
    return float(np.max(np.abs(g - np.eye(k))))


def displacement_matrix(z: complex, dim: int, guard: int | None = None,
                        return_defect: bool = False):
    """Truncated ``D(z) = exp(z a^dag - conj(z) a)``."""
    z = complex(z)

    def gen(d):
        a = annihilation(d)
        return z * a.conj().T - z.conjugate() * a

    u = _guarded_expm(gen, dim, guard)
    if return_defect:
        return u, unitarity_defect(u)
    return u


def squeeze_matrix(xi: float, dim: int, guard: int | None = None,
                   return_defect: bool = False):
    """Truncated squeezer with ``S^dag a S = a cosh(xi) - a^dag sinh(xi)``.

    The generator is ``(xi/2)(a^2 - a^dag^2)``, the sign convention under
    which :func:`squeeze_amplitude` gives the matrix elements.
    """
    xi = float(xi)

    def gen(d):
        a = annihilation(d)
        ad = a.conj().T
        return (xi / 2) * (a @ a - ad @ ad)

    u = _guarded_expm(gen, dim, guard)
    if return_defect:
        return u, unitarity_defect(u)
    return u


# ---------------------------------------------------------------------------
# Closed-form squeezing amplitudes
# ---------------------------------------------------------------------------

_CANCELLATION_LIMIT = 1e6


def _squeeze_log_terms(xi: float, l: int, n: int):
    half = (l - n) // 2
    m_lo = max(0, -half)
    m_hi = n // 2
    if m_lo > m_hi:
        return []
    m = np.arange(m_lo, m_hi + 1)
    base = (0.5 * (gammaln(n + 1) + gammaln(l + 1))
            - (n + 0.5) * math.log(math.cosh(xi))
            + ((l - n) / 2) * math.log(math.tanh(xi) / 2))
    logs = (base + 2 * m * math.log(math.sinh(xi) / 2)
            - gammaln(m + 1) - gammaln(n - 2 * m + 1) - gammaln(m + half + 1))
    signs = np.where(m % 2 == 0, 1.0, -1.0)
    return list(zip(signs, logs, m))


def _squeeze_amplitude_mp(xi: float, l: int, n: int, dps: int) -> float:
    with mpmath.workdps(dps):
        x = mpmath.mpf(xi)
        sh = mpmath.sinh(x) / 2
        half = (l - n) // 2
        total = mpmath.mpf(0)
        for m in range(max(0, -half), n // 2 + 1):
            total += ((-1) ** m * sh ** (2 * m)
                      / (mpmath.factorial(m) * mpmath.factorial(n - 2 * m)
                         * mpmath.factorial(m + half)))
        pref = (mpmath.sqrt(mpmath.factorial(n) * mpmath.factorial(l))
                / mpmath.cosh(x) ** (n + mpmath.mpf(1) / 2)
                * (mpmath.tanh(x) / 2) ** (mpmath.mpf(l - n) / 2))
        return float(pref * total)


def squeeze_amplitude(xi: float, l: int, n: int) -> float:
    """Matrix element ``<n|S(xi)|l>`` from the finite-sum closed form.

    Every term of the sum is assembled in log-magnitude/sign form. When the
    alternating sum cancels badly the sum is redone in extended precision.
    Negative ``xi`` uses ``S(-xi) = S(xi)^dag`` (the elements are real).
    """
    if l < 0 or n < 0:
        raise ValueError("levels must be non-negative")
    if (n - l) % 2:
        return 0.0
    if xi == 0:
        return 1.0 if n == l else 0.0
    if xi < 0:
        return squeeze_amplitude(-xi, n, l)
    terms = _squeeze_log_terms(xi, l, n)
    if not terms:
        return 0.0
    top = max(t for _, t, _ in terms)
    parts = [s * math.exp(t - top) for s, t, _ in terms]
    s = math.fsum(parts)
    peak = max(abs(p) for p in parts)
    if s == 0 or peak / abs(s) > _CANCELLATION_LIMIT:
        digits = 20 + int(math.log10(max(peak / abs(s), 1.0) if s else 1e30))
        return _squeeze_amplitude_mp(xi, l, n, dps=max(digits, 30))
    return s * math.exp(top)


def squeeze_amplitudes(xi: float, n_max: int, l_max: int) -> np.ndarray:
    """Matrix ``A[n, l] = <n|S(xi)|l>`` for ``n < n_max``, ``l < l_max``."""
    out = np.zeros((n_max, l_max))
    for l in range(l_max):
        for n in range(l % 2, n_max, 2):
            out[n, l] = squeeze_amplitude(xi, l, n)
    return out


def squeezed_vacuum_amplitudes(r: float, dim: int) -> np.ndarray:
    """Vectorized ``<n|S(r)|0>``; only even ``n`` are non-zero."""
    amps = np.zeros(dim)
    if r == 0:
        amps[0] = 1.0
        return amps
    k = np.arange((dim + 1) // 2)
    logmag = (0.5 * gammaln(2 * k + 1) - gammaln(k + 1) - k * math.log(2)
              + k * math.log(math.tanh(abs(r))) - 0.5 * math.log(math.cosh(r)))
    sign = np.where(k % 2 == 0, 1.0, -1.0) if r > 0 else np.ones_like(logmag)
    amps[0::2] = sign * np.exp(logmag)
    return amps


# ---------------------------------------------------------------------------
# Observables
# ---------------------------------------------------------------------------

def _populations(state) -> tuple[np.ndarray, float]:
    if isinstance(state, StateVector):
        return np.abs(state.amplitudes) ** 2, state.tail_mass
    if isinstance(state, DensityMatrix):
        return np.real(np.diag(state.entries)).copy(), 0.0
    if isinstance(state, Pmf):
        return np.asarray(state.probs), state.tail_mass
    arr = np.asarray(state)
    if arr.ndim == 1:
        return np.abs(arr) ** 2, 0.0
    return np.real(np.diag(arr)).copy(), 0.0


def energy(state, H: Hamiltonian, interval: bool = False):
    """Mean energy on the kept block.

    With ``interval=True`` returns ``EnergyInterval(value, upper)`` where the
    upper end is infinite whenever the state has truncated tail weight.
    """
    p, tail = _populations(state)
    if p.size != H.dim:
        raise ValueError(f"dimension mismatch: state {p.size} vs H {H.dim}")
    value = float(np.dot(p, H.energies))
    if interval:
        return EnergyInterval(value, value if tail == 0 else math.inf)
    return value


def truncated_energy(state, H: Hamiltonian, ebar: float) -> float:
    """Energy counted only on levels with ``e_n <= ebar``."""
    p, _ = _populations(state)
    if p.size != H.dim:
        raise ValueError(f"dimension mismatch: state {p.size} vs H {H.dim}")
    keep = H.levels_below(ebar)
    return float(np.dot(p[keep], H.energies[keep]))


def photon_distribution(state) -> Pmf:
    p, tail = _populations(state)
    p = np.clip(p, 0.0, None)
    return Pmf(p, tail)
