"""Battery-energy lower bounds for unitary gates and the threshold optimizer.

All bounds are returned unclamped: a non-positive value is vacuous but is
kept so the arithmetic can be audited.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .fock import Hamiltonian
from .metrics import constrained_min

AUDIT_TOL = 1e-10


class NotWitnessed(ValueError):
    """The chosen threshold does not show any energy gain."""


class NoAdmissibleThreshold(ValueError):
    """No threshold on the grid satisfies the feasibility predicate."""


# ---------------------------------------------------------------------------
# Energy constraint functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstraintFn:
    """Upper bound ``f(E)`` on the output energy of a gate for input energy ``E``."""

    kind: str
    params: tuple
    fn: Callable[[float], float] = field(repr=False, compare=False)

    def __call__(self, E: float) -> float:
        return float(self.fn(E))

    @classmethod
    def linear(cls, a: float, b: float) -> "ConstraintFn":
        if a < 0:
            raise ValueError("a linear constraint function needs a >= 0")
        return cls("linear", (a, b), lambda E: a * E + b)

    @classmethod
    def displacement(cls, z: complex) -> "ConstraintFn":
        r = abs(z)
        return cls("displacement", (r,), lambda E: (math.sqrt(max(E, 0.0)) + r) ** 2)

    @classmethod
    def squeezing(cls, xi: float) -> "ConstraintFn":
        return cls("squeezing", (xi,), lambda E: math.exp(2 * abs(xi)) * E)

    @classmethod
    def table(cls, energies, values) -> "ConstraintFn":
        x = np.asarray(energies, dtype=float)
        y = np.asarray(values, dtype=float)
        if x.size != y.size or x.size == 0:
            raise ValueError("table needs matching, non-empty columns")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(y) < 0):
            raise ValueError("table must be increasing in E and non-decreasing in f")
        return cls("table", (tuple(x), tuple(y)), lambda E: float(np.interp(E, x, y)))

    @classmethod
    def from_unitary(cls, U, H) -> "ConstraintFn":
        """Exact constraint function of a finite-dimensional unitary.

        ``f(E) = max tr(U rho U^dag H)`` over states with ``tr(rho H) <= E``.
        """
        U = np.asarray(U, dtype=complex)
        hm = np.diag(H.energies).astype(complex) if isinstance(H, Hamiltonian) else np.asarray(H)
        heis = U.conj().T @ hm @ U

        def f(E):
            return -constrained_min(-heis, hm, E).value

        return cls("unitary", (U.shape[0],), f)

    def is_non_decreasing(self, grid) -> bool:
        vals = [self(E) for E in grid]
        return all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def epsilon_prime(eps: float, E: float, g) -> float:
    """Per-use error ``(1 + g(E)/E) sqrt(eps)`` of the recycled battery."""
    if E <= 0:
        raise ValueError("E must be positive")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    gE = g(E) if callable(g) else float(g)
    return (1.0 + gE / E) * math.sqrt(eps)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    bound: float
    eps_prime: float
    ebar_used: float
    truncated_output_energy: float
    input_energy: float
    m_optimal: object
    components: tuple
    extras: dict = field(default_factory=dict, compare=False)

    def reconstruct(self) -> float:
        return float(sum(v for _, v in self.components))

    def __post_init__(self):
        if math.isfinite(self.bound) and abs(self.reconstruct() - self.bound) > AUDIT_TOL * max(1.0, abs(self.bound)):
            raise AssertionError("bound does not match its components")

    @property
    def vacuous(self) -> bool:
        return self.bound <= 0


# ---------------------------------------------------------------------------
# General bounds
# ---------------------------------------------------------------------------

def theorem4_bound(truncated_output_energy_total: float, m: int, E: float,
                   ebar_m: float, eps_prime: float) -> float:
    """``Ebar_out - 2 m E - 2 m eps' ebar_m`` for ``m`` recycled gate pairs."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return truncated_output_energy_total - 2 * m * E - 2 * m * eps_prime * ebar_m


def theorem5_bound(pair_truncated_output_energy: float, E: float, ebar: float,
                   eps_prime: float) -> BoundReport:
    """Single-pair bound ``(Ebar - E)^2 / (8 eps' ebar) - eps' ebar / 2``.

    ``E`` is the input energy of the probe pair. The recorded ``m_optimal``
    is the real maximizer ``(Ebar - E) / (4 eps' ebar)`` of the per-pair
    form of the many-copy bound.
    """
    if ebar <= 0:
        raise ValueError("ebar must be positive")
    if eps_prime <= 0:
        raise ValueError("eps_prime must be positive")
    gain = pair_truncated_output_energy - E
    if gain <= 0:
        raise NotWitnessed("threshold does not witness energy gain")
    t1 = gain ** 2 / (8 * eps_prime * ebar)
    t2 = eps_prime * ebar / 2
    return BoundReport(
        bound=t1 - t2, eps_prime=eps_prime, ebar_used=ebar,
        truncated_output_energy=pair_truncated_output_energy, input_energy=E,
        m_optimal=gain / (4 * eps_prime * ebar),
        components=(("gain_term", t1), ("threshold_penalty", -t2)))


def delta_E_bounded(U, H) -> float:
    """Spread ``lambda_max - lambda_min`` of ``U^dag H U - H``."""
    U = np.asarray(U, dtype=complex)
    hm = np.diag(H.energies).astype(complex) if isinstance(H, Hamiltonian) else np.asarray(H, dtype=complex)
    delta = U.conj().T @ hm @ U - hm
    w = np.linalg.eigvalsh((delta + delta.conj().T) / 2)
    return float(w[-1] - w[0])


def corollary6_bound(delta_E: float, normH: float, eps_prime: float) -> float:
    """``delta_E^2 / (16 eps' ||H||) - eps' ||H||`` for bounded Hamiltonians."""
    if normH <= 0:
        raise ValueError("normH must be positive")
    if delta_E == 0:
        return -eps_prime * normH
    if eps_prime <= 0:
        raise ValueError("eps_prime must be positive")
    return delta_E ** 2 / (16 * eps_prime * normH) - eps_prime * normH


def finite_dimensional_bound(delta_E: float, normH: float, eps: float) -> float:
    """Bounded-Hamiltonian bound with ``eps' = 2 sqrt(eps)``:
    ``delta_E^2 / (32 sqrt(eps) ||H||) - 2 sqrt(eps) ||H||``."""
    return corollary6_bound(delta_E, normH, 2 * math.sqrt(eps))


# ---------------------------------------------------------------------------
# Threshold optimization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Geometric grid on ``[lo, hi]``, optionally snapped to ``offset + k*step``."""

    lo: float
    hi: float
    points: int = 200
    step: Optional[float] = None
    offset: float = 0.0
    refine: int = 10

    def __post_init__(self):
        if self.points < 1 or self.hi < self.lo:
            raise ValueError("empty grid")

    def _snap(self, x: np.ndarray) -> np.ndarray:
        if self.step is None:
            return x
        k = np.round((x - self.offset) / self.step)
        s = self.offset + k * self.step
        s = s[(s >= self.lo - 1e-12) & (s <= self.hi + 1e-12)]
        return s

    def points_array(self) -> np.ndarray:
        if self.points == 1 or self.lo == self.hi:
            pts = np.array([self.lo])
        elif self.lo > 0:
            pts = np.geomspace(self.lo, self.hi, self.points)
        else:
            pts = np.linspace(self.lo, self.hi, self.points)
        pts = self._snap(pts)
        if self.step is not None:
            first = self.offset + math.ceil((self.lo - self.offset) / self.step - 1e-12) * self.step
            if first <= self.hi + 1e-12:
                pts = np.concatenate([[first], pts])
        return np.unique(pts)

    def between(self, a: float, b: float, spacing: float) -> np.ndarray:
        if self.step is None:
            n = max(int(round((b - a) / max(spacing, 1e-300) * self.refine)), 2) + 1
            return np.linspace(a, b, n)
        k0 = math.ceil((a - self.offset) / self.step - 1e-12)
        k1 = math.floor((b - self.offset) / self.step + 1e-12)
        return self.offset + np.arange(k0, k1 + 1) * self.step


class ThresholdOptimum(NamedTuple):
    ebar: float
    value: float


def optimize_threshold(objective: Callable[[float], float],
                       feasible: Callable[[float], bool],
                       grid: GridSpec) -> ThresholdOptimum:
    """Maximize ``objective`` over feasible thresholds on ``grid``.

    One refinement pass with ``grid.refine``-times finer spacing (every
    lattice point for snapped grids) is made between the neighbours of the
    incumbent. Ties go to the smaller threshold.
    """
    evaluated: dict[float, float] = {}

    def scan(points):
        for x in points:
            x = float(x)
            if x in evaluated:
                continue
            evaluated[x] = objective(x) if feasible(x) else -math.inf

    pts = grid.points_array()
    scan(pts)

    def incumbent():
        good = [(v, -x) for x, v in evaluated.items() if v > -math.inf]
        if not good:
            raise NoAdmissibleThreshold("no admissible threshold")
        v, negx = max(good)
        return -negx, v

    x_star, _ = incumbent()
    i = int(np.searchsorted(pts, x_star))
    a = pts[max(i - 1, 0)]
    b = pts[min(i + 1, pts.size - 1)]
    spacing = (b - a) / 2 if b > a else 1.0
    scan(grid.between(a, b, spacing))
    x_star, v_star = incumbent()
    return ThresholdOptimum(x_star, v_star)
