"""Battery-energy bounds for single-mode displacement and squeezing gates.

The oscillator Hamiltonian is ``sum_n (n + 1/2)|n><n|`` (hbar*omega = 1).
Thresholds are placed on half-integers: the truncation cut ``n + 1/2 <= ebar``
(or ``n <= ebar - 3/2`` for the Poisson bound) only changes membership there,
and between two such points the objectives only decrease.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import pdtr

from . import fock
from .bounds import BoundReport, ConstraintFn, GridSpec, NoAdmissibleThreshold, optimize_threshold
from .fock import Pmf, TruncationError

PMF_TAIL_CAP = 1e-8
INPUT_KINDS = ("number", "coherent", "squeezed")
_ALIASES = {"sn": "number", "sc": "coherent", "sq": "squeezed"}


class NoEnergyGain(ValueError):
    pass


class OutsideAsymptoticRegime(ValueError):
    pass


# ---------------------------------------------------------------------------
# Cases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DisplacementCase:
    z: complex
    E: float
    eps: float

    def __post_init__(self):
        if not self.E > 0.5:
            raise ValueError("displacement case needs E > 1/2")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.z == 0:
            raise ValueError("z must be non-zero")


@dataclass(frozen=True)
class SqueezingCase:
    xi: float
    E: float
    eps: float
    input_kind: str = "coherent"

    def __post_init__(self):
        kind = _ALIASES.get(self.input_kind, self.input_kind)
        if kind not in INPUT_KINDS:
            raise ValueError(f"unknown input kind {self.input_kind!r}")
        object.__setattr__(self, "input_kind", kind)
        if not self.xi > 0:
            raise ValueError("xi must be positive")
        if not self.E >= 0.5:
            raise ValueError("E must be at least the vacuum energy 1/2")
        if kind == "coherent" and self.E <= 0.5:
            raise ValueError("coherent probe needs E > 1/2")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")

    @property
    def number_level(self) -> int:
        return int(math.floor(self.E - 0.5))

    @property
    def input_energy(self) -> float:
        if self.input_kind == "number":
            return self.number_level + 0.5
        return self.E


# ---------------------------------------------------------------------------
# Constraint functions and energy ratios
# ---------------------------------------------------------------------------

def f_displacement(E: float, z: complex) -> float:
    if E < 0:
        raise ValueError("E must be non-negative")
    return (math.sqrt(E) + abs(z)) ** 2


def f_squeezing(E: float, xi: float) -> float:
    if E < 0:
        raise ValueError("E must be non-negative")
    return math.exp(2 * xi) * E


def nu_ratio(E: float, z: complex) -> float:
    """Output/input energy ratio of a coherent probe aligned with ``z``."""
    if E <= 0.5:
        raise ValueError("E must exceed 1/2")
    r = abs(z)
    return (E + r * r + 2 * r * math.sqrt(E - 0.5)) / E


def poisson_cdf(mean: float, k) -> float:
    """``P(N <= k)`` for ``N ~ Poisson(mean)``; zero for ``k < 0``."""
    k = math.floor(k)
    if k < 0:
        return 0.0
    if mean == 0:
        return 1.0
    return float(pdtr(k, mean))


def _cut(ebar: float, shift: float) -> int:
    # largest n with n <= ebar - shift
    return math.floor(ebar - shift + 1e-9)


# ---------------------------------------------------------------------------
# Displacement
# ---------------------------------------------------------------------------

def displacement_threshold_set(case: DisplacementCase) -> float:
    """Smallest half-integer threshold in the admissible set.

    Membership ``nu * P(N <= ebar - 3/2) >= 1`` with ``N ~ Poisson(nu E)``;
    the predicate is monotone so the set is ``[ebar_min, inf)``.
    """
    nu = nu_ratio(case.E, case.z)
    if nu <= 1:
        raise NoEnergyGain("gate does not gain energy")
    mean = nu * case.E
    k = 0
    while nu * poisson_cdf(mean, k) < 1:
        k += 1
    return k + 1.5


def _ratio_factor(case: DisplacementCase, ratio: str) -> float:
    nu = nu_ratio(case.E, case.z)
    if ratio == "constraint":
        return 1.0 + f_displacement(case.E, case.z) / case.E
    if ratio == "nu":
        return 1.0 + 2.0 * nu
    raise ValueError(f"unknown ratio mode {ratio!r}")


def displacement_objective(case: DisplacementCase, ebar: float, ratio: str = "constraint"):
    nu = nu_ratio(case.E, case.z)
    a = _ratio_factor(case, ratio)
    s = poisson_cdf(nu * case.E, _cut(ebar, 1.5))
    root = math.sqrt(case.eps)
    t1 = case.E ** 2 / (2 * a * ebar * root) * (nu * s - 1) ** 2
    t2 = a * root * ebar / 2
    return t1, t2, s


def displacement_bound(case: DisplacementCase, ratio: str = "constraint",
                       grid: Optional[GridSpec] = None) -> BoundReport:
    """Displacement battery bound maximized over admissible thresholds.

    ``ratio`` selects the factor in ``eps' = a sqrt(eps)``: ``"constraint"``
    uses ``a = 1 + f(E)/E`` with the displacement constraint function,
    ``"nu"`` uses the looser ``a = 1 + 2 nu``.
    """
    nu = nu_ratio(case.E, case.z)
    a = _ratio_factor(case, ratio)
    e_min = displacement_threshold_set(case)
    if grid is None:
        grid = GridSpec(e_min, max(50 * max(nu * case.E, case.E), e_min + 1), step=1.0, offset=0.5)

    def objective(eb):
        t1, t2, _ = displacement_objective(case, eb, ratio)
        return t1 - t2

    opt = optimize_threshold(objective, lambda eb: eb >= e_min - 1e-12, grid)
    t1, t2, s = displacement_objective(case, opt.ebar, ratio)
    mean = nu * case.E
    n = np.arange(_cut(opt.ebar, 0.5) + 1)
    exact_trunc = float(np.sum((n + 0.5) * np.exp(n * math.log(mean) - mean
                                                  - np.array([math.lgamma(k + 1) for k in n]))))
    return BoundReport(
        bound=t1 - t2, eps_prime=a * math.sqrt(case.eps), ebar_used=opt.ebar,
        truncated_output_energy=nu * case.E * s, input_energy=case.E,
        m_optimal="continuous-relaxed",
        components=(("gain_term", t1), ("threshold_penalty", -t2)),
        extras={"nu": nu, "poisson_cdf": s, "ratio_factor": a, "ratio_mode": ratio,
                "ebar_min": e_min, "exact_truncated_output_energy": exact_trunc})


def displacement_bound_asymptotic(case: DisplacementCase, ratio: str = "constraint") -> BoundReport:
    """Closed form obtained with the threshold ``ebar = E ln(1/eps)``.

    Valid once ``P(N <= ebar - 3/2) >= (nu + 1)/(2 nu)``. The largest such
    ``eps`` on a 20-per-decade log grid is reported as ``eps0``.
    """
    nu = nu_ratio(case.E, case.z)
    if nu <= 1:
        raise NoEnergyGain("gate does not gain energy")
    a = _ratio_factor(case, ratio)
    need = (nu + 1) / (2 * nu)
    mean = nu * case.E

    def holds(eps):
        return poisson_cdf(mean, _cut(case.E * math.log(1 / eps), 1.5)) >= need

    if not holds(case.eps):
        raise OutsideAsymptoticRegime(
            f"P(N <= E ln(1/eps) - 3/2) below (nu+1)/(2nu) at eps={case.eps:g}")
    L = math.log(1 / case.eps)
    root = math.sqrt(case.eps)
    pre = case.E / (L * root)
    t1 = pre * (nu - 1) ** 2 / (9 * a)
    t2 = pre * a * case.eps * L ** 2 / 2
    eps0 = None
    for k in range(1, 20 * 40):
        e = 10 ** (-k / 20)
        if holds(e):
            eps0 = e
            break
    return BoundReport(
        bound=t1 - t2, eps_prime=a * root, ebar_used=case.E * L,
        truncated_output_energy=mean * poisson_cdf(mean, _cut(case.E * L, 1.5)),
        input_energy=case.E, m_optimal="continuous-relaxed",
        components=(("gain_term", t1), ("threshold_penalty", -t2)),
        extras={"nu": nu, "eps0": eps0, "ratio_factor": a, "cdf_required": need})


# ---------------------------------------------------------------------------
# Squeezing: output photon statistics
# ---------------------------------------------------------------------------

def _grow(build, dim: int, cap: float, limit: int = 1 << 14) -> Pmf:
    while True:
        amps = build(dim)
        p = np.abs(amps) ** 2
        tail = 1.0 - float(np.sum(p))
        if tail <= cap:
            return Pmf(p, max(tail, 0.0))
        if dim >= limit:
            raise TruncationError(f"pmf tail {tail:.3g} still above {cap:g} at dim {dim}",
                                  required_dim=None)
        dim *= 2


def squeezed_number_pmf(xi: float, l: int, tail_cap: float = PMF_TAIL_CAP) -> Pmf:
    """``|<n|S(xi)|l>|^2`` from the closed-form amplitudes."""
    start = fock.truncation_dim(max(l, math.exp(2 * xi) * (l + 0.5)))

    def build(dim):
        return np.array([fock.squeeze_amplitude(xi, l, n) for n in range(dim)])

    return _grow(build, max(start, l + 1), tail_cap)


def squeezed_vacuum_pmf(xi: float, E: float, tail_cap: float = PMF_TAIL_CAP) -> Pmf:
    """Squeezed input of energy ``E`` squeezed further by ``xi``."""
    if 2 * E < 1:
        raise ValueError("squeezed input needs E >= 1/2")
    r = xi + 0.5 * math.acosh(2 * E)
    start = fock.truncation_dim(math.exp(2 * xi) * E)
    return _grow(lambda dim: fock.squeezed_vacuum_amplitudes(r, dim), start, tail_cap)


def squeezed_coherent_pmf(xi: float, E: float, variant: str = "phase",
                          tail_cap: float = PMF_TAIL_CAP) -> Pmf:
    """Squeezed coherent input of energy ``E``.

    ``variant="phase"`` feeds ``|i sqrt(E - 1/2)>`` (coherent phase pi/2).
    ``variant="printed"`` weights the squeezing amplitudes with the real,
    non-negative Poisson amplitudes ``sqrt((E-1/2)^m e^{-(E-1/2)}/m!)``,
    which is the phase-0 probe.
    """
    if E <= 0.5:
        raise ValueError("coherent probe needs E > 1/2")
    mag = math.sqrt(E - 0.5)
    if variant == "phase":
        alpha = 1j * mag
    elif variant == "printed":
        alpha = mag
    else:
        raise ValueError(f"unknown variant {variant!r}")
    probe = fock.coherent_state(alpha, tail_cap=1e-14)
    c = np.asarray(probe.amplitudes)
    start = fock.truncation_dim(max(E, math.exp(2 * xi) * E))

    def build(dim):
        return fock.squeeze_amplitudes(xi, dim, c.size) @ c

    return _grow(build, start, tail_cap)


def output_pmf(case: SqueezingCase, coherent_variant: str = "phase") -> Pmf:
    if case.input_kind == "number":
        return squeezed_number_pmf(case.xi, case.number_level)
    if case.input_kind == "coherent":
        return squeezed_coherent_pmf(case.xi, case.E, coherent_variant)
    return squeezed_vacuum_pmf(case.xi, case.E)


def _squeeze_factor(xi: float, prefactor: str) -> float:
    if prefactor == "printed":
        return 1.0 + math.cosh(2 * xi)
    if prefactor == "text":
        return 1.0 + math.exp(2 * xi)
    raise ValueError(f"unknown prefactor {prefactor!r}")


def squeezing_bound(case: SqueezingCase, prefactor: str = "printed",
                    coherent_variant: str = "phase",
                    grid: Optional[GridSpec] = None) -> BoundReport:
    """Squeezing battery bound for one probe family, maximized over thresholds.

    The per-mode truncated output energy is ``sum_{n + 1/2 <= ebar} (n + 1/2) P(n)``
    and a threshold is admissible when it exceeds the input energy.
    ``prefactor`` picks ``1 + cosh(2 xi)`` (``"printed"``) or
    ``1 + exp(2 xi)`` (``"text"``).
    """
    pmf = output_pmf(case, coherent_variant)
    p = np.asarray(pmf.probs)
    level = np.arange(p.size) + 0.5
    cum = np.cumsum(level * p)
    mean_out = float(cum[-1])
    e_in = case.input_energy
    a = _squeeze_factor(case.xi, prefactor)
    root = math.sqrt(case.eps)

    def trunc(eb):
        k = _cut(eb, 0.5)
        if k < 0:
            return 0.0
        return float(cum[min(k, cum.size - 1)])

    def terms(eb):
        t1 = (trunc(eb) - e_in) ** 2 / (2 * a * root * eb)
        t2 = a * root * eb / 2
        return t1, t2

    if grid is None:
        grid = GridSpec(max(e_in, 0.5), 50 * max(mean_out, case.E), step=1.0, offset=0.5)
    opt = optimize_threshold(lambda eb: terms(eb)[0] - terms(eb)[1],
                             lambda eb: trunc(eb) > e_in, grid)
    t1, t2 = terms(opt.ebar)
    return BoundReport(
        bound=t1 - t2, eps_prime=a * root, ebar_used=opt.ebar,
        truncated_output_energy=trunc(opt.ebar), input_energy=e_in,
        m_optimal="continuous-relaxed",
        components=(("gain_term", t1), ("threshold_penalty", -t2)),
        extras={"mean_output_energy": mean_out, "pmf_tail": pmf.tail_mass,
                "prefactor": prefactor, "prefactor_value": a,
                "coherent_variant": coherent_variant, "input_kind": case.input_kind,
                "feasibility_cut": "n <= ebar - 1/2"})


__all__ = [
    "DisplacementCase", "SqueezingCase", "NoEnergyGain", "OutsideAsymptoticRegime",
    "NoAdmissibleThreshold", "ConstraintFn", "f_displacement", "f_squeezing", "nu_ratio",
    "poisson_cdf", "displacement_threshold_set", "displacement_bound",
    "displacement_bound_asymptotic", "squeezed_number_pmf", "squeezed_coherent_pmf",
    "squeezed_vacuum_pmf", "output_pmf", "squeezing_bound",
]
