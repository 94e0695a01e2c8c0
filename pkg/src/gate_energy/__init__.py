"""Battery energy requirements of quantum gates under energy conservation."""
from . import bounds, emin, fock, gates, metrics
from .bounds import BoundReport, ConstraintFn, GridSpec
from .emin import EminResult
from .fock import Hamiltonian, Pmf, StateVector, DensityMatrix

__version__ = "0.1.0"
