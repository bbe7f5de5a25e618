"""Exact moments, bounds and Monte Carlo spectra for sums of random product states."""

from .errors import DomainError, NumericError, ResourceGuardError
from .moments import MomentKind, MomentQuery, MomentResult, ensemble_moment, moment, repeated_moment, string_moment
from .reduction import ReductionClass, classify, reduce
from .simulation import EnsembleKind, EnsembleSpec, run_trials, spectrum
from .words import SetPartitionString, enumerate_partitions

__version__ = "0.1.0"

__all__ = [
    "DomainError", "NumericError", "ResourceGuardError",
    "MomentKind", "MomentQuery", "MomentResult", "ensemble_moment", "moment", "repeated_moment", "string_moment",
    "ReductionClass", "classify", "reduce",
    "EnsembleKind", "EnsembleSpec", "run_trials", "spectrum",
    "SetPartitionString", "enumerate_partitions",
]
