"""Gramian, regime and dispersion toolkit for drift Schroedinger operators.

The operator is ``d_t u - i tr(Q D^2 u) - <Bx, grad u>`` with a constant
positive semidefinite ``Q`` and drift ``B``.
"""

from .errors import (CanonicalFormError, ConsistencyError, DegenerateGramianError,
                     DimensionError, DomainError, GeometryError, HoermanderError,
                     InconclusiveRegimeError, NumericalError, ParseError,
                     RegistryError, ResolutionError, SchrodriftError)
from .gallery import Fixture, all_fixtures, fixture
from .gramian import (GramianSample, OperatorSpec, check_hoermander, gramian_at,
                      gramian_limit, log_volume, volume)
from .propagator import (GridSpec, WaveField, duhamel_solve, gaussian, lebesgue_norm,
                         mixed_norm, propagate, weighted_field)
from .regimes import (PairSpec, RegimeReport, admissible_pair, classify,
                      fit_growth_exponent, strichartz_pair)
from .structure import (StructureReport, analyze_structure, canonical_ranks,
                        homogeneous_dimension, shifted_drift)
from .verification import (SuiteReport, run_dispersive_suite, run_group_suite,
                           run_strichartz_suite, run_volume_suite)

__version__ = "0.1.0"

__all__ = [
    "CanonicalFormError", "ConsistencyError", "DegenerateGramianError", "DimensionError",
    "DomainError", "GeometryError", "HoermanderError", "InconclusiveRegimeError",
    "NumericalError", "ParseError", "RegistryError", "ResolutionError", "SchrodriftError",
    "Fixture", "all_fixtures", "fixture",
    "GramianSample", "OperatorSpec", "check_hoermander", "gramian_at", "gramian_limit",
    "log_volume", "volume",
    "GridSpec", "WaveField", "duhamel_solve", "gaussian", "lebesgue_norm", "mixed_norm",
    "propagate", "weighted_field",
    "PairSpec", "RegimeReport", "admissible_pair", "classify", "fit_growth_exponent",
    "strichartz_pair",
    "StructureReport", "analyze_structure", "canonical_ranks", "homogeneous_dimension",
    "shifted_drift",
    "SuiteReport", "run_dispersive_suite", "run_group_suite", "run_strichartz_suite",
    "run_volume_suite",
]
