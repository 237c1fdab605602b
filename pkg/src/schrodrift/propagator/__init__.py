"""Propagator group, lattices and field I/O."""

from .core import (
    METHODS,
    GuardReport,
    check_guards,
    duhamel_solve,
    lebesgue_norm,
    mixed_norm,
    propagate,
    propagate_many,
    weighted_field,
)
from .grid import GridSpec, WaveField, free_gaussian, gaussian, lattice_forward, lattice_inverse
from .io import read_field, read_field_csv, write_field, write_field_csv
from .transforms import available_backends, default_backend

__all__ = [
    "METHODS", "GuardReport", "check_guards", "duhamel_solve", "lebesgue_norm",
    "mixed_norm", "propagate", "propagate_many", "weighted_field", "GridSpec",
    "WaveField", "free_gaussian", "gaussian", "lattice_forward", "lattice_inverse",
    "available_backends", "default_backend", "read_field", "read_field_csv",
    "write_field", "write_field_csv",
]
