"""Canonical block ranks, homogeneous dimension and the shifted drift."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .errors import CanonicalFormError, DimensionError
from .gramian import krylov_rank_profile

ZERO_BLOCK_TOL = 1e-10


@dataclass(frozen=True)
class StructureReport:
    """Stratification data of a pair in canonical block layout.

    ``dilation_weights`` holds the exponent 2j+1 of every coordinate, so
    that the dilation is ``diag(lam ** w)``; ``block_weights`` holds one
    entry per block.
    """

    ranks: tuple
    D: int
    dilation_weights: tuple
    block_weights: tuple
    B_bar: np.ndarray
    is_dilation_invariant: bool

    @property
    def n(self):
        return int(sum(self.ranks))

    @property
    def r(self):
        return len(self.ranks) - 1

    def dilation(self, lam):
        """Diagonal of the dilation delta_lambda."""
        return float(lam) ** np.asarray(self.dilation_weights, dtype=float)


def canonical_ranks(spec, rel_tol=la.DEFAULT_RANK_TOL):
    """Krylov increments p_j = rank K_j - rank K_{j-1}.

    Raises
    ------
    CanonicalFormError
        If the increments are not positive, non-increasing and summing to n.
    """
    if rel_tol == spec.hoermander.rel_tol:
        profile = spec.hoermander.krylov_ranks
    else:
        profile = krylov_rank_profile(spec.Q, spec.B, rel_tol)
    incs = []
    prev = 0
    for r in profile:
        if r == prev:
            break
        incs.append(r - prev)
        prev = r
    n = spec.n
    if sum(incs) != n or any(p <= 0 for p in incs):
        raise CanonicalFormError(f"rank increments {incs} do not sum to n={n}")
    if any(a < b for a, b in zip(incs, incs[1:])):
        raise CanonicalFormError(f"rank increments {incs} are not non-increasing")
    return tuple(int(p) for p in incs)


def homogeneous_dimension(ranks):
    """D = sum_j (2j+1) p_j."""
    ranks = list(ranks)
    if not ranks or any(p <= 0 for p in ranks):
        raise DimensionError(f"ranks must be non-empty and positive, got {ranks}")
    if any(a < b for a, b in zip(ranks, ranks[1:])):
        raise DimensionError(f"ranks must be non-increasing, got {ranks}")
    return int(sum((2 * j + 1) * p for j, p in enumerate(ranks)))


def block_offsets(ranks):
    return np.concatenate([[0], np.cumsum(ranks)]).astype(int)


def shifted_drift(spec, ranks, rel_tol=ZERO_BLOCK_TOL):
    """Keep the subdiagonal blocks B_j of B and zero every other block.

    Returns
    -------
    (ndarray, bool)
        The matrix B_bar and whether B equals it within
        ``rel_tol * (1 + ||B||_F)``.
    """
    ranks = [int(p) for p in ranks]
    if sum(ranks) != spec.n or any(p <= 0 for p in ranks):
        raise DimensionError(f"ranks {ranks} inconsistent with n={spec.n}")
    off = block_offsets(ranks)
    B = np.asarray(spec.B)
    Bbar = np.zeros_like(B)
    for j in range(1, len(ranks)):
        rows = slice(off[j], off[j + 1])
        cols = slice(off[j - 1], off[j])
        Bbar[rows, cols] = B[rows, cols]
    gap = np.linalg.norm(B - Bbar)
    return Bbar, bool(gap <= rel_tol * (1.0 + np.linalg.norm(B)))


def analyze_structure(spec, rel_tol=la.DEFAULT_RANK_TOL, zero_tol=ZERO_BLOCK_TOL):
    """Full StructureReport for a canonical-layout spec."""
    ranks = canonical_ranks(spec, rel_tol)
    D = homogeneous_dimension(ranks)
    Bbar, inv = shifted_drift(spec, ranks, zero_tol)
    Bbar.setflags(write=False)
    block_w = tuple(2 * j + 1 for j in range(len(ranks)))
    coord_w = tuple(w for w, p in zip(block_w, ranks) for _ in range(p))
    return StructureReport(ranks=ranks, D=D, dilation_weights=coord_w,
                           block_weights=block_w, B_bar=Bbar,
                           is_dilation_invariant=inv)


def shifted_spec(spec, report=None):
    """OperatorSpec of the dilation-invariant model (Q, B_bar)."""
    if report is None:
        report = analyze_structure(spec)
    label = f"{spec.label}-bar" if spec.label else "bar"
    return spec.with_drift(report.B_bar, label=label)
