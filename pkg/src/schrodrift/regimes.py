"""Regime classification, large-time growth fits and exponent pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import DomainError, InconclusiveRegimeError
from .gramian import log_volumes
from .structure import analyze_structure

CASE_TAGS = ("Thm1.3-i", "Thm1.3-ii", "Thm1.3-iii", "Thm1.4",
             "anomalous-A", "anomalous-B")
FIT_WINDOW = (50.0, 500.0)
FIT_SAMPLES = 64
FIT_RESIDUAL = 0.15
TIE_MARGIN = 0.25


@dataclass(frozen=True)
class RegimeReport:
    """Which dispersive regime a pair falls in, and why."""

    n: int
    trB: float
    spectrum_summary: la.Spectrum
    case_tag: str
    hypothesis: str
    D: int
    D_infty: float | None = None
    fit_diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "case_tag": self.case_tag,
            "hypothesis": self.hypothesis,
            "D": self.D,
            "D_infty": self.D_infty,
            "trB": self.trB,
            "spectrum": [list(p) for p in self.spectrum_summary.as_pairs()],
            "fit": dict(self.fit_diagnostics),
        }


def fit_growth_exponent(spec, t_lo=FIT_WINDOW[0], t_hi=FIT_WINDOW[1],
                        samples=FIT_SAMPLES, workers=1):
    """Least-squares slope of log V against log t on a log-spaced window.

    Returns
    -------
    (float, float)
        Slope and the largest absolute deviation of log V from the fit.
    """
    if not 0 < t_lo < t_hi:
        raise DomainError(f"need 0 < t_lo < t_hi, got {t_lo}, {t_hi}")
    if samples < 8:
        raise DomainError("at least 8 samples are needed for the fit")
    ts = np.geomspace(t_lo, t_hi, int(samples))
    logv = log_volumes(spec, ts, workers=workers)
    x = np.log(ts)
    slope, icpt = np.polyfit(x, logv, 1)
    resid = float(np.max(np.abs(logv - (slope * x + icpt))))
    return float(slope), resid


def classify(spec, structure=None, tol=None, fit_window=FIT_WINDOW,
             samples=FIT_SAMPLES, residual_threshold=FIT_RESIDUAL,
             tie_margin=TIE_MARGIN, workers=1):
    """Decide the regime of `spec` following the fixed decision order.

    The checks run in order: an eigenvalue off the imaginary axis,
    invertible Q, dilation invariance, degenerate Q with skew-similar B,
    and finally the anomalous case resolved by a large-time fit.

    Raises
    ------
    InconclusiveRegimeError
        If the fit needed for the anomalous case is too noisy.
    """
    if structure is None:
        structure = analyze_structure(spec)
    B = spec.B
    if tol is None:
        tol = la.imaginary_axis_tol(B)
    sp = la.spectrum(B)
    common = dict(n=spec.n, trB=spec.trB, spectrum_summary=sp, D=structure.D)

    if any(abs(v.real) > tol for v in sp.values):
        return RegimeReport(case_tag="Thm1.3-i", hypothesis="A", **common)
    if structure.ranks[0] == spec.n:
        return RegimeReport(case_tag="Thm1.3-ii", hypothesis="A", **common)
    if structure.is_dilation_invariant:
        return RegimeReport(case_tag="Thm1.3-iii", hypothesis="A", **common)

    slope, resid = fit_growth_exponent(spec, fit_window[0], fit_window[1],
                                       samples, workers=workers)
    diag = {"exponent": slope, "residual": resid,
            "window": [float(fit_window[0]), float(fit_window[1])],
            "samples": int(samples), "threshold": residual_threshold}
    if la.is_similar_skew(B, tol, spec=sp):
        return RegimeReport(case_tag="Thm1.4", hypothesis="B",
                            D_infty=float(spec.n), fit_diagnostics=diag, **common)
    if resid > residual_threshold:
        raise InconclusiveRegimeError(
            f"growth fit residual {resid:.3f} exceeds {residual_threshold}", diag)
    if slope >= structure.D - tie_margin:
        return RegimeReport(case_tag="anomalous-A", hypothesis="A",
                            D_infty=slope, fit_diagnostics=diag, **common)
    if slope < 2.0:
        raise InconclusiveRegimeError(
            f"fitted exponent {slope:.3f} is below the guaranteed floor 2", diag)
    return RegimeReport(case_tag="anomalous-B", hypothesis="B",
                        D_infty=slope, fit_diagnostics=diag, **common)


def _dual(p):
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class PairSpec:
    """Exponents (q, r), their duals, beta and the optional q_infty."""

    q: float
    r: float
    q_dual: float
    r_dual: float
    beta: float
    q_infty: float | None = None

    def to_dict(self):
        return {"q": self.q, "r": self.r, "q_dual": self.q_dual,
                "r_dual": self.r_dual, "beta": self.beta, "q_infty": self.q_infty}


def r_upper_bound(D):
    """Largest admissible r (exclusive); infinite when D <= 2."""
    return math.inf if D <= 2 else 2.0 * D / (D - 2.0)


def admissible_pair(D, r, D_infty=None):
    """Pair (q, r) with 2/q = D(1/2 - 1/r).

    Raises
    ------
    DomainError
        If r <= 2 or r >= 2D/(D-2).
    """
    if D < 1:
        raise DomainError(f"D must be positive, got {D}")
    r = float(r)
    bound = r_upper_bound(D)
    if not r > 2.0:
        raise DomainError(f"r must exceed 2, got {r}")
    if not r < bound:
        raise DomainError(f"r = {r} is not below the bound 2D/(D-2) = {bound:g}")
    gap = D * (0.5 - 1.0 / r)
    q = 2.0 / gap if gap > 0 else math.inf
    q_inf = None
    if D_infty is not None:
        q_inf = 2.0 / (float(D_infty) * (0.5 - 1.0 / r))
    return PairSpec(q=q, r=r, q_dual=_dual(q), r_dual=_dual(r),
                    beta=1.0 - gap, q_infty=q_inf)


def strichartz_pair(D, D_infty=None):
    """Diagonal pair q = r = 2(D+2)/D."""
    if D < 2:
        raise DomainError(f"the diagonal pair needs D >= 2, got {D}")
    r = 2.0 * (D + 2) / D
    return admissible_pair(D, r, D_infty)
