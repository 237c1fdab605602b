"""Dense matrix kernels: exponential, rank, spectrum and definiteness tests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError

DEFAULT_RANK_TOL = 1e-9
CLUSTER_TOL = 1e-7

# Pade numerator coefficients b_k for degrees 3, 5, 7, 9, 13 and the
# 1-norm thresholds below which each degree is accurate to unit roundoff
# (Higham, SIAM J. Matrix Anal. Appl. 26, 2005).
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0,
        56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
        30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}
_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


def as_square(M, name="matrix"):
    """Return `M` as a finite 2-D float array, raising if it is not square."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericalError(f"{name} has non-finite entries")
    return A


def _pade_uv(A, m):
    b = _PADE[m]
    n = A.shape[0]
    ident = np.eye(n, dtype=A.dtype)
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
        return U, V
    # low degrees: accumulate even powers directly
    powers = [ident, A2]
    while len(powers) < (m + 1) // 2:
        powers.append(powers[-1] @ A2)
    U_inner = sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
    V = sum(b[2 * k] * powers[k] for k in range(len(powers)))
    return A @ U_inner, V


def expm(M, s=1.0):
    """Matrix exponential e^{sM} by scaling and squaring.

    Uses the diagonal Pade approximant of the lowest degree whose
    backward-error bound covers ``||sM||_1``; larger arguments are scaled
    by a power of two and squared back.

    Parameters
    ----------
    M : array_like, shape (n, n)
        Real or complex square matrix.
    s : float
        Time factor.

    Returns
    -------
    ndarray
        ``exp(s * M)``.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expm needs a square matrix, got shape {M.shape}")
    if not math.isfinite(s):
        raise DimensionError("time factor must be finite")
    dtype = complex if np.iscomplexobj(M) else float
    A = np.asarray(M, dtype=dtype) * s
    n = A.shape[0]
    if n == 0:
        return A.copy()
    norm = np.linalg.norm(A, 1)
    if not math.isfinite(norm):
        raise NumericalError("expm argument has non-finite entries")
    if norm == 0.0:
        return np.eye(n, dtype=dtype)
    squarings = 0
    for m in (3, 5, 7, 9):
        if norm <= _THETA[m]:
            break
    else:
        m = 13
        squarings = max(0, int(math.ceil(math.log2(norm / _THETA[13]))))
        A = A / (2.0 ** squarings)
    U, V = _pade_uv(A, m)
    try:
        R = np.linalg.solve(V - U, V + U)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Pade denominator singular: {exc}") from exc
    for _ in range(squarings):
        R = R @ R
    return R


def numerical_rank(M, rel_tol=DEFAULT_RANK_TOL):
    """Number of singular values above ``rel_tol * sigma_max``."""
    if not 0.0 < rel_tol < 1.0:
        raise DimensionError("rel_tol must lie in (0, 1)")
    A = np.atleast_2d(np.asarray(M))
    if A.size == 0:
        return 0
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > rel_tol * sv[0]))


@dataclass(frozen=True)
class Spectrum:
    """Distinct eigenvalues with algebraic and geometric multiplicities."""

    values: tuple
    algebraic: tuple
    geometric: tuple

    @property
    def n(self):
        return int(sum(self.algebraic))

    def eigenvalues(self):
        """All eigenvalues repeated by algebraic multiplicity."""
        out = []
        for lam, k in zip(self.values, self.algebraic):
            out.extend([lam] * k)
        return np.array(out, dtype=complex)

    def max_real(self):
        return max(v.real for v in self.values)

    def as_pairs(self):
        """List of ``(re, im, algebraic, geometric)`` tuples."""
        return [(float(v.real), float(v.imag), int(a), int(g))
                for v, a, g in zip(self.values, self.algebraic, self.geometric)]


def _cluster(eigs, tol):
    # single-linkage clustering on the complex plane
    order = np.argsort(eigs.real + 1e-3 * eigs.imag)
    eigs = eigs[order]
    labels = -np.ones(len(eigs), dtype=int)
    nclusters = 0
    for i in range(len(eigs)):
        if labels[i] >= 0:
            continue
        labels[i] = nclusters
        stack = [i]
        while stack:
            j = stack.pop()
            close = np.flatnonzero((labels < 0) & (np.abs(eigs - eigs[j]) <= tol))
            labels[close] = nclusters
            stack.extend(close.tolist())
        nclusters += 1
    return [eigs[labels == c] for c in range(nclusters)]


def spectrum(M, rel_tol=DEFAULT_RANK_TOL, cluster_tol=CLUSTER_TOL):
    """Eigenvalues of a real square matrix with multiplicities.

    Eigenvalues closer than ``cluster_tol * (1 + ||M||_2)`` are merged and
    represented by their mean, which is far more accurate than the
    individual members for defective eigenvalues. Geometric multiplicity
    is ``n - rank(M - lambda I)`` at the same rank tolerance used elsewhere.
    """
    A = as_square(M)
    n = A.shape[0]
    try:
        eigs = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    scale = 1.0 + np.linalg.norm(A, 2)
    tol = cluster_tol * scale
    groups = _cluster(np.asarray(eigs, dtype=complex), tol)
    reps = [complex(np.mean(g)) for g in groups]
    # enforce conjugate symmetry of the representatives
    fixed = []
    for lam in reps:
        if abs(lam.imag) <= tol:
            lam = complex(lam.real, 0.0)
        else:
            partner = min(reps, key=lambda mu: abs(mu - lam.conjugate()))
            avg = 0.5 * (lam + partner.conjugate())
            lam = avg
        fixed.append(lam)
    alg = [len(g) for g in groups]
    geo = []
    for lam, a in zip(fixed, alg):
        shifted = A - lam * np.eye(n) if lam.imag else A - lam.real * np.eye(n)
        g = n - numerical_rank(shifted, rel_tol)
        geo.append(int(min(max(g, 1), a)))
    order = sorted(range(len(fixed)), key=lambda i: (fixed[i].real, fixed[i].imag))
    return Spectrum(
        values=tuple(fixed[i] for i in order),
        algebraic=tuple(alg[i] for i in order),
        geometric=tuple(geo[i] for i in order),
    )


def imaginary_axis_tol(M, rel=1e-8):
    """Default tolerance for deciding that an eigenvalue is purely imaginary."""
    return rel * (1.0 + np.linalg.norm(np.asarray(M, dtype=float), 2))


def is_similar_skew(M, tol=None, spec=None):
    """True when `M` is diagonalizable with purely imaginary spectrum."""
    A = as_square(M)
    if tol is None:
        tol = imaginary_axis_tol(A)
    sp = spec if spec is not None else spectrum(A)
    if any(abs(v.real) > tol for v in sp.values):
        return False
    return all(g == a for g, a in zip(sp.geometric, sp.algebraic))


def psd_sqrt(S, rel_tol=1e-12):
    """Symmetric square root of a positive semidefinite matrix.

    Eigenvalues below ``rel_tol * max_eig`` in absolute value (and any
    small negative ones produced by rounding) are clamped to zero.
    """
    A = as_square(S)
    A = 0.5 * (A + A.T)
    w, U = np.linalg.eigh(A)
    top = max(float(np.max(np.abs(w))), 0.0) if w.size else 0.0
    w = np.where(w > rel_tol * top, w, 0.0)
    return (U * np.sqrt(w)) @ U.T


def min_eig_ratio(S):
    """Smallest eigenvalue of symmetric `S` divided by its spectral norm."""
    A = 0.5 * (np.asarray(S, float) + np.asarray(S, float).T)
    w = np.linalg.eigvalsh(A)
    top = np.max(np.abs(w))
    return float(w[0] / top) if top > 0 else 0.0


def cholesky_logdet(S):
    """Log-determinant of a symmetric positive definite matrix.

    The matrix is equilibrated by its diagonal before factoring so that
    graded matrices with wildly different diagonal scales still factor.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the equilibrated matrix is not positive definite.
    """
    A = 0.5 * (np.asarray(S, float) + np.asarray(S, float).T)
    d = np.diag(A)
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise np.linalg.LinAlgError("non-positive diagonal entry")
    r = np.sqrt(d)
    C = A / np.outer(r, r)
    L = np.linalg.cholesky(C)
    return float(2.0 * np.sum(np.log(np.diag(L))) + 2.0 * np.sum(np.log(r)))
