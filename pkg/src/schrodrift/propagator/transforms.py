"""Off-lattice Fourier sums used by every propagation method.

All methods reduce to

    out[x] = sum_k c[k] exp(sign * 2 pi i <s_k, M x>)

for tensor lattices ``s`` (source) and ``x`` (target) and an n x n
matrix ``M``. When ``M`` is triangular up to a permutation of axes the
sum factorizes and is contracted one source axis at a time at cost
O(n N^{n+1}); otherwise the direct O(N^{2n}) kernel runs, compiled when
the extension is available.
"""

from __future__ import annotations

import itertools
import os
import string

import numpy as np

from . import _kernels_py

try:
    if os.environ.get("SCHRODRIFT_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

ZERO_TOL = 1e-14


def available_backends():
    return ("compiled", "python") if _compiled is not None else ("python",)


def default_backend():
    return "compiled" if _compiled is not None else "python"


def nudft_points(coeff, axes, Y, sign, backend=None):
    """Direct sum from a tensor lattice to scattered points ``Y`` (T x n)."""
    # the compiled kernel takes writable buffers; fields are frozen
    coeff = np.array(coeff, dtype=complex, order="C")
    n = coeff.ndim
    Y = np.asarray(Y, float).reshape(-1, n)
    pad = 3 - n
    c3 = coeff.reshape(coeff.shape + (1,) * pad)
    ax = [np.ascontiguousarray(a, float) for a in axes] + [np.zeros(1)] * pad
    Y3 = np.ascontiguousarray(np.hstack([Y, np.zeros((Y.shape[0], pad))]))
    backend = backend or default_backend()
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return _compiled.nudft_points(c3, ax[0], ax[1], ax[2], Y3, int(sign))
    if backend != "python":
        raise ValueError(f"unknown backend {backend!r}")
    return _kernels_py.nudft_points(c3, ax[0], ax[1], ax[2], Y3, int(sign))


def triangular_order(M, tol=ZERO_TOL):
    """Order of source axes that lets the sum factorize, or ``None``.

    Contracting source axis p couples the target axes in the support of
    row p of M; the order is valid when after i steps at most i target
    axes have been touched.
    """
    M = np.asarray(M, float)
    n = M.shape[0]
    scale = max(np.max(np.abs(M)), 1e-300)
    supp = [frozenset(np.flatnonzero(np.abs(M[p]) > tol * scale)) for p in range(n)]
    for perm in itertools.permutations(range(n)):
        seen = set()
        ok = True
        for i, p in enumerate(perm, start=1):
            seen |= supp[p]
            if len(seen) > i:
                ok = False
                break
        if ok:
            return perm, supp
    return None, supp


def _contract_triangular(coeff, src_axes, M, tgt_axes, sign, order, supp):
    n = coeff.ndim
    w = 2j * np.pi * sign
    src_l = string.ascii_lowercase[:n]
    tgt_l = string.ascii_uppercase[:n]
    T = np.asarray(coeff, complex)
    labels = list(src_l)
    for p in order:
        # multiply by factors of target axes already present
        for q in sorted(supp[p]):
            if tgt_l[q] in labels:
                fac = np.exp(w * M[p, q] * np.outer(src_axes[p], tgt_axes[q]))
                spec = f"{''.join(labels)},{src_l[p]}{tgt_l[q]}->{''.join(labels)}"
                T = np.einsum(spec, T, fac)
        new = [q for q in sorted(supp[p]) if tgt_l[q] not in labels]
        out_labels = [c for c in labels if c != src_l[p]]
        if new:
            q = new[0]
            fac = np.exp(w * M[p, q] * np.outer(src_axes[p], tgt_axes[q]))
            out_labels = out_labels + [tgt_l[q]]
            spec = f"{''.join(labels)},{src_l[p]}{tgt_l[q]}->{''.join(out_labels)}"
            T = np.einsum(spec, T, fac, optimize=True)
        else:
            T = T.sum(axis=labels.index(src_l[p]))
        labels = out_labels
    missing = [tgt_l[q] for q in range(n) if tgt_l[q] not in labels]
    for c in missing:
        # target axis not coupled to any source axis: constant along it
        T = np.expand_dims(T, -1) * np.ones(len(tgt_axes[tgt_l.index(c)]))
        labels.append(c)
    perm = [labels.index(tgt_l[q]) for q in range(n)]
    return np.transpose(T, perm)


def lattice_sum(coeff, src_axes, M, tgt_axes, sign, backend=None, fast=True):
    """Evaluate ``sum_k c_k exp(sign 2 pi i <s_k, M x>)`` on the target lattice."""
    M = np.asarray(M, float)
    coeff = np.asarray(coeff, complex)
    n = coeff.ndim
    if M.shape != (n, n):
        raise ValueError(f"matrix shape {M.shape} does not match {n} axes")
    if fast:
        order, supp = triangular_order(M)
        if order is not None:
            return _contract_triangular(coeff, src_axes, M, tgt_axes, sign, order, supp)
    X = np.stack([g.ravel() for g in np.meshgrid(*tgt_axes, indexing="ij")], axis=1)
    Y = X @ M.T
    out = nudft_points(coeff, src_axes, Y, sign, backend=backend)
    return out.reshape(tuple(len(a) for a in tgt_axes))
