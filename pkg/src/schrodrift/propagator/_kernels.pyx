# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled direct NUDFT from a tensor lattice to scattered points.

    out[t] = sum_k c[k] exp(sign * 2 pi i <s_k, y_t>)

with s_k ranging over the tensor product of up to three axes. Lower
dimensions are passed with singleton axes. Targets are processed in
blocks of TB so the innermost loop runs over independent accumulators
and vectorizes.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, M_PI

cnp.import_array()

cdef enum:
    TB = 16


def nudft_points(double complex[:, :, ::1] coeff,
                 double[::1] ax0, double[::1] ax1, double[::1] ax2,
                 double[:, ::1] Y, int sign):
    cdef Py_ssize_t n0 = coeff.shape[0], n1 = coeff.shape[1], n2 = coeff.shape[2]
    cdef Py_ssize_t T = Y.shape[0]
    cdef Py_ssize_t t0, nb, i, j, k, b
    cdef double w = 2.0 * M_PI * sign
    cdef double ph, vr, vi, xr, xi
    cdef double[:, :, ::1] cre = np.ascontiguousarray(np.real(coeff))
    cdef double[:, :, ::1] cim = np.ascontiguousarray(np.imag(coeff))
    cdef double[:, ::1] f0r = np.zeros((n0, TB)), f0i = np.zeros((n0, TB))
    cdef double[:, ::1] f1r = np.zeros((n1, TB)), f1i = np.zeros((n1, TB))
    cdef double[:, ::1] f2r = np.zeros((n2, TB)), f2i = np.zeros((n2, TB))
    cdef double ar[TB]
    cdef double ai[TB]
    cdef double br[TB]
    cdef double bi[TB]
    cdef double cr[TB]
    cdef double ci[TB]
    cdef double complex[::1] out = np.empty(T, dtype=np.complex128)

    for t0 in range(0, T, TB):
        nb = TB if t0 + TB <= T else T - t0
        for b in range(TB):
            for i in range(n0):
                if b < nb:
                    ph = w * ax0[i] * Y[t0 + b, 0]
                    f0r[i, b] = cos(ph)
                    f0i[i, b] = sin(ph)
                else:
                    f0r[i, b] = 0.0
                    f0i[i, b] = 0.0
            for j in range(n1):
                if b < nb:
                    ph = w * ax1[j] * Y[t0 + b, 1]
                    f1r[j, b] = cos(ph)
                    f1i[j, b] = sin(ph)
            for k in range(n2):
                if b < nb:
                    ph = w * ax2[k] * Y[t0 + b, 2]
                    f2r[k, b] = cos(ph)
                    f2i[k, b] = sin(ph)
            ar[b] = 0.0
            ai[b] = 0.0
        for i in range(n0):
            for b in range(TB):
                br[b] = 0.0
                bi[b] = 0.0
            for j in range(n1):
                if n2 == 1:
                    vr = cre[i, j, 0]
                    vi = cim[i, j, 0]
                    if ax2[0] != 0.0:
                        for b in range(TB):
                            cr[b] = vr * f2r[0, b] - vi * f2i[0, b]
                            ci[b] = vr * f2i[0, b] + vi * f2r[0, b]
                    else:
                        for b in range(TB):
                            cr[b] = vr
                            ci[b] = vi
                else:
                    for b in range(TB):
                        cr[b] = 0.0
                        ci[b] = 0.0
                    for k in range(n2):
                        vr = cre[i, j, k]
                        vi = cim[i, j, k]
                        for b in range(TB):
                            cr[b] += vr * f2r[k, b] - vi * f2i[k, b]
                            ci[b] += vr * f2i[k, b] + vi * f2r[k, b]
                for b in range(TB):
                    xr = f1r[j, b]
                    xi = f1i[j, b]
                    br[b] += cr[b] * xr - ci[b] * xi
                    bi[b] += cr[b] * xi + ci[b] * xr
            for b in range(TB):
                xr = f0r[i, b]
                xi = f0i[i, b]
                ar[b] += br[b] * xr - bi[b] * xi
                ai[b] += br[b] * xi + bi[b] * xr
        for b in range(nb):
            out[t0 + b] = ar[b] + 1j * ai[b]
    return np.asarray(out)
