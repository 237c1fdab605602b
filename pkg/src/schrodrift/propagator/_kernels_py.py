"""Pure numpy implementation of the direct NUDFT kernel.

Same contract as the compiled ``_kernels.nudft_points``; the sum over
the leading source axis is done as a matrix product so BLAS carries the
O(N^{2n}) work.
"""

import numpy as np

_CHUNK_BYTES = 1 << 26


def nudft_points(coeff, ax0, ax1, ax2, Y, sign):
    coeff = np.asarray(coeff, complex)
    n0, n1, n2 = coeff.shape
    Y = np.asarray(Y, float)
    T = Y.shape[0]
    out = np.empty(T, dtype=complex)
    w = 2j * np.pi * sign
    C = coeff.reshape(n0, n1 * n2)
    chunk = max(1, _CHUNK_BYTES // (16 * max(n0, n1 * n2)))
    for lo in range(0, T, chunk):
        y = Y[lo:lo + chunk]
        E0 = np.exp(w * np.outer(y[:, 0], ax0))
        R = (E0 @ C).reshape(-1, n1, n2)
        if n2 > 1:
            E2 = np.exp(w * np.outer(y[:, 2], ax2))
            R = np.einsum("tjk,tk->tj", R, E2)
        else:
            R = R[:, :, 0]
        if n1 > 1:
            E1 = np.exp(w * np.outer(y[:, 1], ax1))
            out[lo:lo + chunk] = np.einsum("tj,tj->t", R, E1)
        else:
            out[lo:lo + chunk] = R[:, 0]
    return out
