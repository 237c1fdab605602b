"""Periodic lattices, sampled fields and lattice Fourier transforms.

Conventions: ``x_k = -L + k h`` with ``h = 2L/N`` and ``xi_m = m/(2L)``
for ``m in [-N/2, N/2)``; the transform is ``phi_hat(xi) =
int phi(x) e^{-2 pi i <xi, x>} dx`` discretized by the Riemann sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError


@dataclass(frozen=True)
class GridSpec:
    """Tensor lattice on the box prod_p [-L_p, L_p)."""

    n: int
    L: tuple
    N: int
    margin: float = 0.25

    def __post_init__(self):
        if not 1 <= int(self.n) <= 3:
            raise DimensionError(f"grid dimension must be 1, 2 or 3, got {self.n}")
        L = self.L
        if np.isscalar(L):
            L = (float(L),) * int(self.n)
        L = tuple(float(v) for v in L)
        if len(L) != self.n or not all(v > 0 and math.isfinite(v) for v in L):
            raise DimensionError(f"need {self.n} positive half-widths, got {self.L}")
        N = int(self.N)
        if N < 16 or N & (N - 1):
            raise DimensionError(f"points per axis must be a power of two >= 16, got {self.N}")
        if not 0.0 < self.margin < 0.5:
            raise DimensionError(f"margin must lie in (0, 0.5), got {self.margin}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "margin", float(self.margin))

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def h(self):
        return np.array([2.0 * v / self.N for v in self.L])

    @property
    def cell(self):
        """Volume h^n of one lattice cell."""
        return float(np.prod(self.h))

    @property
    def inner(self):
        """Half-widths of the margin-shrunk support box."""
        return np.array([v * (1.0 - 2.0 * self.margin) for v in self.L])

    @property
    def nyquist(self):
        return np.array([self.N / (4.0 * v) for v in self.L])

    def x_axes(self):
        return [-v + (2.0 * v / self.N) * np.arange(self.N) for v in self.L]

    def xi_axes(self):
        m = np.arange(-self.N // 2, self.N // 2)
        return [m / (2.0 * v) for v in self.L]

    def mesh(self):
        return np.meshgrid(*self.x_axes(), indexing="ij")

    def points(self):
        """All lattice points as an array of shape (N^n, n)."""
        return np.stack([g.ravel() for g in self.mesh()], axis=1)

    def scaled(self, factors):
        """Same lattice on a box stretched by `factors` per axis."""
        f = np.broadcast_to(np.asarray(factors, float), (self.n,))
        return GridSpec(self.n, tuple(v * s for v, s in zip(self.L, f)), self.N, self.margin)

    def refined(self, k=2):
        return GridSpec(self.n, self.L, self.N * k, self.margin)

    def to_dict(self):
        return {"n": self.n, "L": list(self.L), "N": self.N, "margin": self.margin}


@dataclass(frozen=True)
class WaveField:
    """Complex samples of a field on a grid at time ``t``."""

    grid: GridSpec
    t: float
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != self.grid.shape:
            s = s.reshape(self.grid.shape) if s.size == self.grid.N ** self.grid.n else None
            if s is None:
                raise DimensionError(f"samples do not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(s)):
            raise DimensionError("field samples must be finite")
        s = np.array(s, dtype=complex, copy=True)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "t", float(self.t))

    def replace(self, samples=None, t=None):
        return WaveField(self.grid, self.t if t is None else t,
                         self.samples if samples is None else samples)

    def l2(self):
        return math.sqrt(self.grid.cell * float(np.sum(np.abs(self.samples) ** 2)))


def _sign_factor(N):
    m = np.arange(-N // 2, N // 2)
    return np.where(m % 2 == 0, 1.0, -1.0)


def _apply_axes(arr, vecs):
    for p, v in enumerate(vecs):
        shape = [1] * arr.ndim
        shape[p] = -1
        arr = arr * v.reshape(shape)
    return arr


def lattice_forward(grid, samples):
    """Lattice Fourier transform, centered frequency ordering."""
    F = np.fft.fftshift(np.fft.fftn(samples))
    F = _apply_axes(F, [_sign_factor(grid.N)] * grid.n)
    return grid.cell * F


def lattice_inverse(grid, coeffs):
    """Inverse of :func:`lattice_forward`."""
    C = _apply_axes(np.asarray(coeffs, complex), [_sign_factor(grid.N)] * grid.n)
    out = np.fft.ifftn(np.fft.ifftshift(C))
    return out * float(np.prod([grid.N / (2.0 * v) for v in grid.L]))


def gaussian(grid, sigma=1.0, center=None, omega=None, t=0.0):
    """Probe e^{2 pi i <omega, x>} exp(-pi sum_p ((x_p - c_p)/sigma_p)^2)."""
    sig = np.broadcast_to(np.asarray(sigma, float), (grid.n,))
    c = np.zeros(grid.n) if center is None else np.broadcast_to(np.asarray(center, float), (grid.n,))
    w = np.zeros(grid.n) if omega is None else np.broadcast_to(np.asarray(omega, float), (grid.n,))
    X = grid.mesh()
    expo = np.zeros(grid.shape, dtype=complex)
    for p in range(grid.n):
        expo += -math.pi * ((X[p] - c[p]) / sig[p]) ** 2 + 2j * math.pi * w[p] * X[p]
    return WaveField(grid, t, np.exp(expo))


def free_gaussian(grid, t, sigma=1.0):
    """Exact free evolution of :func:`gaussian` under Q = I, B = 0."""
    sig = np.broadcast_to(np.asarray(sigma, float), (grid.n,))
    X = grid.mesh()
    out = np.ones(grid.shape, dtype=complex)
    for p in range(grid.n):
        a = sig[p] ** 2 / (4.0 * math.pi)
        A = a + 1j * t
        out = out * np.sqrt(a / A) * np.exp(-X[p] ** 2 / (4.0 * A))
    return WaveField(grid, t, out)
