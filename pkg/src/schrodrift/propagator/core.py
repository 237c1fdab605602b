"""The propagator group U(t), Duhamel solutions and space-time norms.

Three independent evaluations of U(t) are provided:

``sheared-spectral``
    Multiply the transform at the sheared frequency e^{-tB^T} xi by the
    Gaussian chirp; the off-lattice transform is a direct sum.
``chirp-interp``
    Apply the chirp on the lattice, invert, and evaluate the
    trigonometric interpolant along the drift flow.
``kernel-quadrature``
    Riemann sum of the oscillatory kernel. Quadratic cost, meant as an
    oracle on small grids.

For t < 0 each method uses the inverse-branch formula directly rather
than reflecting through the t > 0 branch.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import linalg as la
from ..errors import DimensionError, GeometryError, ResolutionError
from ..gramian import gramian_at
from . import transforms
from .grid import WaveField, lattice_forward, lattice_inverse

METHODS = ("sheared-spectral", "chirp-interp", "kernel-quadrature")
SIG_TOL = 1e-6
MASS_TOL = 1e-6
PHASE_LIMIT = 0.5 * math.pi


@dataclass(frozen=True)
class GuardReport:
    """Quantities behind the aliasing and resolution guards.

    Ratios at or below one mean the guard passes.
    """

    mass_outside: float
    corner_ratio: float
    band: tuple
    band_ratio: float
    phase_per_cell: float

    def to_dict(self):
        return {"mass_outside": self.mass_outside, "corner_ratio": self.corner_ratio,
                "band": list(self.band), "band_ratio": self.band_ratio,
                "phase_per_cell": self.phase_per_cell}


def _box_corners(half):
    return np.array(list(itertools.product(*[(-h, h) for h in half])), dtype=float)


def significant_band(grid, samples, sig_tol=SIG_TOL):
    """Per-axis extent of the frequencies where |phi_hat| exceeds sig_tol * max."""
    F = np.abs(lattice_forward(grid, samples))
    top = F.max()
    if top == 0:
        return np.zeros(grid.n), False
    mask = F > sig_tol * top
    axes = grid.xi_axes()
    band = []
    edge = False
    for p in range(grid.n):
        other = tuple(q for q in range(grid.n) if q != p)
        hit = np.any(mask, axis=other) if other else mask
        idx = np.flatnonzero(hit)
        edge |= bool(idx[0] == 0 or idx[-1] == grid.N - 1)
        band.append(float(np.max(np.abs(axes[p][idx]))) + 0.25 / grid.L[p])
    return np.array(band), edge


def support_box(grid, samples, mass_tol=MASS_TOL):
    """Per-axis interval ``(lo, hi)`` holding all but `mass_tol` of the mass.

    Each axis trims ``mass_tol / (2n)`` from both tails of its marginal,
    so the box misses at most `mass_tol` of the total.
    """
    dens = np.abs(samples) ** 2
    total = dens.sum()
    axes = grid.x_axes()
    h = grid.h
    lo, hi = [], []
    cut = mass_tol / (2.0 * grid.n)
    for p in range(grid.n):
        other = tuple(q for q in range(grid.n) if q != p)
        marg = dens.sum(axis=other) if other else dens
        cdf = np.cumsum(marg) / total
        i0 = int(np.searchsorted(cdf, cut, side="left"))
        i1 = int(np.searchsorted(cdf, 1.0 - cut, side="left"))
        i1 = min(i1, grid.N - 1)
        lo.append(axes[p][i0] - 0.5 * h[p])
        hi.append(axes[p][i1] + 0.5 * h[p])
    return np.array(lo), np.array(hi)


def check_guards(spec, phi, t, sig_tol=SIG_TOL, mass_tol=MASS_TOL, raise_on_fail=True):
    """Verify that U(t) phi can be represented on the grid of `phi`.

    Raises
    ------
    GeometryError
        Data leaks out of the margin box, or the drift carries a corner
        of the support box outside the periodic box.
    ResolutionError
        Frequencies or chirp phases are not resolved by the lattice.
    """
    grid = phi.grid
    if spec.n != grid.n:
        raise DimensionError(f"operator has n={spec.n} but grid has n={grid.n}")
    s = phi.samples
    total = float(np.sum(np.abs(s) ** 2))
    if total == 0.0:
        return GuardReport(0.0, 0.0, tuple([0.0] * grid.n), 0.0, 0.0)
    X = grid.mesh()
    inside = np.ones(grid.shape, dtype=bool)
    for p in range(grid.n):
        inside &= np.abs(X[p]) <= grid.inner[p]
    outside = float(np.sum(np.abs(s[~inside]) ** 2)) / total
    band, edge = significant_band(grid, s, sig_tol)
    fails = []
    if outside > mass_tol:
        fails.append(GeometryError(
            f"{outside:.2e} of the mass lies outside the margin box "
            f"(half-widths {grid.inner.tolist()})"))
    if edge:
        fails.append(ResolutionError("data has significant energy at the lattice Nyquist edge"))
    corner_ratio = band_ratio = phase = 0.0
    if t != 0.0:
        L = np.array(grid.L)
        lo, hi = support_box(grid, s, mass_tol)
        corners = np.array(list(itertools.product(*zip(lo, hi))), dtype=float)
        images = corners @ la.expm(spec.B, -t).T
        ratios = np.max(np.abs(images) / L, axis=1)
        k = int(np.argmax(ratios))
        corner_ratio = float(ratios[k])
        if corner_ratio > 1.0:
            fails.append(GeometryError(
                f"drift flow over t={t:g} carries support corner {corners[k].tolist()} "
                f"to {images[k].tolist()}, outside the box {L.tolist()}",
                corner=corners[k]))
        bcorners = _box_corners(band)
        fimages = bcorners @ la.expm(spec.B.T, t).T
        band_ratio = float(np.max(np.abs(fimages) / grid.nyquist))
        if band_ratio > 1.0:
            fails.append(ResolutionError(
                f"sheared frequency band exceeds Nyquist by factor {band_ratio:.3f} at t={t:g}"))
        Qs = gramian_at(spec, abs(t), cross_check=False).Qt
        if t > 0:
            grads = 8 * math.pi ** 2 * (bcorners @ (la.expm(spec.B, -t) @ Qs).T)
        else:
            grads = 8 * math.pi ** 2 * (fimages @ Qs.T)
        dxi = 1.0 / (2.0 * L)
        phase = float(np.max(np.abs(grads) * dxi))
        if phase > PHASE_LIMIT:
            fails.append(ResolutionError(
                f"chirp phase changes by {phase:.3f} rad per frequency cell at t={t:g} "
                f"(limit pi/2); enlarge the box"))
    report = GuardReport(outside, corner_ratio, tuple(band.tolist()), band_ratio, phase)
    if fails and raise_on_fail:
        raise fails[0]
    return report


def _xi_mesh_points(grid):
    return np.stack([g.ravel() for g in np.meshgrid(*grid.xi_axes(), indexing="ij")], axis=1)


def _quad_form(P, pts):
    return np.einsum("ip,pq,iq->i", pts, P, pts)


def _mask_outside(grid, M):
    # lattice points whose image under M leaves the principal box
    Y = grid.points() @ M.T
    return np.any(np.abs(Y) > np.array(grid.L), axis=1).reshape(grid.shape)


def _interp(grid, coeffs, M, backend):
    """Trigonometric interpolant with lattice coefficients, evaluated at M x."""
    if np.array_equal(M, np.eye(grid.n)):
        return lattice_inverse(grid, coeffs)
    vals = transforms.lattice_sum(coeffs, grid.xi_axes(), M, grid.x_axes(), +1,
                                  backend=backend)
    vals = vals * float(np.prod([1.0 / (2.0 * v) for v in grid.L]))
    vals[_mask_outside(grid, M)] = 0.0
    return vals


def _sheared_spectral(spec, grid, phi, t, Qs, backend):
    s = abs(t)
    M = la.expm(spec.B.T, -t)
    if np.array_equal(M, np.eye(grid.n)):
        # no shear: the off-lattice frequencies are the lattice itself
        phat = lattice_forward(grid, phi)
    else:
        phat = grid.cell * transforms.lattice_sum(phi, grid.x_axes(), M, grid.xi_axes(), -1,
                                                  backend=backend)
    xi = _xi_mesh_points(grid)
    # band-limited data: the transform vanishes off the principal frequency box,
    # whereas the lattice sum there would return a periodic alias
    off = np.any(np.abs(xi @ M.T) > grid.nyquist, axis=1).reshape(grid.shape)
    phat[off] = 0.0
    if t > 0:
        eta = xi @ M.T
        chirp = np.exp(-4j * math.pi ** 2 * _quad_form(Qs, eta))
        uhat = math.exp(-t * spec.trB) * chirp.reshape(grid.shape) * phat
    else:
        chirp = np.exp(4j * math.pi ** 2 * _quad_form(Qs, xi))
        uhat = math.exp(s * spec.trB) * chirp.reshape(grid.shape) * phat
    return lattice_inverse(grid, uhat)


def _chirp_interp(spec, grid, phi, t, Qs, backend):
    xi = _xi_mesh_points(grid)
    q = _quad_form(Qs, xi).reshape(grid.shape)
    if t > 0:
        vhat = lattice_forward(grid, phi) * np.exp(-4j * math.pi ** 2 * q)
        return _interp(grid, vhat, la.expm(spec.B, t), backend)
    w = _interp(grid, lattice_forward(grid, phi), la.expm(spec.B, t), backend)
    uhat = lattice_forward(grid, w) * np.exp(4j * math.pi ** 2 * q)
    return lattice_inverse(grid, uhat)


def kernel_band_ratio(spec, grid, phi, t, sample):
    """Local frequency of the kernel-times-data integrand over the lattice Nyquist.

    The Riemann sum of the kernel aliases once this exceeds one; with
    degenerate Q the kernel oscillates violently at small t.
    """
    d = sample.scale
    P = np.linalg.inv(sample.G) / np.outer(d, d)
    lo, hi = support_box(grid, np.asarray(phi), MASS_TOL)
    band, _ = significant_band(grid, np.asarray(phi))
    src = np.array(list(itertools.product(*zip(lo, hi))), dtype=float)
    tgt = _box_corners(np.array(grid.L))
    if t > 0:
        J = np.eye(grid.n)
        tgt = tgt @ la.expm(spec.B, t).T
    else:
        J = la.expm(spec.B, abs(t))
        src = src @ J.T
    # Delta is affine in both ends, so its extremes sit at corner pairs
    D = (src[:, None, :] - tgt[None, :, :]).reshape(-1, grid.n)
    freq = np.max(np.abs(D @ P.T @ J), axis=0) / (4.0 * math.pi)
    return float(np.max((freq + band) * grid.h))


def _kernel_quadrature(spec, grid, phi, t, sample, chunk=256):
    ratio = kernel_band_ratio(spec, grid, phi, t, sample)
    if ratio > 1.0:
        raise ResolutionError(
            f"kernel integrand exceeds the lattice Nyquist by factor {ratio:.3g} at t={t:g}; "
            "refine the grid or use a spectral method")
    n = grid.n
    s = abs(t)
    d = sample.scale
    P = np.linalg.inv(sample.G) / np.outer(d, d)
    amp = (4 * math.pi) ** (-n / 2) * math.exp(-0.5 * sample.logdet) * grid.cell
    X = grid.points()
    f = phi.ravel()
    out = np.empty(X.shape[0], dtype=complex)
    if t > 0:
        targets = X @ la.expm(spec.B, t).T
        sources = X
        pref, sign = amp * np.exp(-1j * math.pi * n / 4), 1.0
    else:
        targets = X
        sources = X @ la.expm(spec.B, s).T
        pref, sign = amp * np.exp(1j * math.pi * n / 4) * math.exp(s * spec.trB), -1.0
    for lo in range(0, X.shape[0], chunk):
        Dlt = sources[None, :, :] - targets[lo:lo + chunk, None, :]
        ph = np.einsum("tsp,pq,tsq->ts", Dlt, P, Dlt) / 4.0
        out[lo:lo + chunk] = pref * (np.exp(1j * sign * ph) @ f)
    return out.reshape(grid.shape)


def propagate(spec, phi, t, method="sheared-spectral", check=True, backend=None,
              sig_tol=SIG_TOL, mass_tol=MASS_TOL):
    """Apply U(t) to a sampled field.

    Parameters
    ----------
    spec : OperatorSpec
    phi : WaveField
        Data at time ``phi.t``; the result is stamped ``phi.t + t``.
    t : float
        Signed time step.
    method : {"sheared-spectral", "chirp-interp", "kernel-quadrature"}
    check : bool
        Run the aliasing and resolution guards first.
    backend : {"compiled", "python"}, optional
        Kernel for the direct off-lattice sums.
    """
    if method not in METHODS:
        raise DimensionError(f"unknown method {method!r}; use one of {METHODS}")
    t = float(t)
    if not math.isfinite(t):
        raise DimensionError("time must be finite")
    grid = phi.grid
    if spec.n != grid.n:
        raise DimensionError(f"operator has n={spec.n} but grid has n={grid.n}")
    if t == 0.0:
        return phi.replace(t=phi.t)
    if check:
        check_guards(spec, phi, t, sig_tol=sig_tol, mass_tol=mass_tol)
    if not np.any(phi.samples):
        return phi.replace(t=phi.t + t)
    sample = gramian_at(spec, abs(t), cross_check=False)
    data = np.asarray(phi.samples)
    if method == "sheared-spectral":
        out = _sheared_spectral(spec, grid, data, t, sample.Qt, backend)
    elif method == "chirp-interp":
        out = _chirp_interp(spec, grid, data, t, sample.Qt, backend)
    else:
        out = _kernel_quadrature(spec, grid, data, t, sample)
    return WaveField(grid, phi.t + t, out)


def propagate_many(spec, phi, times, method="sheared-spectral", workers=1, **kw):
    """U(t) phi for several t; guard failures are returned as exceptions."""
    def one(t):
        try:
            return propagate(spec, phi, t, method=method, **kw)
        except (GeometryError, ResolutionError) as exc:
            return exc
    times = list(times)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, times))
    return [one(t) for t in times]


def weighted_field(spec, u):
    """e^{t trB / 2} u, the isometric normalization of U(t) phi."""
    return u.replace(samples=u.samples * math.exp(0.5 * u.t * spec.trB))


def trapezoid_weights(times):
    times = np.asarray(times, float)
    w = np.zeros_like(times)
    if len(times) > 1:
        dt = np.diff(times)
        w[:-1] += 0.5 * dt
        w[1:] += 0.5 * dt
    return w


def duhamel_solve(spec, phi, F, t_grid, method="sheared-spectral", **kw):
    """u(t_k) = U(t_k) phi + int_0^{t_k} U(t_k - s) F(s) ds, trapezoid in s.

    ``F`` is a sequence of fields sampled on ``t_grid`` (``t_grid[0] == 0``).
    """
    t_grid = [float(v) for v in t_grid]
    if not t_grid or t_grid[0] != 0.0:
        raise DimensionError("t_grid must start at 0")
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise DimensionError("t_grid must be increasing")
    F = list(F)
    if len(F) != len(t_grid):
        raise DimensionError(f"{len(F)} forcing samples for {len(t_grid)} times")
    base = phi.replace(t=0.0)
    out = []
    for k, tk in enumerate(t_grid):
        acc = np.array(propagate(spec, base, tk, method=method, **kw).samples)
        w = trapezoid_weights(t_grid[:k + 1])
        for j in range(k + 1):
            if w[j] == 0.0 or not np.any(F[j].samples):
                continue
            src = F[j].replace(t=0.0)
            acc += w[j] * propagate(spec, src, tk - t_grid[j], method=method, **kw).samples
        out.append(WaveField(phi.grid, tk, acc))
    return out


def lebesgue_norm(u, r):
    """Riemann-sum L^r norm of a field; ``r = inf`` gives the max modulus."""
    a = np.abs(u.samples)
    if math.isinf(r):
        return float(a.max()) if a.size else 0.0
    if r < 1:
        raise DimensionError(f"r must be >= 1, got {r}")
    return float((u.grid.cell * np.sum(a ** r)) ** (1.0 / r))


def mixed_norm(times, values, q, trB=0.0, weight_sign="+"):
    """Trapezoid L^q_t norm of e^{+-trB t/2} a(t).

    The weight e^{+-q trB t/2} multiplies a(t)^q inside the integral.
    """
    times = np.asarray(times, float)
    a = np.asarray(values, float)
    if times.shape != a.shape:
        raise DimensionError("times and values must have the same length")
    if np.any(np.diff(times) <= 0):
        raise DimensionError("times must be increasing")
    sgn = {"+": 1.0, "-": -1.0}[weight_sign]
    if math.isinf(q):
        return float(np.max(np.exp(sgn * trB * times / 2) * a)) if a.size else 0.0
    integrand = np.exp(sgn * q * trB * times / 2) * a ** q
    return float(np.sum(trapezoid_weights(times) * integrand) ** (1.0 / q))
