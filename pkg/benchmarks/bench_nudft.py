"""Timing of the off-lattice Fourier sum: compiled kernel vs numpy fallback.

Run ``python benchmarks/bench_nudft.py``; ``--quick`` uses smaller grids.
Build with ``SCHRODRIFT_NATIVE=1 pip install -e . --no-build-isolation``
to let the compiler target the host CPU.
"""

import argparse
import math
import time

import numpy as np

from schrodrift.propagator import transforms
from schrodrift.propagator.grid import GridSpec


def best_of(fn, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def case(n, N, M, repeat):
    grid = GridSpec(n, 8.0, N)
    rng = np.random.default_rng(0)
    c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    rows = []
    ref = None
    for backend in transforms.available_backends():
        sec, out = best_of(lambda: transforms.lattice_sum(
            c, grid.x_axes(), M, grid.xi_axes(), -1, backend=backend, fast=False), repeat)
        ref = out if ref is None else ref
        rows.append((f"direct/{backend}", sec, float(np.max(np.abs(out - ref)))))
    if transforms.triangular_order(M)[0] is not None:
        sec, out = best_of(lambda: transforms.lattice_sum(
            c, grid.x_axes(), M, grid.xi_axes(), -1), repeat)
        rows.append(("factorized", sec, float(np.max(np.abs(out - ref)))))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rot = np.array([[math.cos(0.4), -math.sin(0.4)], [math.sin(0.4), math.cos(0.4)]])
    shear = np.array([[1.0, 0.0], [0.7, 1.0]])
    cases = [(1, 1024, np.array([[1.3]]), "scale"),
             (2, 32 if args.quick else 64, rot, "rotation"),
             (2, 32 if args.quick else 64, shear, "shear"),
             (3, 16 if args.quick else 16, np.eye(3) + 0.3 * np.eye(3, k=-1), "shear")]
    if not args.quick:
        cases.insert(2, (2, 128, rot, "rotation"))
    print(f"backends: {', '.join(transforms.available_backends())}")
    print(f"{'n':>2} {'N':>5} {'matrix':<9} {'path':<17} {'seconds':>9} {'max diff':>10}")
    for n, N, M, kind in cases:
        for path, sec, diff in case(n, N, M, args.repeat):
            print(f"{n:>2} {N:>5} {kind:<9} {path:<17} {sec:>9.4f} {diff:>10.2e}")


if __name__ == "__main__":
    main()
