"""Field files: raw little-endian samples with a key-value sidecar, or CSV.

The binary payload stores each sample as a pair of little-endian IEEE
doubles (real, imaginary) in row-major order; the sidecar ``<file>.meta``
holds lines ``key = value`` with at least n, N, L and t.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from ..errors import ParseError
from .grid import GridSpec, WaveField

DTYPE = "<c16"
FORMAT = "schrodrift-field-1"


def sidecar_path(path):
    return os.fspath(path) + ".meta"


def write_field(path, field):
    """Write samples to `path` and the descriptor to ``path + '.meta'``."""
    g = field.grid
    np.ascontiguousarray(field.samples, dtype=DTYPE).tofile(os.fspath(path))
    lines = [
        f"format = {FORMAT}",
        f"n = {g.n}",
        f"N = {g.N}",
        "L = " + ", ".join(repr(v) for v in g.L),
        f"margin = {g.margin!r}",
        f"t = {field.t!r}",
        f"dtype = {DTYPE}",
        "order = C",
    ]
    with open(sidecar_path(path), "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_descriptor(meta_path):
    out = {}
    with open(meta_path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{meta_path}:{lineno}: expected 'key = value'")
            key, val = (part.strip() for part in line.split("=", 1))
            out[key] = val
    for key in ("n", "N", "L", "t"):
        if key not in out:
            raise ParseError(f"{meta_path}: missing key {key!r}")
    return out


def read_field(path):
    """Load a field written by :func:`write_field`."""
    meta = read_descriptor(sidecar_path(path))
    try:
        n = int(meta["n"])
        N = int(meta["N"])
        L = tuple(float(v) for v in meta["L"].split(","))
        if len(L) == 1:
            L = L * n
        margin = float(meta.get("margin", 0.25))
        t = float(meta["t"])
    except ValueError as exc:
        raise ParseError(f"{sidecar_path(path)}: {exc}") from None
    if meta.get("dtype", DTYPE) != DTYPE or meta.get("order", "C") != "C":
        raise ParseError(f"{sidecar_path(path)}: unsupported dtype/order")
    grid = GridSpec(n, L, N, margin)
    data = np.fromfile(os.fspath(path), dtype=DTYPE)
    if data.size != N ** n:
        raise ParseError(f"{path}: expected {N ** n} samples, found {data.size}")
    return WaveField(grid, t, data.reshape(grid.shape).astype(complex))


def write_field_csv(path, field):
    """CSV with columns index, re, im (row-major flat index)."""
    flat = np.asarray(field.samples).ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, z in enumerate(flat):
            w.writerow([i, repr(float(z.real)), repr(float(z.imag))])


def read_field_csv(path, grid, t=0.0):
    size = grid.N ** grid.n
    data = np.zeros(size, dtype=complex)
    seen = np.zeros(size, dtype=bool)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["index", "re", "im"]:
            raise ParseError(f"{path}: header must be index,re,im")
        for lineno, row in enumerate(reader, start=2):
            try:
                i, re_, im_ = int(row[0]), float(row[1]), float(row[2])
            except (ValueError, IndexError):
                raise ParseError(f"{path}:{lineno}: malformed row {row!r}") from None
            if not 0 <= i < size:
                raise ParseError(f"{path}:{lineno}: index {i} out of range")
            data[i] = complex(re_, im_)
            seen[i] = True
    if not seen.all():
        raise ParseError(f"{path}: {int((~seen).sum())} samples missing")
    return WaveField(grid, t, data.reshape(grid.shape))
