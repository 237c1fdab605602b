"""Command-line front end.

Exit codes::

    0  success
    1  parse, domain or registry error
    2  condition (H) fails
    3  regime could not be decided (noisy growth fit)
    4  geometry or resolution guard of the propagator
    5  a verification suite ran and failed
    6  numerical failure (degenerate Gramian, inconsistent rank tests)

JSON output has sorted keys and floats rounded to 12 significant digits,
so identical inputs give byte-identical documents.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import gallery
from .errors import (DimensionError, DomainError, GeometryError, HoermanderError,
                     InconclusiveRegimeError, ParseError, RegistryError,
                     ResolutionError, SchrodriftError)
from .gramian import OperatorSpec, log_volumes
from .propagator import GridSpec, gaussian, lebesgue_norm, propagate, weighted_field
from .propagator import METHODS as PROPAGATE_METHODS
from .propagator.io import read_field, write_field
from .regimes import (FIT_RESIDUAL, TIE_MARGIN, admissible_pair, classify,
                      strichartz_pair)
from .structure import analyze_structure
from . import verification

EXIT_OK, EXIT_INPUT, EXIT_H, EXIT_INCONCLUSIVE, EXIT_GUARD, EXIT_FAILED, EXIT_NUMERIC = range(7)

DEFAULT_GRID = {1: (256, 20.0), 2: (128, 16.0), 3: (32, 12.0)}
# the Strichartz suite uses a unit-width probe, which needs a finer lattice
STRICHARTZ_GRID = {1: (256, 24.0), 2: (128, 14.0), 3: (32, 3.5)}
TOL_KEYS = {
    "rank": "relative rank tolerance for (H) and the canonical ranks (1e-9)",
    "imag": "imaginary-axis tolerance for the spectrum of B (1e-8 (1+|B|))",
    "residual": f"largest log-space residual of the growth fit ({FIT_RESIDUAL})",
    "tie": f"margin for the D_infty >= D tie (default {TIE_MARGIN})",
}


# ------------------------------------------------------------ formatting

def _round(v):
    if isinstance(v, dict):
        return {str(k): _round(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_round(x) for x in v]
    if isinstance(v, np.ndarray):
        return _round(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        return float(f"{v:.12g}")
    return v


def dumps(doc):
    """Deterministic JSON text."""
    return json.dumps(_round(doc), sort_keys=True, indent=2) + "\n"


def _g(v):
    return f"{v:.12g}"


# --------------------------------------------------------------- problems

def _matrix(doc, key, n):
    if key not in doc:
        raise ParseError(f"missing field {key!r}")
    raw = doc[key]
    if not isinstance(raw, list):
        raise ParseError(f"field {key!r}: expected a list, got {type(raw).__name__}")
    flat = []
    if raw and all(isinstance(row, list) for row in raw):
        if len(raw) != n:
            raise ParseError(f"field {key!r}: expected {n} rows, got {len(raw)}")
        for i, row in enumerate(raw):
            if len(row) != n:
                raise ParseError(f"field {key}[{i}]: expected {n} entries, got {len(row)}")
            for j, x in enumerate(row):
                flat.append((f"{key}[{i}][{j}]", x))
    else:
        if len(raw) != n * n:
            raise ParseError(f"field {key!r}: expected {n * n} numbers (row-major), got {len(raw)}")
        flat = [(f"{key}[{i}]", x) for i, x in enumerate(raw)]
    vals = []
    for where, x in flat:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ParseError(f"field {where}: expected a finite number, got {x!r}")
        vals.append(float(x))
    return np.array(vals).reshape(n, n)


def parse_problem(text, source="<input>", rel_tol=None):
    """Parse a problem document into ``(spec, expected, grid_block)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    n = doc.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParseError(f"{source}: field 'n': expected a positive integer, got {n!r}")
    try:
        Q = _matrix(doc, "Q", n)
        B = _matrix(doc, "B", n)
    except ParseError as exc:
        raise ParseError(f"{source}: {exc}") from None
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise ParseError(f"{source}: field 'label': expected a string")
    grid = doc.get("grid")
    if grid is not None:
        if not isinstance(grid, dict):
            raise ParseError(f"{source}: field 'grid': expected an object")
        unknown = set(grid) - {"N", "L", "margin"}
        if unknown:
            raise ParseError(f"{source}: field 'grid': unknown keys {sorted(unknown)}")
    kw = {} if rel_tol is None else {"rel_tol": rel_tol}
    try:
        spec = OperatorSpec(Q, B, label or "problem", **kw)
    except DimensionError as exc:
        raise ParseError(f"{source}: {exc}") from None
    return spec, _expected_from(doc, source), grid


def _expected_from(doc, source):
    fx = doc.get("fixture")
    if isinstance(fx, dict) and "name" in fx:
        try:
            return gallery.fixture(fx["name"], **fx.get("params", {})).expected
        except RegistryError as exc:
            raise ParseError(f"{source}: field 'fixture': {exc}") from None
    raw = doc.get("expected")
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ParseError(f"{source}: field 'expected': expected an object")
    kw = {}
    for key in ("D", "case_tag", "hypothesis", "D_infty", "D_infty_tol"):
        if key in raw:
            kw[key] = raw[key]
    if "ranks" in raw:
        kw["ranks"] = tuple(raw["ranks"])
    return gallery.Expected(**kw)


def load_problem(args):
    tol = args.tolerances.get("rank")
    if args.fixture:
        fx = gallery.fixture(args.fixture)
        spec = fx.spec if tol is None else OperatorSpec(fx.spec.Q, fx.spec.B, fx.spec.label, tol)
        return spec, fx.expected, None
    if args.input:
        try:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"{args.input}: {exc.strerror}") from None
        return parse_problem(text, args.input, tol)
    raise ParseError("give --fixture NAME or --input FILE")


def build_grid(args, spec, block, defaults=DEFAULT_GRID):
    n = spec.n
    if n not in defaults:
        raise DomainError(f"propagator grids support n <= 3, got n={n}")
    N, L = defaults[n]
    margin = 0.25
    if block:
        N, L, margin = block.get("N", N), block.get("L", L), block.get("margin", margin)
    N = args.grid_n or N
    L = args.grid_L or L
    margin = args.margin if args.margin is not None else margin
    try:
        return GridSpec(n, L, N, margin)
    except DimensionError as exc:
        raise DomainError(str(exc)) from None


# --------------------------------------------------------------- commands

def _pair(D, D_infty, r):
    if r is not None:
        return admissible_pair(D, r, D_infty)
    if D < 2:
        return None
    return strichartz_pair(D, D_infty)


def cmd_analyze(args, out):
    tol = args.tolerances
    try:
        spec, _, _ = load_problem(args)
    except HoermanderError as exc:
        # still emit a document naming the failed condition
        ranks = list(exc.diagnostic.krylov_ranks) if exc.diagnostic else []
        out.write(dumps({"hoermander": {"holds": False, "krylov_ranks": ranks},
                         "error": str(exc)}))
        raise
    st = analyze_structure(spec)
    kw = {}
    if "imag" in tol:
        kw["tol"] = tol["imag"]
    if "residual" in tol:
        kw["residual_threshold"] = tol["residual"]
    if "tie" in tol:
        kw["tie_margin"] = tol["tie"]
    reg = classify(spec, st, workers=args.workers, **kw)
    pair = _pair(st.D, reg.D_infty if reg.hypothesis == "B" else None, args.pair_r)
    h = spec.hoermander
    doc = {
        "label": spec.label,
        "n": spec.n,
        "hoermander": {"holds": h.holds, "krylov_ranks": list(h.krylov_ranks),
                       "gramian_min_eig_ratio": h.gramian_min_eig_ratio},
        "ranks": list(st.ranks),
        "D": st.D,
        "trB": spec.trB,
        "spectrum": [list(p) for p in reg.spectrum_summary.as_pairs()],
        "case": reg.case_tag,
        "hypothesis": reg.hypothesis,
        "D_infty": reg.D_infty,
        "dilation_invariant": st.is_dilation_invariant,
        "fit": reg.fit_diagnostics or None,
        "strichartz_pair": None if pair is None else pair.to_dict(),
        "pair_r": None if pair is None else pair.r,
    }
    out.write(dumps(doc))
    return EXIT_OK


def cmd_volume(args, out):
    spec, _, _ = load_problem(args)
    if not 0 < args.t0 < args.t1:
        raise DomainError(f"need 0 < t0 < t1, got {args.t0}, {args.t1}")
    if args.samples < 2:
        raise DomainError("need at least 2 samples")
    st = analyze_structure(spec)
    try:
        dinf = classify(spec, st, workers=args.workers).D_infty
    except InconclusiveRegimeError:
        dinf = None
    dinf = st.D if dinf is None else dinf
    space = np.geomspace if args.spacing == "log" else np.linspace
    ts = space(args.t0, args.t1, args.samples)
    logv = log_volumes(spec, ts, workers=args.workers)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "V", "tD_exp_t_trB", "min_tD_tDinf"])
    for t, lv in zip(ts, logv):
        a = st.D * math.log(t) + spec.trB * t
        b = min(st.D, dinf) * math.log(t) if t >= 1 else max(st.D, dinf) * math.log(t)
        w.writerow([_g(t), _g(_exp(lv)), _g(_exp(a)), _g(_exp(b))])
    _emit(args, out, buf.getvalue(), f"{spec.label}.volume.csv")
    return EXIT_OK


def _exp(x):
    return math.exp(x) if x < 709.78 else math.inf


def _emit(args, out, text, name):
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, name), "w") as fh:
            fh.write(text)
    out.write(text)


def cmd_verify(args, out):
    spec, expected, block = load_problem(args)
    suite = args.suite
    if suite == "volume":
        rep = verification.run_volume_suite(spec, expected, workers=args.workers)
    else:
        grid = build_grid(args, spec, block,
                          STRICHARTZ_GRID if suite == "strichartz" else DEFAULT_GRID)
        sigma = args.sigma
        if suite == "group":
            times = args.t or [0.1, 0.5]
            rep = verification.run_group_suite(spec, grid, times=[abs(t) for t in times],
                                               sigma=sigma, workers=args.workers)
        elif suite == "dispersive":
            rep = verification.run_dispersive_suite(
                spec, grid, sigma=sigma, t_window=(args.t0, args.t1),
                samples=args.samples, workers=args.workers)
        else:
            st = analyze_structure(spec)
            reg = classify(spec, st, workers=args.workers)
            dinf = reg.D_infty if reg.hypothesis == "B" else None
            pair = _pair(st.D, dinf, args.pair_r)
            if pair is None:
                raise DomainError(f"no Strichartz pair for D={st.D} < 2")
            rep = verification.run_strichartz_suite(spec, grid, pair, t_max=args.t1,
                                                    workers=args.workers)
    if args.out:
        rep.write(args.out)
    out.write(dumps(rep.to_dict()))
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_propagate(args, out):
    spec, _, block = load_problem(args)
    if args.field:
        phi = read_field(args.field)
        if phi.grid.n != spec.n:
            raise DomainError(f"field has n={phi.grid.n} but the operator has n={spec.n}")
    else:
        grid = build_grid(args, spec, block)
        phi = gaussian(grid, args.sigma or float(min(grid.L)) / 6.0)
    times = args.t if args.t else [0.0]
    stem = args.prefix or spec.label
    rows = []
    for t in times:
        u = propagate(spec, phi, t, method=args.method)
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            write_field(os.path.join(args.out, f"{stem}.t{_g(t)}.bin"), u)
        rows.append((u.t, u.l2(), weighted_field(spec, u).l2(), lebesgue_norm(u, math.inf)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "l2", "weighted_l2", "linf"])
    for row in rows:
        w.writerow([_g(v) for v in row])
    _emit(args, out, buf.getvalue(), f"{stem}.propagate.csv")
    return EXIT_OK


def cmd_fixtures(args, out):
    if args.export:
        out.write(dumps(gallery.fixture(args.export).to_problem()))
        return EXIT_OK
    doc = {fam: {"defaults": defaults, "description": desc}
           for fam, (defaults, desc) in gallery.families().items()}
    out.write(dumps(doc))
    return EXIT_OK


# ----------------------------------------------------------------- parser

def _tol(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected KEY=VALUE")
    key, val = text.split("=", 1)
    if key not in TOL_KEYS:
        raise argparse.ArgumentTypeError(f"unknown tolerance {key!r}; known: {sorted(TOL_KEYS)}")
    try:
        return key, float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {val!r}") from None


def _times(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad time list {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--fixture", metavar="NAME", help="built-in fixture, e.g. kolmogorov-m1")
    src.add_argument("--input", metavar="FILE", help="problem JSON document")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="worker threads (default: logical cores)")
    common.add_argument("--tol", dest="tol", action="append", type=_tol, default=[],
                        metavar="KEY=VALUE",
                        help="override a tolerance; keys: " + "; ".join(
                            f"{k}: {v}" for k, v in TOL_KEYS.items()))
    common.add_argument("--out", metavar="DIR", help="also write artifacts into DIR")

    gridp = argparse.ArgumentParser(add_help=False)
    gridp.add_argument("--grid-n", type=int, help="points per axis, a power of two "
                       "(default 256, 128, 32 for n = 1, 2, 3)")
    gridp.add_argument("--grid-L", type=float, help="box half-width (default 20, 16, 12; "
                       "24, 14, 3.5 for the Strichartz suite)")
    gridp.add_argument("--margin", type=float, help="support guard band fraction (default 0.25)")
    gridp.add_argument("--sigma", type=float, help="Gaussian probe width (default: L/6 for "
                       "propagate and the group suite, the narrowest resolved width for "
                       "the dispersive suite)")

    p = argparse.ArgumentParser(prog="schrodrift",
                                description="Gramian, regime and dispersion analysis of "
                                            "drift Schroedinger operators.",
                                epilog="exit codes: 0 ok, 1 input/domain, 2 (H) fails, "
                                       "3 inconclusive regime, 4 propagator guard, "
                                       "5 suite failed, 6 numerical failure")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="structure, regime and exponent pair")
    a.add_argument("--pair-r", type=float, help="admissible pair with this r instead of "
                   "the diagonal Strichartz pair")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("volume", parents=[common], help="CSV of V(t) and reference bounds")
    v.add_argument("--t0", type=float, default=0.1, help="first time (default 0.1)")
    v.add_argument("--t1", type=float, default=10.0, help="last time (default 10)")
    v.add_argument("--samples", type=int, default=50, help="number of times (default 50)")
    v.add_argument("--spacing", choices=("linear", "log"), default="linear")
    v.set_defaults(func=cmd_volume)

    r = sub.add_parser("verify", parents=[common, gridp], help="run a verification suite")
    r.add_argument("--suite", required=True,
                   choices=("volume", "group", "dispersive", "strichartz"))
    r.add_argument("--pair-r", type=float, help="r of the pair for the Strichartz suite")
    r.add_argument("--t0", type=float, default=0.1, help="dispersive window start (0.1)")
    r.add_argument("--t1", type=float, default=5.0, help="window end / largest |t| (5)")
    r.add_argument("--samples", type=int, default=16, help="dispersive time samples (16)")
    r.add_argument("--t", type=_times, help="group-suite times, comma separated (0.1,0.5)")
    r.set_defaults(func=cmd_verify)

    g = sub.add_parser("propagate", parents=[common, gridp], help="apply U(t) to a field")
    g.add_argument("--field", metavar="FILE", help="field file with a .meta sidecar "
                   "(default: Gaussian probe)")
    g.add_argument("--t", type=_times, help="comma separated times (default 0)")
    g.add_argument("--method", choices=PROPAGATE_METHODS, default="sheared-spectral")
    g.add_argument("--prefix", help="stem of the output files (default: the label)")
    g.set_defaults(func=cmd_propagate)

    f = sub.add_parser("fixtures", parents=[common], help="list fixtures or export one")
    f.add_argument("--export", metavar="NAME", help="print NAME as a problem document")
    f.set_defaults(func=cmd_fixtures)
    return p


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    args.tolerances = dict(args.tol)
    try:
        return args.func(args, out)
    except HoermanderError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_H
    except InconclusiveRegimeError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INCONCLUSIVE
    except (GeometryError, ResolutionError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_GUARD
    except (ParseError, DomainError, DimensionError, RegistryError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except SchrodriftError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_NUMERIC


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
