"""Named reference problems with their known structural data.

Families take integer or real parameters; short aliases such as
``free-2d``, ``kolmogorov-m1`` or ``dym-3`` resolve to a family plus
parameters.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import RegistryError
from .gramian import OperatorSpec


@dataclass(frozen=True)
class ClosedForm:
    text: str
    evaluate: Callable


@dataclass(frozen=True)
class Expected:
    """Ground truth attached to a fixture; absent fields are unknown."""

    ranks: tuple | None = None
    D: int | None = None
    case_tag: str | None = None
    hypothesis: str | None = None
    D_infty: float | None = None
    D_infty_tol: float = 0.3
    closed_form_V: ClosedForm | None = None
    closed_form_Q: ClosedForm | None = None
    Q_infty: np.ndarray | None = None

    def to_dict(self):
        out = {}
        for key in ("ranks", "D", "case_tag", "hypothesis", "D_infty", "D_infty_tol"):
            val = getattr(self, key)
            if val is not None:
                out[key] = list(val) if isinstance(val, tuple) else val
        if self.closed_form_V is not None:
            out["closed_form_V"] = self.closed_form_V.text
        if self.closed_form_Q is not None:
            out["closed_form_Q"] = self.closed_form_Q.text
        if self.Q_infty is not None:
            out["Q_infty"] = np.asarray(self.Q_infty).ravel().tolist()
        return out


@dataclass(frozen=True)
class Fixture:
    name: str
    params: dict
    spec: OperatorSpec
    expected: Expected = field(default_factory=Expected)

    def to_problem(self):
        """JSON-ready problem document understood by the CLI."""
        doc = self.spec.to_dict()
        doc["expected"] = self.expected.to_dict()
        doc["fixture"] = {"name": self.name, "params": dict(self.params)}
        return doc


def _shift(n):
    return np.diag(np.ones(n - 1), -1)


def _ex11():
    Q = np.diag([1.0, 1.0, 0.0])
    B = np.array([[1.0, 0, 0], [0, 0, 0], [0, 1.0, 0]])
    return Q, B, Expected(ranks=(2, 1), D=5, case_tag="Thm1.3-i", hypothesis="A")


def _conformal(n=2):
    Q = np.eye(n)
    B = -np.eye(n)

    def qt(t):
        return 0.5 * (1.0 - math.exp(-2.0 * t)) * np.eye(n)

    def vt(t):
        return (0.5 * (1.0 - math.exp(-2.0 * t))) ** n

    return Q, B, Expected(
        ranks=(n,), D=n, case_tag="Thm1.3-i", hypothesis="A",
        closed_form_V=ClosedForm(f"((1 - exp(-2t))/2)^{n}", vt),
        closed_form_Q=ClosedForm("(1 - exp(-2t))/2 * I", qt),
        Q_infty=0.5 * np.eye(n))


def _free(n=2):
    return np.eye(n), np.zeros((n, n)), Expected(
        ranks=(n,), D=n, case_tag="Thm1.3-ii", hypothesis="A",
        closed_form_V=ClosedForm(f"t^{n}", lambda t: t ** n),
        closed_form_Q=ClosedForm("t * I", lambda t: t * np.eye(n)))


def _kolmogorov(m=1):
    n = 2 * m
    Q = np.zeros((n, n))
    Q[:m, :m] = np.eye(m)
    B = np.zeros((n, n))
    B[m:, :m] = np.eye(m)

    def qt(t):
        core = np.array([[t, t * t / 2], [t * t / 2, t ** 3 / 3]])
        return np.kron(core, np.eye(m))

    return Q, B, Expected(
        ranks=(m, m), D=4 * m, case_tag="Thm1.3-iii", hypothesis="A",
        closed_form_V=ClosedForm(f"(t^4/12)^{m}", lambda t: (t ** 4 / 12) ** m),
        closed_form_Q=ClosedForm("[[t, t^2/2], [t^2/2, t^3/3]] (x) I_m", qt))


def _fan(n=2, k=1):
    Q = np.zeros((n, n))
    Q[:k, :k] = np.eye(k)
    B = _shift(n)
    D = n + (n - k + 1) * (n - k)
    ranks = (k,) + (1,) * (n - k)
    if k == n:
        exp = Expected(ranks=ranks, D=D, case_tag="Thm1.3-ii", hypothesis="A")
    elif k == 1:
        exp = Expected(ranks=ranks, D=D, case_tag="Thm1.3-iii", hypothesis="A")
    else:
        exp = Expected(ranks=ranks, D=D, case_tag="anomalous-A", hypothesis="A",
                       D_infty=float(n * n), D_infty_tol=0.3)
    return Q, B, exp


def _dym(n=2):
    return _fan(n, 1)


def _imspec(a=0.0, b=-1.0, c=1.0, gamma=1.0):
    return (np.diag([1.0, 0.0]), np.array([[a, b], [c, -a]]),
            Expected(ranks=(1, 1), D=4, case_tag="Thm1.4", hypothesis="B",
                     D_infty=2.0, D_infty_tol=0.1))


_B74 = np.array([[0, 0, 0, 0], [0, 0, 0, -1.0], [1.0, 0, 0, 0], [0, 1.0, 0, 0]])


def _anomalous74(k=2):
    Q = np.diag([1.0] * k + [0.0] * (4 - k))

    def core(t):
        return 2 * t * t + math.cos(2 * t) - 1

    if k == 2:
        vt = ClosedForm("(t^4/96)(2t^2 + cos 2t - 1)",
                        lambda t: t ** 4 / 96 * core(t))
        return Q, _B74.copy(), Expected(
            ranks=(2, 2), D=8, case_tag="anomalous-B", hypothesis="B",
            D_infty=6.0, D_infty_tol=0.3, closed_form_V=vt)
    vt = ClosedForm("(t^2/96)(12 + t^2)(2t^2 + cos 2t - 1)",
                    lambda t: t * t / 96 * (12 + t * t) * core(t))
    return Q, _B74.copy(), Expected(
        ranks=(3, 1), D=6, case_tag="anomalous-A", hypothesis="A",
        D_infty=6.0, D_infty_tol=0.3, closed_form_V=vt)


def _smoluchowski():
    Q = np.diag([1.0, 0.0])
    B = np.array([[-2.0, -2.0], [1.0, 0.0]])

    def qt(t):
        e = math.exp(-2 * t)
        s2, c2 = math.sin(2 * t), math.cos(2 * t)
        off = 0.5 * e * math.sin(t) ** 2
        return np.array([[0.25 + 0.25 * e * (s2 + c2 - 2), off],
                         [off, (1 + e * (c2 - s2 - 2)) / 8]])

    return Q, B, Expected(
        ranks=(1, 1), D=4, case_tag="Thm1.3-i", hypothesis="A",
        closed_form_Q=ClosedForm(
            "[[1/4 + e^{-2t}(sin 2t + cos 2t - 2)/4, e^{-2t} sin^2 t / 2], "
            "[e^{-2t} sin^2 t / 2, (1 + e^{-2t}(cos 2t - sin 2t - 2))/8]]", qt),
        Q_infty=np.diag([0.25, 0.125]))


def _int_range(lo, hi):
    def check(v):
        if int(v) != v or not lo <= v <= hi:
            raise ValueError(f"must be an integer in [{lo}, {hi}]")
        return int(v)
    return check


def _real(v):
    v = float(v)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


# family -> (builder, {param: (default, validator)}, description)
_FAMILIES = {
    "ex-1.1": (_ex11, {}, "3x3 pair with an unstable drift direction, D = 5"),
    "conformal": (_conformal, {"n": (2, _int_range(1, 4))},
                  "Q = I, B = -I (damped Schroedinger)"),
    "free": (_free, {"n": (2, _int_range(1, 4))}, "Q = I, B = 0"),
    "kolmogorov": (_kolmogorov, {"m": (1, _int_range(1, 2))},
                   "Q = diag(I_m, 0), B = [[0, 0], [I_m, 0]]"),
    "fan": (_fan, {"n": (2, _int_range(2, 4)), "k": (1, _int_range(1, 4))},
            "Q = diag(I_k, 0), B = lower shift"),
    "dym": (_dym, {"n": (2, _int_range(2, 3))},
            "companion matrix with zero coefficients (pure shift)"),
    "imspec": (_imspec, {"a": (0.0, _real), "b": (-1.0, _real),
                         "c": (1.0, _real), "gamma": (1.0, _real)},
               "2x2 drift with spectrum {+-i gamma}"),
    "anomalous-7.4": (_anomalous74, {"k": (2, _int_range(2, 3))},
                      "4x4 drift with defective zero eigenvalue and +-i"),
    "smoluchowski-kramers": (_smoluchowski, {},
                             "damped oscillator, eigenvalues -1 +- i"),
}

_ALIASES = {"smoluchowski": "smoluchowski-kramers", "ex-7.4": "anomalous-7.4",
            "ex-7.2": "imspec"}


def families():
    """Mapping family name -> (parameter defaults, description)."""
    return {name: ({p: d for p, (d, _) in params.items()}, desc)
            for name, (_, params, desc) in _FAMILIES.items()}


def resolve_name(name):
    """Split an alias like ``fan-n4-k2`` or ``free-2d`` into family and params."""
    name = _ALIASES.get(name, name)
    if name in _FAMILIES:
        return name, {}
    for fam in sorted(_FAMILIES, key=len, reverse=True):
        if not name.startswith(fam + "-"):
            continue
        keys = list(_FAMILIES[fam][1])
        params = {}
        for tok in name[len(fam) + 1:].split("-"):
            m = re.fullmatch(r"(\d+)d", tok) or re.fullmatch(r"(\d+)", tok)
            if m and keys:
                key = "n" if tok.endswith("d") and "n" in keys else keys[0]
                params[key] = int(m.group(1))
                continue
            m = re.fullmatch(r"([a-z]+)(-?\d+(?:\.\d+)?)", tok)
            if m and m.group(1) in keys:
                params[m.group(1)] = float(m.group(2))
                continue
            raise RegistryError(f"cannot parse {tok!r} in fixture name {name!r}")
        return fam, params
    raise RegistryError(f"unknown fixture {name!r}; known: {sorted(_FAMILIES)}")


def fixture(name, **params):
    """Build the named fixture.

    Raises
    ------
    RegistryError
        Unknown name, unknown parameter or parameter out of range.
    """
    fam, alias_params = resolve_name(name)
    builder, schema, _ = _FAMILIES[fam]
    merged = dict(alias_params)
    merged.update(params)
    values = {}
    for key, raw in merged.items():
        if key not in schema:
            raise RegistryError(f"fixture {fam!r} has no parameter {key!r}")
        try:
            values[key] = schema[key][1](raw)
        except (TypeError, ValueError) as exc:
            raise RegistryError(f"parameter {key}={raw!r} of {fam!r}: {exc}") from None
    for key, (default, _) in schema.items():
        values.setdefault(key, default)
    if fam == "fan" and values["k"] > values["n"]:
        raise RegistryError(f"fan needs k <= n, got n={values['n']}, k={values['k']}")
    if fam == "imspec":
        a, b, c, g = values["a"], values["b"], values["c"], values["gamma"]
        if g <= 0 or c == 0:
            raise RegistryError("imspec needs gamma > 0 and c != 0")
        if abs(b * c + a * a + g * g) > 1e-12 * (1 + a * a + g * g):
            raise RegistryError(f"imspec needs bc = -(a^2 + gamma^2), got bc = {b * c}")
    Q, B, expected = builder(**values)
    label = fam + "".join(f"-{k}{_fmt(v)}" for k, v in sorted(values.items()))
    return Fixture(name=fam, params=values, spec=OperatorSpec(Q, B, label), expected=expected)


def _fmt(v):
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def all_fixtures():
    """One instance of every family member used in the test suites."""
    out = [fixture("ex-1.1"), fixture("smoluchowski-kramers"), fixture("imspec"),
           fixture("imspec", a=1.0, b=-2.0, c=1.0, gamma=1.0)]
    out += [fixture("conformal", n=n) for n in (1, 2, 3)]
    out += [fixture("free", n=n) for n in (1, 2, 3)]
    out += [fixture("kolmogorov", m=m) for m in (1, 2)]
    out += [fixture("fan", n=n, k=k) for n in (2, 3, 4) for k in range(1, n + 1)]
    out += [fixture("dym", n=n) for n in (2, 3)]
    out += [fixture("anomalous-7.4", k=k) for k in (2, 3)]
    return out
