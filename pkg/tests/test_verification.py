import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schrodrift import verification as vf
from schrodrift.errors import DomainError
from schrodrift.gallery import all_fixtures, fixture
from schrodrift.propagator import GridSpec, free_gaussian, gaussian, propagate
from schrodrift.regimes import admissible_pair


@pytest.mark.parametrize("fx", all_fixtures(), ids=lambda f: f.spec.label)
def test_volume_suite_passes(fx):
    rep = vf.run_volume_suite(fx.spec, fx.expected)
    failed = [c.name for c in rep.checks if c.status == vf.FAIL]
    assert rep.passed, failed


def test_volume_suite_detects_wrong_expectation():
    fx = fixture("kolmogorov-m1")
    wrong = fx.expected.__class__(D=7, case_tag="Thm1.4")
    rep = vf.run_volume_suite(fx.spec, wrong)
    assert not rep.passed


def test_report_writing(tmp_path):
    fx = fixture("free-2d")
    rep = vf.run_volume_suite(fx.spec, fx.expected)
    paths = rep.write(tmp_path)
    doc = json.loads(open([p for p in paths if p.endswith(".json")][0]).read())
    assert doc["passed"] and doc["counts"][vf.FAIL] == 0
    csv_path = [p for p in paths if p.endswith(".csv")][0]
    assert open(csv_path).readline().startswith("series,")


def test_report_bookkeeping():
    rep = vf.SuiteReport("x", "lbl")
    assert not rep.passed
    rep.skip("a", 1, 0.1, "why")
    assert not rep.passed
    rep.add("b", 1.0, 1.0, 0.1, True)
    assert rep.passed and rep.counts() == {vf.PASS: 1, vf.FAIL: 0, vf.SKIP: 1}
    rep.add("c", math.inf, 1.0, 0.1, False)
    assert not rep.passed
    assert rep.to_dict()["checks"][2]["measured"] == "inf"
    with pytest.raises(KeyError):
        rep.check("zzz")


@given(st.floats(-5, 5), st.floats(-3, 3))
def test_dispersive_weight_at_l2_is_unitary_weight(trB, t):
    assert vf.dispersive_weight(trB, t, 2.0) == pytest.approx(trB * t / 2, abs=1e-12)


@given(st.floats(-5, 5), st.floats(0.01, 3), st.sampled_from([3.0, 4.0, math.inf]))
def test_dispersive_weight_branches(trB, s, r):
    inv = 0 if math.isinf(r) else 1 / r
    # backward minus forward weight is the adjoint factor for the dual exponent
    diff = vf.dispersive_weight(trB, -s, r) - vf.dispersive_weight(trB, s, r)
    assert diff == pytest.approx(-trB * s, abs=1e-9)
    assert vf.dispersive_weight(trB, s, r) == pytest.approx(trB * s * inv)


@pytest.mark.parametrize("t", [0.5, 2.0, -1.0])
def test_dispersive_quotient_free_gaussian(t):
    # closed form: sup |u| = (a / |a + i t|)^{1/2} with a = 1 / (4 pi), ||phi||_1 = 1
    g = GridSpec(1, 64.0, 1024)
    spec = fixture("free-1d").spec
    phi = gaussian(g)
    u = free_gaussian(g, t)
    a = 1 / (4 * math.pi)
    want = math.sqrt(a / abs(complex(a, t)) * abs(t))
    assert vf.dispersive_quotient(spec, phi, u, t, math.inf) == pytest.approx(want, rel=1e-8)


def test_auto_sigma_resolves_probe():
    g = GridSpec(1, 20.0, 256)
    sig = vf.auto_sigma(g)
    band = math.sqrt(math.log(1e6) / math.pi) / sig
    assert band <= 0.8 * g.nyquist[0]


def test_dispersive_suite_free_1d():
    g = GridSpec(1, 360.0, 4096)
    rep = vf.run_dispersive_suite(fixture("free-1d").spec, g, sigma=0.8, samples=12)
    assert rep.passed, [(c.name, c.measured) for c in rep.checks if c.status == vf.FAIL]
    assert any(c.status == vf.PASS and "trend" in c.name for c in rep.checks)


def test_dispersive_suite_skips_unresolvable():
    g = GridSpec(2, 16.0, 64)
    rep = vf.run_dispersive_suite(fixture("kolmogorov-m1").spec, g, samples=8)
    assert rep.counts()[vf.FAIL] == 0


def test_homogeneous_probe_widths():
    g = GridSpec(2, 10.0, 64)
    p = vf.homogeneous_probe(g, (1, 3), 2.0)
    ref = gaussian(g, (2.0, 8.0))
    assert np.allclose(p.samples, ref.samples)


def test_strichartz_pair_outside_range_is_refused():
    # D = 4 for the Kolmogorov pair, so r must stay below 4
    with pytest.raises(DomainError):
        admissible_pair(4, 5.0)


def test_strichartz_quotient_is_scale_free_for_free_flow():
    spec = fixture("free-1d").spec
    pair = admissible_pair(1, 6.0)
    vals = []
    for sig in (1.0, 2.0):
        g = GridSpec(1, 24.0, 512).scaled(sig)
        phi = vf.homogeneous_probe(g, (1,), sig)
        q, _ = vf.strichartz_quotient(spec, phi, pair, 0.3 * sig ** 2, samples=21)
        vals.append(q)
    assert vals[0] == pytest.approx(vals[1], rel=1e-6)


@pytest.mark.parametrize("name,N,L", [("free-1d", 256, 20.0), ("kolmogorov-m1", 128, 18.0)])
def test_group_suite(name, N, L):
    spec = fixture(name).spec
    rep = vf.run_group_suite(spec, GridSpec(spec.n, L, N), sigma=3.0)
    assert rep.passed, [(c.name, c.measured) for c in rep.checks if c.status == vf.FAIL]
    assert rep.check("U(0) identity").status == vf.PASS
