import numpy as np
import pytest

from schrodrift.errors import RegistryError
from schrodrift.gallery import all_fixtures, families, fixture, resolve_name
from schrodrift.gramian import gramian_at, volume


def test_aliases():
    assert resolve_name("free-2d") == ("free", {"n": 2})
    assert resolve_name("kolmogorov-m1") == ("kolmogorov", {"m": 1.0})
    assert resolve_name("fan-n4-k2") == ("fan", {"n": 4.0, "k": 2.0})
    assert resolve_name("ex-7.4")[0] == "anomalous-7.4"
    assert fixture("dym-3").spec.n == 3


@pytest.mark.parametrize("name,kw", [
    ("nope", {}), ("free", {"n": 9}), ("free", {"m": 1}), ("fan", {"n": 2, "k": 3}),
    ("imspec", {"b": 1.0}), ("imspec", {"gamma": -1.0, "b": -1.0}), ("free-xd", {}),
    ("kolmogorov", {"m": 1.5}),
])
def test_registry_errors(name, kw):
    with pytest.raises(RegistryError):
        fixture(name, **kw)


def test_families_listing():
    fam = families()
    assert "fan" in fam and fam["fan"][0] == {"n": 2, "k": 1}


@pytest.mark.parametrize("fx", all_fixtures(), ids=lambda f: f.spec.label)
def test_closed_forms_against_gramian(fx):
    exp = fx.expected
    for t in (0.3, 1.0, 4.0):
        if exp.closed_form_V is not None:
            assert exp.closed_form_V.evaluate(t) == pytest.approx(volume(fx.spec, t), rel=1e-8)
        if exp.closed_form_Q is not None:
            G = gramian_at(fx.spec, t).Qt
            assert np.allclose(exp.closed_form_Q.evaluate(t), G, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("fx", all_fixtures(), ids=lambda f: f.spec.label)
def test_problem_document(fx):
    doc = fx.to_problem()
    assert doc["fixture"]["name"] == fx.name
    assert doc["n"] == fx.spec.n and len(doc["Q"]) == fx.spec.n ** 2


def test_labels_are_distinct():
    labels = [f.spec.label for f in all_fixtures()]
    assert len(labels) == len(set(labels))
