import math

import numpy as np
import pytest

from schrodrift.errors import CanonicalFormError, DimensionError
from schrodrift.gallery import all_fixtures, fixture
from schrodrift.gramian import OperatorSpec, log_volume
from schrodrift.structure import (analyze_structure, block_offsets, canonical_ranks,
                                  homogeneous_dimension, shifted_drift, shifted_spec)


def test_ranks_examples():
    assert canonical_ranks(fixture("ex-1.1").spec) == (2, 1)
    assert canonical_ranks(fixture("fan", n=4, k=2).spec) == (2, 1, 1)
    assert canonical_ranks(fixture("kolmogorov-m2").spec) == (2, 2)
    for n in (1, 2, 3):
        B = np.random.default_rng(n).standard_normal((n, n))
        assert canonical_ranks(OperatorSpec(np.eye(n), B)) == (n,)


def test_homogeneous_dimension():
    assert homogeneous_dimension([2, 1]) == 5
    assert homogeneous_dimension([2, 2]) == 8
    for m in (1, 2, 3):
        assert homogeneous_dimension([m, m]) == 4 * m
    for k, D in ((1, 16), (2, 10), (3, 6), (4, 4)):
        assert homogeneous_dimension(fixture("fan", n=4, k=k).expected.ranks) == D


@pytest.mark.parametrize("n", [2, 3, 4])
def test_fan_family_dimension(n):
    for k in range(1, n + 1):
        st = analyze_structure(fixture("fan", n=n, k=k).spec)
        assert st.D == n + (n - k + 1) * (n - k)
        assert n <= st.D <= n * n
    assert analyze_structure(fixture("fan", n=n, k=1).spec).D == n * n


def test_shifted_drift_examples():
    spec = fixture("ex-1.1").spec
    Bbar, inv = shifted_drift(spec, canonical_ranks(spec))
    assert np.array_equal(Bbar, [[0, 0, 0], [0, 0, 0], [0, 1, 0]])
    assert not inv
    for name in ("fan-n4-k1", "kolmogorov-m1", "kolmogorov-m2"):
        spec = fixture(name).spec
        Bbar, inv = shifted_drift(spec, canonical_ranks(spec))
        assert inv and np.array_equal(Bbar, spec.B)


def test_shifted_drift_rank_mismatch():
    spec = fixture("ex-1.1").spec
    with pytest.raises(DimensionError):
        shifted_drift(spec, (1, 1))


def test_block_offsets_and_weights():
    st = analyze_structure(fixture("fan-n4-k2").spec)
    assert list(block_offsets(st.ranks)) == [0, 2, 3, 4]
    assert st.dilation_weights == (1, 1, 3, 5)
    assert st.block_weights == (1, 3, 5)
    assert np.allclose(st.dilation(2.0), [2, 2, 8, 32])


@pytest.mark.parametrize("name", ["kolmogorov-m1", "kolmogorov-m2", "fan-n3-k1", "fan-n4-k1"])
def test_scaling_law(name):
    spec = fixture(name).spec
    D = analyze_structure(spec).D
    for lam in (0.5, 2.0):
        for t in (0.1, 1.0):
            lhs = log_volume(spec, lam * lam * t)
            assert lhs == pytest.approx(2 * D * math.log(lam) + log_volume(spec, t), abs=1e-7)


@pytest.mark.parametrize("fx", all_fixtures(), ids=lambda f: f.spec.label)
def test_small_time_universality(fx):
    bar = shifted_spec(fx.spec)
    ratio = math.exp(log_volume(fx.spec, 1e-3) - log_volume(bar, 1e-3))
    assert abs(ratio - 1) <= 0.05


@pytest.mark.parametrize("fx", all_fixtures(), ids=lambda f: f.spec.label)
def test_ranks_invariant_under_shift(fx):
    assert canonical_ranks(shifted_spec(fx.spec)) == canonical_ranks(fx.spec)


def test_non_canonical_layout_is_reported():
    # rank increments (1, 2) are not non-increasing
    Q = np.diag([1.0, 0.0, 0.0])
    B = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    B[2, 1] = 0.0
    B2 = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    with pytest.raises(Exception):
        # (H) fails or the profile is rejected; never a silent answer
        canonical_ranks(OperatorSpec(Q, B2))
    with pytest.raises(Exception):
        canonical_ranks(OperatorSpec(Q, B))


def test_canonical_error_type_exists():
    assert issubclass(CanonicalFormError, ValueError)
