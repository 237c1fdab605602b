import numpy as np
import pytest

from schrodrift.errors import ParseError
from schrodrift.propagator import (GridSpec, WaveField, gaussian, read_field, read_field_csv,
                                   write_field, write_field_csv)
from schrodrift.propagator.io import sidecar_path


@pytest.fixture
def field(rng):
    g = GridSpec(2, (3.0, 5.5), 16, margin=0.2)
    s = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    return WaveField(g, 0.125, s)


def test_binary_round_trip_is_bit_identical(tmp_path, field):
    p = tmp_path / "f.bin"
    write_field(p, field)
    back = read_field(p)
    assert back.grid == field.grid and back.t == field.t
    assert back.samples.tobytes() == field.samples.tobytes()
    assert p.stat().st_size == 16 * 16 * 16


def test_sidecar_contents(tmp_path, field):
    p = tmp_path / "f.bin"
    write_field(p, field)
    meta = open(sidecar_path(p)).read()
    assert "n = 2" in meta and "N = 16" in meta and "dtype = <c16" in meta


def test_csv_round_trip(tmp_path, field):
    p = tmp_path / "f.csv"
    write_field_csv(p, field)
    back = read_field_csv(p, field.grid, field.t)
    assert np.array_equal(back.samples, field.samples)


def test_truncated_payload(tmp_path, field):
    p = tmp_path / "f.bin"
    write_field(p, field)
    p.write_bytes(p.read_bytes()[:-16])
    with pytest.raises(ParseError, match="samples"):
        read_field(p)


@pytest.mark.parametrize("bad,match", [
    ("n = 2\nN = 16\nt = 0\n", "missing key 'L'"),
    ("n = 2\nN = 16\nL = 3, x\nt = 0\n", "could not convert"),
    ("n = 2\nN = 16\nL = 3\nt = 0\nbogus line\n", ":5:"),
    ("n = 2\nN = 16\nL = 3\nt = 0\ndtype = <c8\n", "dtype"),
])
def test_bad_sidecar(tmp_path, field, bad, match):
    p = tmp_path / "f.bin"
    write_field(p, field)
    with open(sidecar_path(p), "w") as fh:
        fh.write(bad)
    with pytest.raises(ParseError, match=match):
        read_field(p)


def test_scalar_box_in_sidecar(tmp_path):
    g = GridSpec(2, 4.0, 16)
    p = tmp_path / "g.bin"
    write_field(p, gaussian(g))
    with open(sidecar_path(p), "w") as fh:
        fh.write("n = 2\nN = 16\nL = 4.0\nt = 0.0\n")
    assert read_field(p).grid == g


@pytest.mark.parametrize("body,match", [
    ("i,re,im\n", "header"),
    ("index,re,im\n0,1.0\n", "malformed"),
    ("index,re,im\n99,1.0,0.0\n", "out of range"),
    ("index,re,im\n0,1.0,0.0\n", "missing"),
])
def test_bad_csv(tmp_path, body, match):
    p = tmp_path / "f.csv"
    p.write_text(body)
    with pytest.raises(ParseError, match=match):
        read_field_csv(p, GridSpec(1, 1.0, 16))
