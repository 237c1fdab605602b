import io
import json
import os

import numpy as np
import pytest

from schrodrift import cli
from schrodrift.propagator import GridSpec, gaussian, read_field, write_field


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def problem(tmp_path, doc, name="p.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def test_analyze_ex11():
    code, out, _ = run("analyze", "--fixture", "ex-1.1", "--workers", "1")
    doc = json.loads(out)
    assert code == 0
    assert doc["D"] == 5 and doc["hypothesis"] == "A" and doc["case"] == "Thm1.3-i"
    assert doc["pair_r"] == pytest.approx(2.8)


def test_analyze_kolmogorov_pair():
    code, out, _ = run("analyze", "--fixture", "kolmogorov-m1")
    doc = json.loads(out)
    assert (code, doc["D"], doc["pair_r"]) == (0, 4, 3.0)


def test_analyze_explicit_pair():
    code, out, _ = run("analyze", "--fixture", "kolmogorov-m1", "--pair-r", "3.5")
    assert code == 0 and json.loads(out)["strichartz_pair"]["r"] == 3.5
    code, _, err = run("analyze", "--fixture", "kolmogorov-m1", "--pair-r", "5")
    assert code == cli.EXIT_INPUT and "bound" in err


def test_hoermander_failure_exit_2(tmp_path):
    p = problem(tmp_path, {"n": 2, "Q": [1, 0, 0, 0], "B": [0, 0, 0, 0]})
    code, out, err = run("analyze", "--input", p)
    assert code == cli.EXIT_H
    assert json.loads(out)["hoermander"]["holds"] is False
    assert "(H) fails" in err


def test_inconclusive_exit_3():
    code, _, _ = run("analyze", "--fixture", "anomalous-7.4", "--tol", "residual=1e-9")
    assert code == cli.EXIT_INCONCLUSIVE


@pytest.mark.parametrize("doc,where", [
    ("{", "p.json:1:2"),
    ("[]", "top level"),
    ({"n": 0, "Q": [], "B": []}, "field 'n'"),
    ({"n": 2, "Q": [1, 0, 0], "B": [0, 0, 0, 0]}, "field 'Q'"),
    ({"n": 2, "Q": [[1, 0], [0]], "B": [0, 0, 0, 0]}, "Q[1]"),
    ({"n": 2, "Q": [1, 0, 0, "x"], "B": [0, 0, 0, 0]}, "Q[3]"),
    ({"n": 2, "Q": [1, 0, 0, 1]}, "'B'"),
    ({"n": 2, "Q": [1, 0, 0, 1], "B": [0, 0, 0, 0], "grid": {"dx": 1}}, "unknown keys"),
    ({"n": 2, "Q": [1, 2, 0, 1], "B": [0, 0, 0, 0]}, "p.json"),
])
def test_parse_errors_are_field_precise(tmp_path, doc, where):
    code, _, err = run("analyze", "--input", problem(tmp_path, doc))
    assert code == cli.EXIT_INPUT
    assert where in err


def test_nested_and_flat_matrices_agree(tmp_path):
    a = run("analyze", "--input", problem(tmp_path, {"n": 2, "Q": [[1, 0], [0, 0]],
                                                     "B": [[0, 0], [1, 0]], "label": "k"}, "a"))
    b = run("analyze", "--input", problem(tmp_path, {"n": 2, "Q": [1, 0, 0, 0],
                                                     "B": [0, 0, 1, 0], "label": "k"}, "b"))
    assert a == b and a[0] == 0


def test_unknown_fixture_and_missing_source():
    assert run("analyze", "--fixture", "nope")[0] == cli.EXIT_INPUT
    assert run("analyze")[0] == cli.EXIT_INPUT
    assert run("bogus-command")[0] == cli.EXIT_INPUT


def first_row(out, t):
    for line in out.splitlines()[1:]:
        cols = line.split(",")
        if float(cols[0]) == t:
            return [float(c) for c in cols]
    raise AssertionError(f"no row for t={t}")


def test_volume_known_rows():
    code, out, _ = run("volume", "--fixture", "kolmogorov-m1", "--t0", "1", "--t1", "2",
                       "--samples", "2")
    assert code == 0
    assert out.splitlines()[0] == "t,V,tD_exp_t_trB,min_tD_tDinf"
    assert first_row(out, 1.0)[1] == pytest.approx(1 / 12, abs=1e-10)
    _, out, _ = run("volume", "--fixture", "free-2d", "--t0", "1", "--t1", "2", "--samples", "2")
    assert first_row(out, 2.0)[1] == pytest.approx(4.0)
    _, out, _ = run("volume", "--fixture", "anomalous-7.4", "--t0", "1", "--t1", "2",
                    "--samples", "2")
    assert first_row(out, 1.0)[1] == pytest.approx((2 + np.cos(2) - 1) / 96, rel=1e-8)


def test_volume_domain_errors():
    assert run("volume", "--fixture", "free-1d", "--t0", "2", "--t1", "1")[0] == cli.EXIT_INPUT
    assert run("volume", "--fixture", "free-1d", "--samples", "1")[0] == cli.EXIT_INPUT


def test_volume_log_spacing_and_out(tmp_path):
    code, out, _ = run("volume", "--fixture", "free-1d", "--spacing", "log", "--t0", "0.01",
                       "--t1", "100", "--samples", "5", "--out", str(tmp_path))
    assert code == 0
    ts = [float(l.split(",")[0]) for l in out.splitlines()[1:]]
    assert ts == pytest.approx([0.01, 0.1, 1, 10, 100])
    assert (tmp_path / "free-n1.volume.csv").read_text() == out


def test_output_is_byte_identical():
    a = run("analyze", "--fixture", "anomalous-7.4", "--workers", "1")
    b = run("analyze", "--fixture", "anomalous-7.4", "--workers", "4")
    assert a == b
    assert run("volume", "--fixture", "ex-1.1") == run("volume", "--fixture", "ex-1.1")


def test_verify_volume(tmp_path):
    code, out, _ = run("verify", "--fixture", "kolmogorov-m1", "--suite", "volume",
                       "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["passed"]
    assert sorted(os.listdir(tmp_path)) == ["kolmogorov-m1.volume.csv",
                                            "kolmogorov-m1.volume.json"]


def test_verify_group_free_1d():
    code, out, _ = run("verify", "--fixture", "free-1d", "--suite", "group")
    assert code == 0 and json.loads(out)["passed"]


def test_verify_strichartz_inadmissible():
    code, _, err = run("verify", "--fixture", "kolmogorov-m1", "--suite", "strichartz",
                       "--pair-r", "5")
    assert code == cli.EXIT_INPUT and "error" in err


def test_verify_failure_exit_5(tmp_path):
    # claiming the wrong dimension makes the volume suite fail
    doc = {"n": 2, "Q": [1, 0, 0, 0], "B": [0, 0, 1, 0], "expected": {"D": 3}}
    code, out, _ = run("verify", "--input", problem(tmp_path, doc), "--suite", "volume")
    assert code == cli.EXIT_FAILED and not json.loads(out)["passed"]


def test_propagate_zero_time_round_trip(tmp_path):
    g = GridSpec(1, 20.0, 256)
    src = tmp_path / "in.bin"
    write_field(src, gaussian(g, 3.0, omega=0.2))
    code, out, _ = run("propagate", "--fixture", "free-1d", "--field", str(src), "--t", "0",
                       "--out", str(tmp_path), "--prefix", "r")
    assert code == 0
    back = read_field(tmp_path / "r.t0.bin")
    assert back.samples.tobytes() == read_field(src).samples.tobytes()


def test_propagate_preserves_norm():
    code, out, _ = run("propagate", "--fixture", "free-1d", "--t", "0,1,-1")
    assert code == 0
    rows = [list(map(float, l.split(","))) for l in out.splitlines()[1:]]
    assert [r[0] for r in rows] == [0, 1, -1]
    for r in rows:
        assert r[1] == pytest.approx(rows[0][1], rel=1e-6)


def test_propagate_guard_exit_4():
    code, _, err = run("propagate", "--fixture", "kolmogorov-m1", "--t", "50")
    assert code == cli.EXIT_GUARD and "error" in err


def test_propagate_dimension_mismatch(tmp_path):
    src = tmp_path / "in.bin"
    write_field(src, gaussian(GridSpec(1, 20.0, 64), 3.0))
    assert run("propagate", "--fixture", "free-2d", "--field", str(src))[0] == cli.EXIT_INPUT


def test_fixtures_export_round_trip(tmp_path):
    code, out, _ = run("fixtures", "--export", "fan-n3-k2")
    assert code == 0
    a = run("analyze", "--input", problem(tmp_path, out))
    b = run("analyze", "--fixture", "fan-n3-k2")
    assert json.loads(a[1])["D"] == json.loads(b[1])["D"] == 5
    code, out, _ = run("fixtures")
    assert "kolmogorov" in json.loads(out)


def test_tol_flag_validation():
    assert run("analyze", "--fixture", "free-1d", "--tol", "bogus")[0] == cli.EXIT_INPUT
    assert run("analyze", "--fixture", "free-1d", "--tol", "zzz=1")[0] == cli.EXIT_INPUT


def test_dumps_format():
    s = cli.dumps({"b": 1 / 3, "a": float("inf")})
    assert s.index('"a"') < s.index('"b"')
    assert "0.333333333333" in s and "3333333333333" not in s
