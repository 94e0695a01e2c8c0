import csv
import io
import json
import subprocess
import sys

import pytest

from gate_energy.cli import run


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), stdout=buf)
    return code, buf.getvalue()


def rows(text):
    body = [l for l in text.splitlines() if l and not l.startswith("#")]
    return list(csv.DictReader(body))


def test_displacement_sweep_eps():
    code, out = call("displacement", "--z", "1", "--E", "4", "--sweep-eps", "1e-8:1e-2:25")
    assert code == 0
    r = rows(out)
    assert len(r) == 25
    assert list(r[0]) == ["eps", "E", "nu", "ebar_star", "bound", "term1", "term2", "vacuous_flag"]
    assert "# energy unit: hbar*omega = 1" in out


def test_displacement_sweep_E_monotone():
    code, out = call("displacement", "--z", "1", "--eps", "1e-6", "--sweep-E", "1:10:19")
    b = [float(x["bound"]) for x in rows(out)]
    assert code == 0 and len(b) == 19
    assert all(y > x for x, y in zip(b, b[1:]))


def test_squeezing_single_row_and_pmf():
    code, out = call("squeezing", "--xi", "0.5", "--E", "4.5", "--eps", "1e-6", "--input", "coherent")
    r = rows(out)
    assert code == 0 and len(r) == 1
    assert abs(float(r[0]["ebar_star"]) - 24) <= 0.2 * 24
    code, out = call("squeezing", "--xi", "0.5", "--E", "4.5", "--eps", "1e-6", "--emit-pmf")
    assert "# table: pmf" in out
    assert "n,P" in out


def test_twelve_significant_digits():
    _, out = call("bounded", "--dim", "2", "--eps", "1e-4")
    r = rows(out)[0]
    assert r["bound"] == "%.12g" % (1 / (8 * 1e-2) - 2e-2)


def test_other_commands():
    for argv in (["bounded", "--dim", "4", "--gate", "random", "--eps", "1e-3", "--seed", "3"],
                 ["emin", "--dim", "5", "--eps", "0.1", "--points", "4"],
                 ["emin", "--dim", "6", "--eps", "0.2", "--state", "remark", "--points", "4"],
                 ["shift-model", "--n0", "20", "--L", "8"]):
        code, out = call(*argv)
        assert code == 0, argv
        assert rows(out)


def test_json_output():
    code, out = call("--format", "json", "bounded", "--dim", "3", "--eps", "1e-4")
    doc = json.loads(out)
    assert code == 0 and doc["command"] == "bounded"
    assert doc["rows"][0]["dim"] == 3


def test_sweep_sets():
    for name, n in (("displacement-energy", 19), ("displacement-eps", 25), ("squeezing-probes", 39)):
        code, out = call("sweep", "--set", name)
        assert code == 0 and len(rows(out)) == n


def test_determinism():
    argv = ["squeezing", "--xi", "0.5", "--E", "4.5", "--sweep-eps", "1e-8:1e-4:5", "--input", "number"]
    assert call(*argv) == call(*argv)
    assert call("--threads", "3", *argv) == call(*argv)


@pytest.mark.parametrize("argv", [
    ["displacement", "--z", "1"],
    ["displacement", "--z", "1", "--E", "0.3", "--eps", "1e-6"],
    ["displacement", "--z", "1", "--E", "4", "--sweep-eps", "1e-8:1e-4"],
    ["squeezing", "--xi", "-1", "--E", "4.5", "--eps", "1e-6"],
    ["bounded", "--dim", "1", "--eps", "0.1"],
    ["nonsense"],
    [],
])
def test_usage_errors_exit_2(argv, capsys):
    code, out = call(*argv)
    assert code == 2
    assert out == ""


def test_vacuous_rows_exit_zero():
    code, out = call("displacement", "--z", "1", "--E", "4", "--eps", "0.5")
    assert code == 0
    assert rows(out)[0]["vacuous_flag"] == "1"


def test_module_entry_point(tmp_path):
    target = tmp_path / "out.csv"
    proc = subprocess.run([sys.executable, "-m", "gate_energy", "-o", str(target),
                           "bounded", "--dim", "2", "--eps", "0.01"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "delta_E" in target.read_text()
