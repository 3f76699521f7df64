import csv
import io
import json
import subprocess
import sys

import pytest

from kfree.asymptotics import PowerLawFit, ResidualSeries
from kfree.cli import main, parse_grid, UsageError
from kfree.diffraction import IntensityResult
from kfree.special import KfreeConstants


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _csv_body(text):
    return list(csv.reader(line for line in io.StringIO(text) if not line.startswith("#")))


def test_constants_json(capsys):
    code, out, _ = run(capsys, "constants", "--k", "2")
    assert code == 0
    const = KfreeConstants.from_dict(json.loads(out))
    assert const.k == 2
    assert abs(float(const.c_k.value) - 2.7025319399809961) < 1e-15
    assert const.c_k.tail <= 1e-30


def test_constants_bad_k(capsys):
    code, _, err = run(capsys, "constants", "--k", "1")
    assert code == 2
    assert "k must be ≥ 2" in err


def test_constants_unreachable_tail(capsys):
    code, _, err = run(capsys, "constants", "--k", "2", "--tail", "1e-200")
    assert code == 3
    assert "precision cap" in err


def test_constants_other_formats(capsys):
    code, out, _ = run(capsys, "constants", "--k", "3", "--format", "csv")
    rows = _csv_body(out)
    assert rows[0] == ["name", "value", "tail"] and len(rows) == 4
    code, out, _ = run(capsys, "--format", "table", "constants", "--k", "3")
    assert code == 0 and "gamma_k" in out


def test_intensity_direct(capsys):
    code, out, _ = run(capsys, "intensity", "--k", "2", "--eps", "0.001", "--method", "direct")
    assert code == 0
    d = json.loads(out)
    assert {"value", "tail", "cutoffs", "method"} <= set(d)
    r = IntensityResult.from_dict(d)
    assert r.method == "direct-bmp" and str(r.epsilon) == "1/1000"


def test_intensity_other_methods(capsys):
    _, a, _ = run(capsys, "intensity", "--k", "2", "--N", "10", "--method", "via-zk")
    _, b, _ = run(capsys, "intensity", "--k", "2", "--N", "10", "--method", "definition")
    ra, rb = IntensityResult.from_dict(json.loads(a)), IntensityResult.from_dict(json.loads(b))
    assert ra.value.agrees_with(rb.value)
    code, _, err = run(capsys, "intensity", "--k", "2", "--method", "direct")
    assert code == 2


def test_scan_shape_and_fit(capsys):
    code, out, _ = run(capsys, "scan", "--k", "3", "--eps", "1e-3:1e-1:5", "--log", "--tail", "1e-10")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "epsilon,Z,tail,method"
    rows = _csv_body(out)[1:]
    assert len(rows) == 5 and all(r[3] == "direct-bmp" for r in rows)
    assert float(rows[0][0]) == 1e-3 and float(rows[-1][0]) == pytest.approx(0.1)
    footer = [line for line in lines if line.startswith("#")]
    assert footer[0].startswith("# fit exponent=")
    # 17 significant digits
    assert all(len(r[1].replace(".", "").lstrip("0").split("e")[0]) <= 17 for r in rows)


def test_scan_json_roundtrip(capsys):
    code, out, _ = run(capsys, "scan", "--k", "3", "--eps", "1e-3:1e-1:5", "--log", "--tail", "1e-10", "--format", "json")
    d = json.loads(out)
    fit = PowerLawFit.from_dict(d["fit"])
    assert fit.is_consistent()
    assert [IntensityResult.from_dict(r).method for r in d["rows"]] == ["direct-bmp"] * 5


def test_scan_fit_skipped_for_short_grid(capsys):
    code, out, _ = run(capsys, "scan", "--k", "2", "--eps", "0.1:0.3:3", "--tail", "1e-10")
    assert code == 0
    assert "# fit skipped" in out


def test_scan_deterministic(tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert main(["scan", "--k", "3", "--eps", "1e-3:1e-1:5", "--log", "--tail", "1e-10", "--output", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--level", "quick", "--format", "json")
    assert code == 0
    checks = json.loads(out)["checks"]
    assert {c["name"] for c in checks} == {"resummation", "sandwich", "cross-form", "convolution", "constant-identity"}
    assert all(c["passed"] for c in checks)


def test_walfisz(capsys):
    code, out, _ = run(capsys, "walfisz", "--x", "1e3:1e6:4", "--log")
    assert code == 0
    rows = _csv_body(out)
    assert rows[0] == ["x", "exact", "main", "residual", "normalized"]
    assert [int(float(r[1])) for r in rows[1:]] == [608, 6083, 60794, 607926]
    code, out, _ = run(capsys, "walfisz", "--x", "1e3:1e6:4", "--log", "--format", "json")
    assert ResidualSeries.from_dict(json.loads(out)).exact[-1] == 607926


def test_sieve_limit_flag(capsys):
    code, _, err = run(capsys, "--sieve-limit", "1000", "walfisz", "--x", "1e3:1e5:3", "--log")
    assert code == 3 and "sieve limit" in err
    code, _, _ = run(capsys, "walfisz", "--x", "1e3:1e5:3", "--log", "--sieve-limit", "100000")
    assert code == 0


def test_usage_errors(capsys):
    assert run(capsys, "scan", "--k", "2", "--eps", "1e-3:1e-2")[0] == 2
    assert run(capsys, "scan", "--k", "2", "--eps", "0:1e-2:3", "--log")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "--threads", "0", "verify")[0] == 2


def test_parse_grid():
    assert parse_grid("1e-4:1e-2:3", True) == pytest.approx([1e-4, 1e-3, 1e-2])
    assert parse_grid("0.5", False) == [0.5]
    with pytest.raises(UsageError):
        parse_grid("a:b:c", False)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "kfree", "constants", "--k", "3", "--format", "csv"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("name,value,tail")
