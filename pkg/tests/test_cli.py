from __future__ import annotations

import subprocess
import sys

import pytest

from cubicpts import cli, corpus_path

FERMAT = str(corpus_path("fermat"))
C37 = str(corpus_path("37a"))


def run(capsys, *args):
    code = cli.main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_points(capsys, tmp_path):
    code, out, _ = run(capsys, "points", "--curve", FERMAT, "--B", "10")
    assert code == 0 and out == "B,N\n10,3\n"
    code, out, _ = run(capsys, "points", "--curve", C37, "--B", "100", "--table", "10,50", "--diagnostic",
                       "--out", str(tmp_path))
    assert code == 0 and out.startswith("B,N\n10,")
    assert "B,N,coeff_height,ratio" in out
    assert (tmp_path / "37a-points.csv").read_text() == out


def test_heights(capsys):
    code, out, _ = run(capsys, "heights", "--curve", C37, "--point", "[0,0,1]")
    assert code == 0
    header, row = out.splitlines()
    assert header == "point,h_naive,h_x,h_hat,tol"
    assert abs(float(row.split(",")[-2]) - 0.0511114082) < 1e-8


def test_descent(capsys):
    code, out, _ = run(capsys, "descent", "--curve", C37, "--m", "2", "--B", "100")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "label,size,representative" and len(lines) == 3


def test_detmethod_writes_certificates(capsys, tmp_path):
    code, out, _ = run(capsys, "detmethod", "--curve", C37, "--m", "1", "--a", "1", "--b", "1",
                       "--B", "200", "--out", str(tmp_path))
    assert code == 0 and "status: PASS" in out
    certs = sorted(tmp_path.glob("*.cert"))
    assert len(certs) == 1 and certs[0].read_text().endswith("status: PASS\n")


def test_theorem_table_is_deterministic(capsys):
    args = ("theorem", "--curve", FERMAT, "--B-table", "10,100")
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second and first[0] == 0
    lines = first[1].splitlines()
    assert lines[0] == cli.THEOREM_HEADER and len(lines) == 3
    assert all(line.split(",")[-2] == "PASS" for line in lines[1:])


def test_lattice(capsys):
    code, out, _ = run(capsys, "lattice", "--curve", str(corpus_path("389a")), "--B-table", "10,100")
    assert code == 0
    assert out.startswith("B,N,h_max") and "j,M_j,exponent,ratio" in out


def test_forced_prime_exit_code(capsys, tmp_path):
    code, _, err = run(capsys, "detmethod", "--curve", str(corpus_path("389a")), "--a", "1", "--b", "1",
                       "--B", "1000", "--force-prime", "5", "--out", str(tmp_path))
    assert code == 1 and "failing certificate:" in err and str(tmp_path) in err


@pytest.mark.parametrize(
    "args",
    [
        ["points", "--curve", FERMAT, "--B", "10", "--bogus"],
        ["points", "--curve", "/nonexistent.curve", "--B", "10"],
        ["heights", "--curve", C37, "--point", "[1,1,1]"],
        ["heights", "--curve", C37, "--point", "1 2"],
        ["detmethod", "--curve", C37, "--B", "2"],
        ["detmethod", "--curve", C37, "--B", "100", "--m", "2", "--a", "1", "--b", "1"],
        ["descent", "--curve", C37, "--m", "0", "--B", "10"],
        ["theorem", "--curve", C37, "--B", "100", "--tol", "0"],
    ],
)
def test_usage_errors_exit_two(capsys, args):
    assert run(capsys, *args)[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cubicpts", "points", "--curve", FERMAT, "--B", "5"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "B,N\n5,3\n"


def test_envelopes():
    assert cli.theorem_envelope(100, 1, 0) > 0
    assert cli.log_power_envelope(1000, 0)[0] == 3
    cfg = cli.RunConfig("theorem", FERMAT, B=1000, m=2)
    assert cfg.default_ab() == (7, 4)
    with pytest.raises(cli.ConfigError):
        cli.RunConfig("theorem", FERMAT, B=1000, m=2, a=1, b=1).validate()
