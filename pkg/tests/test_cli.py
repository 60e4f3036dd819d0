import csv
import io
import json
import math
import subprocess
import sys

import pytest

from riesz_renorm.cli import RunConfig, build_parser, main, run_config_from_args


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_energy_closed(capsys):
    code, out, _ = run(capsys, "energy", "--torus", "1.41421356", "--method", "closed")
    rep = json.loads(out)
    assert code == 0
    # the quoted 48.9724 is a rounding of pi^3 (6 log 2 - 1) / 2 = 48.97260...
    assert rep["value"] == pytest.approx(48.9724, abs=5e-4)
    assert rep["value"] == pytest.approx(math.pi**3 * (6 * math.log(2) - 1) / 2, rel=1e-14)
    assert set(rep) >= {"surface", "R", "method", "value", "err_est", "config"}


def test_energy_both(capsys):
    code, out, _ = run(capsys, "energy", "--torus", "2", "--method", "both")
    rep = json.loads(out)
    assert rep["closed"]["value"] == pytest.approx(52.074, abs=1e-3)
    assert abs(rep["difference"]) <= 0.05


def test_sphere_numeric_energy(capsys):
    code, out, _ = run(capsys, "energy", "--sphere", "1", "--method", "numeric")
    assert code == 0 and abs(json.loads(out)["value"]) <= 1e-4


def test_potential_csv(capsys):
    code, out, _ = run(capsys, "potential", "--torus", str(math.sqrt(2)), "--alpha", "0,0.7,-0.7")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["alpha", "closed", "numeric", "abs_diff"]
    assert float(rows[1][1]) == pytest.approx(0.21283, abs=1e-5)
    assert rows[2][1] == rows[3][1]
    assert all(float(r[3]) < 1e-4 for r in rows[1:])


def test_potential_at_pi(capsys):
    _, out, _ = run(capsys, "potential", "--torus", "2", "--alpha", str(math.pi), "--no-numeric")
    assert float(out.splitlines()[1].split(",")[1]) == pytest.approx(2.2846314312, abs=1e-9)


def test_minimize(capsys):
    _, out, _ = run(capsys, "minimize")
    assert json.loads(out)["Rstar"] == pytest.approx(1.41421356, abs=1e-8)


def test_sweep_argmin(capsys):
    _, out, _ = run(capsys, "sweep", "--from", "1.1", "--to", "3", "--steps", "20")
    rows = [list(map(float, r)) for r in list(csv.reader(io.StringIO(out)))[1:]]
    best = min(rows, key=lambda r: r[1])[0]
    assert best == min((r[0] for r in rows), key=lambda x: abs(x - math.sqrt(2)))


def test_fit_disk(capsys):
    _, out, _ = run(capsys, "fit", "--disk", "--lambda", "-4")
    c = json.loads(out)["fit"]["coefficients"]
    assert c["eps^-2"] == pytest.approx(9.8696, abs=1e-4)
    assert c["eps^-1"] == pytest.approx(-12.566, abs=1e-3)


def test_tube_and_clifford(capsys):
    code, out, _ = run(capsys, "tube", "--format", "json")
    assert code == 0 and json.loads(out)["linear_coefficient"] > 0
    _, out, _ = run(capsys, "clifford")
    assert json.loads(out)["ratio"] == pytest.approx(math.sqrt(2), abs=1e-9)


@pytest.mark.parametrize("argv", [
    ["energy", "--torus", "0.8"],
    ["energy"],
    ["fit", "--circle", "--lambda", "-4"],
    ["sweep", "--from", "3", "--to", "2"],
    ["minimize", "--bracket", "1.5,3"],
    ["tube", "--eps", "1.5"],
    ["verify", "--criteria", "42"],
    ["clifford", "--pole", "1,0,1,0"],
    ["energy", "--torus", "2", "--format", "csv"],
    ["energy", "--torus", "2", "--quad-rel-tol", "0.5"],
])
def test_validation_exit_code(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_numeric_failure_exit_code(capsys):
    code, _, err = run(capsys, "potential", "--torus", "1.2", "--alpha", "3.14159",
                       "--angular-nodes", "4", "--radial-order", "2")
    assert code == 3 and "numeric failure" in err


def test_config_echo_round_trip(capsys):
    argv = ["fit", "--torus", "2", "--lambda", "-4", "--eps", "0.3,0.15,0.075,0.0375,0.01875,0.009375,0.0046875",
            "--ladder-top", "0.1", "--quad-rel-tol", "1e-8"]
    rc = run_config_from_args(build_parser().parse_args(argv))
    _, out, _ = run(capsys, *argv)
    echoed = RunConfig.from_dict(json.loads(out)["config"])
    assert echoed == rc
    assert echoed.renorm_config() == rc.renorm_config()


def test_threads_do_not_change_bytes(capsys, monkeypatch):
    argv = ["potential", "--torus", "1.5", "--alpha", "0,2", "--format", "json"]
    _, one, _ = run(capsys, *argv, "--threads", "1")
    _, three, _ = run(capsys, *argv, "--threads", "3")
    monkeypatch.setenv("RENORM_THREADS", "2")
    _, env, _ = run(capsys, *argv)
    assert one == three == env


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("RENORM_THREADS", "many")
    code, _, _ = run(capsys, "minimize")
    assert code == 2


def test_out_file(tmp_path, capsys):
    path = tmp_path / "m.json"
    code, out, _ = run(capsys, "minimize", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["Estar"] == pytest.approx(48.9726, abs=1e-4)


def test_floats_have_17_significant_digits(capsys):
    _, out, _ = run(capsys, "minimize")
    assert '"Rstar": 1.4142135623730949e+00' in out or '"Rstar": 1.4142135623730951e+00' in out


def test_verify_subset(capsys):
    code, out, err = run(capsys, "verify", "--criteria", "7,9,10")
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert [c["criterion"] for c in rep["criteria"]] == [7, 9, 10]
    assert "PASS" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "riesz_renorm.cli", "minimize"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["Rstar"] == pytest.approx(math.sqrt(2), abs=1e-8)
