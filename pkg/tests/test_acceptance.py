"""Acceptance criteria 1-11, checked against full ``riesz-renorm verify`` runs.

The session fixture runs ``verify`` three times in fresh processes: twice with
one thread and once with three. Criterion 11 compares those outputs byte for
byte; criteria 1-10 read the first report.
"""

import json
import math
import subprocess
import sys
import time

import pytest

from conftest import ACCEPTANCE_LINES
from riesz_renorm import closed_forms as cf
from riesz_renorm.geometry import RevolutionTorus
from riesz_renorm.renormalization import surface_energy

SQRT2 = math.sqrt(2)


def _verify(threads):
    proc = subprocess.run([sys.executable, "-m", "riesz_renorm.cli", "verify", "--threads", str(threads)],
                          capture_output=True, text=True, timeout=3600)
    assert proc.returncode in (0, 1), proc.stderr
    return proc.stdout


@pytest.fixture(scope="session")
def runs():
    return [_verify(1), _verify(1), _verify(3)]


@pytest.fixture(scope="session")
def report(runs):
    rep = json.loads(runs[0])
    return {c["criterion"]: c for c in rep["criteria"]}


def record(number, passed, text):
    line = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def test_criterion_01_closed_form_energy(report):
    rows = report[1]["details"]["rows"]
    worst = max(r["rel_dev"] for r in rows)
    assert {round(r["R"], 12) for r in rows} == {1.2, round(SQRT2, 12), 2.0, 3.0}
    # independent recomputation of the reference values
    for r in rows:
        assert r["closed"] == pytest.approx(cf.torus_energy_closed(r["R"]), rel=1e-15)
    assert record(1, worst <= 1e-3, f"numeric vs closed energy, worst rel dev {worst:.2e} (tol 1e-3)")


@pytest.mark.parametrize("R", [1.2, SQRT2, 2.0, 3.0])
def test_criterion_01_runtime(R):
    t0 = time.perf_counter()
    surface_energy(RevolutionTorus(R))
    assert time.perf_counter() - t0 <= 60.0


def test_criterion_02_minimizer(report):
    d = report[2]["details"]
    ok = (abs(d["R_star"] - SQRT2) <= 1e-8
          and abs(d["E_star"] - math.pi**3 * (6 * math.log(2) - 1) / 2) <= 1e-8
          and abs(d["grid_argmin"] - SQRT2) <= 0.05
          and len(d["grid"]) == 40)
    assert record(2, ok, f"R* = {d['R_star']:.12f}, E* = {d['E_star']:.10f}, numeric grid argmin {d['grid_argmin']:.4f}")


def test_criterion_03_pointwise_potential(report):
    d = report[3]["details"]
    assert len(d["rows"]) == 20
    for r in d["rows"]:
        assert r["closed"] == pytest.approx(float(cf.torus_potential_closed(r["R"], r["alpha"])), rel=1e-14)
    worst = max(r["abs_diff"] for r in d["rows"])
    assert record(3, worst <= 1e-4, f"20 (R, alpha) pairs, max |V_num - V_closed| = {worst:.2e} (tol 1e-4)")


def test_criterion_04_cutoff_display(report):
    d = report[4]["details"]
    C = d["C"]
    assert all(r["eps"] == [0.2, 0.1, 0.05] for r in d["rows"])
    assert record(4, math.isfinite(C) and C <= 5.0, f"cutoff integral vs expansion, C = {C:.3f} (need <= 5)")


def test_criterion_05_zero_oracles(report):
    d = report[5]["details"]
    ok = d["max_sphere"] <= 1e-4 and d["max_circle"] <= 1e-6
    assert set(d["circle_energy"]) == {"chord", "arc"}
    assert record(5, ok, f"sphere max |.| {d['max_sphere']:.1e} (tol 1e-4), circle max |.| {d['max_circle']:.1e} (tol 1e-6)")


def test_criterion_06_expansions(report):
    d = report[6]["details"]
    circ = max(d["circle"]["abs_dev"].values())
    disk = max(d["disk"]["rel_dev"].values())
    tori = [v for k, v in d.items() if k.startswith("torus")]
    lead = max(max(t["rel_dev"]["eps^-2"], t["rel_dev"]["log"]) for t in tori)
    const = max(t["rel_dev"]["1"] for t in tori)
    ok = circ <= 1e-4 and disk <= 5e-3 and lead <= 5e-3 and const <= 1e-2
    assert record(6, ok, f"circle {circ:.1e} abs, disk {disk:.1e} rel, torus lead {lead:.1e} rel, constant {const:.1e} rel")


def test_criterion_07_tube_series(report):
    d = report[7]["details"]
    assert d["linear_expected"] == pytest.approx(3 * math.pi**3 * (math.log(2) + 1) / 4, rel=1e-15)
    assert d["cubic_expected"] == pytest.approx(math.pi**3 * (9 * math.log(2) - 11) / 16, rel=1e-15)
    ok = d["linear_rel_dev"] <= 1e-3 and d["cubic_rel_dev"] <= 1e-2
    assert record(7, ok, f"linear rel dev {d['linear_rel_dev']:.1e} (tol 1e-3), cubic {d['cubic_rel_dev']:.1e} (tol 1e-2)")


def test_criterion_08_invariance(report):
    d = report[8]["details"]
    devs = [img["rel_dev"] for tor in d.values() for img in tor["images"].values()]
    names = {n for tor in d.values() for n in tor["images"]}
    assert names == {"scale 0.5", "scale 2", "scale 10", "inversion"}
    assert len(d) == 2
    worst = max(devs)
    assert record(8, worst <= 1e-3, f"8 images of T_sqrt2 and T_2, worst rel dev {worst:.1e} (tol 1e-3)")


def test_criterion_09_willmore(report):
    d = report[9]["details"]
    ok = abs(d["willmore"] - 2 * math.pi**2) <= 1e-6 and abs(d["argmin"] - SQRT2) <= 1e-3
    assert record(9, ok, f"W(T_sqrt2) - 2pi^2 = {d['willmore'] - 2 * math.pi**2:.1e}, argmin {d['argmin']:.5f}")


def test_criterion_10_clifford(report):
    d = report[10]["details"]
    worst = d["max_abs_dev"]
    assert record(10, worst <= 1e-9, f"{len(d['ratios'])} projections, max |ratio - sqrt2| = {worst:.1e} (tol 1e-9)")


def test_criterion_11_determinism(runs, report):
    same_twice = runs[0] == runs[1]
    same_threads = runs[0] == runs[2]
    ok = same_twice and same_threads and report[11]["passed"]
    assert record(11, ok, f"verify twice identical: {same_twice}; 1 vs 3 threads identical: {same_threads}")


def test_verify_reports_overall_pass(runs):
    assert json.loads(runs[0])["passed"] is True
