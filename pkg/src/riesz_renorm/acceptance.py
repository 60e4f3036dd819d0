"""Acceptance criteria shared by ``riesz-renorm verify`` and the test suite.

Every criterion returns a :class:`CriterionResult` whose ``details`` hold only
computed numbers, never timings, so reports are reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import closed_forms as cf
from .geometry import Circle, PlanarDisk, RevolutionTorus, Sphere
from .moebius import Inversion, Similarity, clifford_image, compose_surface, random_isometry
from .quadrature import cutoff_potential_integral
from .renormalization import (
    TUBE_CUBIC,
    TUBE_LINEAR,
    RenormConfig,
    expansion_check,
    knot_energy,
    knot_potential,
    surface_energy,
    surface_potential,
    tube_cubic_coefficient,
    tube_linear_coefficient,
)
from .serialize import dumps

SQRT2 = math.sqrt(2.0)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: Dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": bool(self.passed), "details": self.details}

    def line(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.passed else 'FAIL'}] {self.title}"


def _config(workers: int, **overrides) -> RenormConfig:
    base = RenormConfig()
    return replace(base, workers=workers, quad=replace(base.quad, workers=workers), **overrides)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def criterion_1(workers: int = 1) -> CriterionResult:
    cfg = _config(workers)
    rows, ok = [], True
    for R in (1.2, SQRT2, 2.0, 3.0):
        rep = surface_energy(RevolutionTorus(R), cfg)
        closed = cf.torus_energy_closed(R)
        dev = _rel(rep.value, closed)
        ok &= dev <= 1e-3
        rows.append({"R": R, "numeric": rep.value, "closed": closed, "rel_dev": dev})
    return CriterionResult(1, "numeric torus energy matches the closed form within 0.1%", ok, {"rows": rows})


# a coarser outer rule is plenty for locating the minimum on a 40-point grid
GRID_OVERRIDES = {"outer_start": 8, "energy_rel_tol": 1e-4}


def criterion_2(workers: int = 1) -> CriterionResult:
    R_star, E_star = cf.minimize_torus_energy()
    cfg = _config(workers, **GRID_OVERRIDES)
    grid = np.linspace(1.1, 3.0, 40)
    energies = [surface_energy(RevolutionTorus(float(R)), cfg).value for R in grid]
    argmin = float(grid[int(np.argmin(energies))])
    checks = {
        "R_star": abs(R_star - SQRT2) <= 1e-8,
        "E_star": abs(E_star - cf.CLIFFORD_ENERGY) <= 1e-8,
        "grid_argmin": abs(argmin - SQRT2) <= 0.05,
    }
    return CriterionResult(2, "energy minimizer is sqrt(2)", all(checks.values()), {
        "R_star": R_star, "E_star": E_star, "E_expected": cf.CLIFFORD_ENERGY,
        "grid": grid.tolist(), "grid_energy": energies, "grid_argmin": argmin, "checks": checks,
    })


POTENTIAL_PAIRS = [(R, a) for R in (1.2, SQRT2, 2.0, 3.0, 5.0) for a in (0.0, math.pi / 3, 2 * math.pi / 3, math.pi)]


def criterion_3(workers: int = 1, pairs=POTENTIAL_PAIRS) -> CriterionResult:
    cfg = _config(workers)
    rows, worst = [], 0.0
    for R, a in pairs:
        num = surface_potential(RevolutionTorus(R), a, 0.0, cfg).value
        closed = float(cf.torus_potential_closed(R, a))
        worst = max(worst, abs(num - closed))
        rows.append({"R": R, "alpha": a, "numeric": num, "closed": closed, "abs_diff": abs(num - closed)})
    return CriterionResult(3, "pointwise potential within 1e-4", worst <= 1e-4, {"rows": rows, "max_abs_diff": worst})


CUTOFF_PAIRS = [(R, a) for R in (SQRT2, 2.0, 3.0) for a in (0.0, math.pi / 2, math.pi)]
CUTOFF_EPS = (0.2, 0.1, 0.05)


def criterion_4(workers: int = 1) -> CriterionResult:
    cfg = _config(workers).quad
    rows, C = [], 0.0
    for R, a in CUTOFF_PAIRS:
        diffs = []
        for eps in CUTOFF_EPS:
            num = cutoff_potential_integral(RevolutionTorus(R), (a, 0.0), eps, -4.0, cfg).value
            diffs.append(num - float(cf.torus_cutoff_potential_closed(R, a, eps)))
        e = np.asarray(CUTOFF_EPS)
        d = np.asarray(diffs)
        slope = float(np.dot(e, d) / np.dot(e, e))
        C = max(C, float(np.max(np.abs(d) / e)))
        rows.append({"R": R, "alpha": a, "eps": list(CUTOFF_EPS), "diff": diffs, "fitted_C": slope})
    return CriterionResult(4, "cutoff integral agrees with its expansion to C*eps, C <= 5", C <= 5.0,
                           {"rows": rows, "C": C})


def criterion_5(workers: int = 1) -> CriterionResult:
    cfg = _config(workers)
    sphere_pts = [(math.pi / 2, 0.0), (0.7, 1.3), (2.9, 4.0), (0.05, 2.0)]
    sphere_V, sphere_E = [], []
    for r in (1.0, 2.5):
        S = Sphere(r)
        sphere_V += [surface_potential(S, u, v, cfg).value for u, v in sphere_pts]
        sphere_E.append(surface_energy(S, cfg).value)
    knot_V, knot_E = {}, {}
    for mode in ("chord", "arc"):
        K = Circle(1.0)
        knot_V[mode] = [knot_potential(K, t, cfg, mode).value for t in (0.0, 2.0, 4.5)]
        knot_E[mode] = knot_energy(K, cfg, mode).value
    worst_sphere = max(abs(x) for x in sphere_V + sphere_E)
    worst_knot = max(abs(x) for m in knot_V for x in knot_V[m] + [knot_E[m]])
    return CriterionResult(5, "zero oracles for round spheres and circles",
                           worst_sphere <= 1e-4 and worst_knot <= 1e-6, {
                               "sphere_potential": sphere_V, "sphere_energy": sphere_E,
                               "circle_potential": knot_V, "circle_energy": knot_E,
                               "max_sphere": worst_sphere, "max_circle": worst_knot,
                           })


def criterion_6(workers: int = 1) -> CriterionResult:
    cfg = _config(workers)
    out, ok = {}, True
    circ = expansion_check(Circle(1.0), -2, cfg=cfg)
    dev = {"eps^-1": abs(circ.fit["eps^-1"] - 4 * math.pi), "1": abs(circ.fit["1"])}
    ok &= max(dev.values()) <= 1e-4
    out["circle"] = {"fit": circ.fit.coefficients, "abs_dev": dev}
    disk = expansion_check(PlanarDisk(1.0), -4, cfg=cfg)
    dev = {k: disk.relative_deviation(k) for k in ("eps^-2", "eps^-1")}
    ok &= max(dev.values()) <= 5e-3
    out["disk"] = {"fit": disk.fit.coefficients, "predicted": disk.predicted, "rel_dev": dev}
    for R in (SQRT2, 2.0):
        tor = expansion_check(RevolutionTorus(R), -4, cfg=cfg)
        dev = {k: tor.relative_deviation(k) for k in ("eps^-2", "log", "1")}
        ok &= dev["eps^-2"] <= 5e-3 and dev["log"] <= 5e-3 and dev["1"] <= 1e-2
        out[f"torus_R={R:.17g}"] = {"fit": tor.fit.coefficients, "predicted": tor.predicted, "rel_dev": dev}
    return CriterionResult(6, "small-eps expansion coefficients of global cutoff energies", ok, out)


def criterion_7(workers: int = 1) -> CriterionResult:
    lin = tube_linear_coefficient((1e-2, 1e-3))
    cub = tube_cubic_coefficient()
    dl, dc = _rel(lin, TUBE_LINEAR), _rel(cub, TUBE_CUBIC)
    return CriterionResult(7, "tube series coefficients", dl <= 1e-3 and dc <= 1e-2, {
        "linear": lin, "linear_expected": TUBE_LINEAR, "linear_rel_dev": dl,
        "cubic": cub, "cubic_expected": TUBE_CUBIC, "cubic_rel_dev": dc,
    })


INVARIANCE_OVERRIDES = {"outer_start": 8, "energy_rel_tol": 1e-4}


def _rotation(axis, angle):
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * K @ K


def invariance_maps(T: RevolutionTorus):
    rot = _rotation((1.0, 2.0, 0.5), 0.9)
    maps = {f"scale {s:g}": Similarity(s, rot, (0.3, -1.0, 2.0)) for s in (0.5, 2.0, 10.0)}
    diam = T.diameter()
    direction = np.array([1.0, 0.3, 0.2]) / np.linalg.norm([1.0, 0.3, 0.2])
    # the center sits at least 5 diameters from every point of the torus
    dist = 5.0 * diam + 0.5 * diam
    maps["inversion"] = Inversion(dist * direction, dist)
    return maps


def criterion_8(workers: int = 1) -> CriterionResult:
    cfg = _config(workers, **INVARIANCE_OVERRIDES)
    out, ok = {}, True
    for R in (SQRT2, 2.0):
        T = RevolutionTorus(R)
        before = surface_energy(T, cfg).value
        rows = {}
        for name, m in invariance_maps(T).items():
            after = surface_energy(compose_surface(T, m), cfg).value
            dev = _rel(after, before)
            ok &= dev <= 1e-3
            rows[name] = {"energy": after, "rel_dev": dev}
        out[f"R={R:.17g}"] = {"before": before, "closed": cf.torus_energy_closed(R), "images": rows}
    return CriterionResult(8, "energy is invariant under similarities and inversions", ok, out)


def criterion_9(workers: int = 1) -> CriterionResult:
    w = cf.willmore_torus(SQRT2)
    argmin = cf.willmore_argmin(1.1, 3.0, 2001)
    ok = abs(w - 2 * math.pi**2) <= 1e-6 and abs(argmin - SQRT2) <= 1e-3
    return CriterionResult(9, "Willmore energy of T_sqrt2 is 2 pi^2 and minimal", ok,
                           {"willmore": w, "expected": 2 * math.pi**2, "argmin": argmin})


def criterion_10(workers: int = 1) -> CriterionResult:
    reports = [clifford_image()]
    rng = np.random.default_rng(20240611)
    reports += [clifford_image(isometry=random_isometry(rng)) for _ in range(3)]
    ratios = [r.ratio for r in reports]
    worst = max(abs(x - SQRT2) for x in ratios)
    return CriterionResult(10, "stereographic Clifford torus has ratio sqrt(2)", worst <= 1e-9, {
        "ratios": ratios, "max_abs_dev": worst, "max_residual": max(r.fit.max_residual for r in reports),
    })


def criterion_11(workers: int = 1) -> CriterionResult:
    """In-process probe: a cheap subset repeated, and with one versus several workers."""
    probe = POTENTIAL_PAIRS[::5]
    runs = [dumps(criterion_3(w, probe).to_dict()) for w in (1, 1, max(2, workers))]
    same = runs[0] == runs[1] == runs[2]
    return CriterionResult(11, "reports are byte-identical across runs and thread counts", same,
                           {"probe_runs": len(runs), "identical": same})


CRITERIA: Dict[int, Callable[[int], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_acceptance(numbers: Optional[Sequence[int]] = None, workers: int = 1,
                   progress: Optional[Callable[[CriterionResult], None]] = None) -> List[CriterionResult]:
    numbers = sorted(CRITERIA) if numbers is None else list(numbers)
    results = []
    for n in numbers:
        if n not in CRITERIA:
            raise ValueError(f"unknown criterion {n}")
        res = CRITERIA[n](workers)
        if progress is not None:
            progress(res)
        results.append(res)
    return results


def acceptance_report(results: Sequence[CriterionResult]) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "criteria": [r.to_dict() for r in results],
    }
