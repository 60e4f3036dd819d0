import math
from dataclasses import replace

import pytest

from riesz_renorm import closed_forms as cf
from riesz_renorm.errors import DomainError
from riesz_renorm.geometry import Circle, Ellipse, PlanarDisk, RevolutionTorus, Sphere
from riesz_renorm.renormalization import (
    TUBE_CUBIC,
    TUBE_LINEAR,
    RenormConfig,
    expansion_check,
    knot_energy,
    knot_potential,
    log_counterterm,
    surface_energy,
    surface_potential,
    tube_cubic_coefficient,
    tube_energy,
    tube_linear_coefficient,
    tube_series_residual,
)


@pytest.mark.parametrize("R, a", [(1.2, math.pi), (math.sqrt(2), 0.0), (2.0, 1.0), (4.0, 2.5)])
def test_torus_potential_matches_closed_form(R, a):
    res = surface_potential(RevolutionTorus(R), a, 0.0)
    assert res.value == pytest.approx(float(cf.torus_potential_closed(R, a)), abs=1e-5)
    assert res.fit.residual < 1e-4


def test_potential_scales_like_inverse_length_squared():
    T1, T3 = RevolutionTorus(2.0), RevolutionTorus(2.0, scale=3.0)
    assert surface_potential(T3, 0.7, 0.0).value == pytest.approx(surface_potential(T1, 0.7, 0.0).value / 9, abs=1e-6)


@pytest.mark.parametrize("r", [0.5, 1.0, 7.0])
def test_sphere_potential_vanishes(r):
    for u, v in [(0.2, 0.0), (1.9, 3.0)]:
        assert abs(surface_potential(Sphere(r), u, v).value) < 1e-6 / min(r, 1) ** 2


def test_sphere_energy_vanishes():
    assert abs(surface_energy(Sphere(2.0)).value) < 1e-4


def test_torus_energy_matches_closed_form():
    rep = surface_energy(RevolutionTorus(2.0))
    assert rep.value == pytest.approx(cf.torus_energy_closed(2.0), rel=1e-5)
    assert rep.method == "numeric-renormalized"


def test_off_surface_point_rejected():
    with pytest.raises(DomainError):
        surface_potential(RevolutionTorus(2.0), 0.0, 0.0, point=(0.0, 0.0, 0.0))


def test_open_surface_energy_rejected():
    from riesz_renorm.geometry import ParamSurface
    import numpy as np

    patch = ParamSurface(lambda u, v: np.stack([u, v, 0 * u], axis=-1), (0, 1), (0, 1), (False, False))
    with pytest.raises(DomainError):
        surface_energy(patch)


@pytest.mark.parametrize("mode", ["chord", "arc"])
@pytest.mark.parametrize("r", [1.0, 5.0])
def test_circle_knot_potential_vanishes(mode, r):
    assert abs(knot_potential(Circle(r), 0.3, mode=mode).value) < 1e-8


def test_knot_cutoffs_agree_on_an_ellipse():
    E = Ellipse(1.5, 1.0)
    chord = knot_potential(E, 0.4, mode="chord").value
    arc = knot_potential(E, 0.4, mode="arc").value
    assert chord == pytest.approx(arc, abs=1e-7)


def test_ellipse_knot_energy_positive():
    assert knot_energy(Ellipse(1.5, 1.0)).value > 0.1


def test_log_counterterm_zero_at_umbilic():
    assert log_counterterm(0.0, 0.1) == 0.0
    assert log_counterterm(1.0, 1.0) == 0.0


def test_config_round_trip():
    cfg = replace(RenormConfig(), ladder_top=0.15, basis=("1", "eps"))
    assert RenormConfig.from_dict(cfg.to_dict()) == cfg


def test_disk_expansion():
    chk = expansion_check(PlanarDisk(2.0), -4)
    assert chk.fit["eps^-2"] == pytest.approx(math.pi * 4 * math.pi, rel=1e-6)
    assert chk.fit["eps^-1"] == pytest.approx(-2 * 4 * math.pi, rel=1e-5)


def test_circle_expansion():
    chk = expansion_check(Circle(2.0), -2)
    assert chk.fit["eps^-1"] == pytest.approx(8 * math.pi, rel=1e-6)
    assert abs(chk.fit["1"]) < 1e-4


def test_expansion_rejects_wrong_exponent():
    with pytest.raises(DomainError):
        expansion_check(Circle(1.0), -4)
    with pytest.raises(DomainError):
        expansion_check(Sphere(1.0), -4)


def test_tube_series():
    assert tube_energy(0.5) == pytest.approx(cf.torus_energy_closed(2.0))
    assert tube_linear_coefficient() == pytest.approx(TUBE_LINEAR, rel=1e-6)
    assert tube_cubic_coefficient() == pytest.approx(TUBE_CUBIC, rel=1e-2)
    # the residual after two terms shrinks like eps^3
    r1, r2 = tube_series_residual(0.02), tube_series_residual(0.01)
    assert r1 / r2 == pytest.approx(8.0, rel=1e-2)
    with pytest.raises(DomainError):
        tube_energy(1.0)
