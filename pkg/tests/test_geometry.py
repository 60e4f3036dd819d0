import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from riesz_renorm.errors import DegenerateChartError, DomainError
from riesz_renorm.geometry import (
    Circle,
    Ellipse,
    ParamSurface,
    PlanarDisk,
    RevolutionTorus,
    Sphere,
    chord_dist_sq,
    chord_dist_sq_theta_phi,
    chord_dist_sq_ts,
    numeric_curvature,
    torus_curvature,
)
from riesz_renorm.quadrature import integrate_chart

angles = st.floats(-math.pi, math.pi, allow_nan=False)
radii = st.floats(1.05, 6.0)


@given(R=radii, a=angles, v=st.floats(0, 2 * math.pi))
def test_numeric_curvature_matches_torus_formulas(R, a, v):
    T = RevolutionTorus(R)
    exact = torus_curvature(T, a, v)
    num = numeric_curvature(T, a, v)
    assert num.kappa1 == pytest.approx(exact.kappa1, abs=1e-7)
    assert num.kappa2 == pytest.approx(exact.kappa2, abs=1e-7)
    assert num.gauss == pytest.approx(math.cos(a) / (R + math.cos(a)), abs=1e-7)
    # outward normal
    assert np.allclose(num.normal, exact.normal, atol=1e-7)


def test_torus_outer_equator_data():
    d = torus_curvature(RevolutionTorus(2.0), 0.0)
    assert d.kappa1 == pytest.approx(1.0)
    assert d.kappa2 == pytest.approx(1 / 3)
    assert d.delta == pytest.approx(4 / 9)


def test_sphere_is_umbilic_everywhere():
    S = Sphere(2.5)
    for u, v in [(0.3, 1.0), (1.5, 4.0), (2.8, 0.1)]:
        d = numeric_curvature(S, u, v)
        assert d.kappa1 == pytest.approx(0.4, abs=1e-7)
        assert d.delta == pytest.approx(0.0, abs=1e-10)


def test_sphere_local_chart_avoids_the_pole():
    S = Sphere(1.0)
    T, u, v = S.local_chart(1e-9, 0.0)
    assert (u, v) == (pytest.approx(math.pi / 2), pytest.approx(0.0))
    assert np.allclose(T.chart(u, v), S.chart(1e-9, 0.0), atol=1e-12)


@given(R=radii, a=angles, u=angles, v=st.floats(-math.pi, math.pi))
def test_chord_forms_agree(R, a, u, v):
    T = RevolutionTorus(R)
    direct = float(np.sum((T.chart(u, v) - T.chart(a, 0.0)) ** 2))
    assert chord_dist_sq(T, a, u, v) == pytest.approx(direct, abs=1e-10)
    # the (t, s) and (theta, phi) forms need |u - a| <= pi
    w = a + math.remainder(u - a, 2 * math.pi)
    assert chord_dist_sq_ts(T, a, w, v) == pytest.approx(direct, abs=1e-9)
    assert chord_dist_sq_theta_phi(T, a, w, v) == pytest.approx(direct, abs=1e-9)


def test_torus_and_sphere_areas():
    assert integrate_chart(RevolutionTorus(2.0)).value == pytest.approx(8 * math.pi**2, rel=1e-12)
    assert integrate_chart(Sphere(1.5)).value == pytest.approx(9 * math.pi, rel=1e-9)


def test_gauss_bonnet_on_torus():
    T = RevolutionTorus(1.7)
    K = integrate_chart(T, lambda U, V: np.cos(U) / (1.7 + np.cos(U)))
    assert abs(K.value) < 1e-10


@pytest.mark.parametrize("R", [1.0, 0.5, -2.0])
def test_torus_needs_R_above_one(R):
    with pytest.raises(DomainError):
        RevolutionTorus(R)


def test_invalid_radii_rejected():
    with pytest.raises(DomainError):
        Sphere(0.0)
    with pytest.raises(DomainError):
        PlanarDisk(-1.0)


def test_degenerate_chart_detected():
    # a cone collapses at u = 0
    S = ParamSurface(lambda u, v: np.stack([u * np.cos(v), u * np.sin(v), u], axis=-1),
                     u_range=(0.0, 1.0), periodic=(False, True))
    with pytest.raises(DegenerateChartError):
        numeric_curvature(S, 0.0, 0.3)


def test_curve_curvatures():
    assert Circle(3.0).curvature(1.0) == pytest.approx(1 / 3)
    E = Ellipse(2.0, 1.0)
    assert E.curvature(0.0) == pytest.approx(2.0)
    assert E.curvature(math.pi / 2) == pytest.approx(0.25)
    assert Circle(2.0).length() == pytest.approx(4 * math.pi)
