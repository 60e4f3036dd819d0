import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from riesz_renorm.errors import DomainError, IllConditionedFit
from riesz_renorm.geometry import Circle, PlanarDisk, RevolutionTorus, Sphere
from riesz_renorm.quadrature import (
    CurveCutoff,
    CutoffSample,
    QuadratureConfig,
    SurfaceCutoff,
    adaptive_interval,
    cutoff_energy_integral,
    cutoff_potential_integral,
    fit_asymptotics,
    gauss_legendre,
    outer_nodes,
)


def test_gauss_legendre_integrates_polynomials_exactly():
    x, w = gauss_legendre(6)
    assert math.fsum(w * x**10) == pytest.approx(2 / 11, rel=1e-14)


def test_adaptive_interval_with_endpoint_singularity():
    res = adaptive_interval(np.sqrt, 0.0, 1.0, rel_tol=1e-12)
    assert res.value == pytest.approx(2 / 3, rel=1e-11)
    res = adaptive_interval(lambda t: 1 / np.sqrt(t), 0.0, 1.0, rel_tol=1e-8, max_depth=60)
    assert res.value == pytest.approx(2.0, rel=1e-7)


@pytest.mark.parametrize("r", [1.0, 0.3, 4.0])
@pytest.mark.parametrize("eps", [0.01, 0.1, 0.45])
def test_sphere_cutoff_integral_exact(r, eps):
    # int_{|x-y| >= eps} |x-y|^-4 dA over a round sphere = pi/eps^2 - pi/(4 r^2)
    eps = eps * r
    got = cutoff_potential_integral(Sphere(r), (1.0, 2.0), eps).value
    assert got == pytest.approx(math.pi / eps**2 - math.pi / (4 * r * r), rel=1e-10)


def test_circle_cutoff_integral_exact():
    # chord cutoff on the unit circle: int |x-y|^-2 ds = 2 sqrt(1 - eps^2/4) / eps
    cut = CurveCutoff(Circle(1.0), 0.7, -2.0)
    for eps in (0.3, 0.05, 0.002):
        assert cut.sample(eps).value == pytest.approx(2 * math.sqrt(1 - eps * eps / 4) / eps, rel=1e-11)


def test_circle_arc_cutoff_exact():
    # arc cutoff: int_{eps}^{2pi-eps} ds / (4 sin^2(s/2)) = cot(eps/2)
    cut = CurveCutoff(Circle(1.0), 0.0, -2.0, mode="arc")
    for eps in (0.3, 0.01):
        assert cut.sample(eps).value == pytest.approx(1 / math.tan(eps / 2), rel=1e-11)


def test_global_circle_energy_exact():
    eps = 0.1
    got = cutoff_energy_integral(Circle(1.0), eps, -2.0).value
    assert got == pytest.approx(2 * math.pi * 2 * math.sqrt(1 - eps * eps / 4) / eps, rel=1e-10)


def test_disk_pair_integral_against_brute_force():
    # lambda = 0 with cutoff 0 counts pairs: area^2
    D = PlanarDisk(1.3)
    got = cutoff_energy_integral(D, 1e-9, 0.0).value
    assert got == pytest.approx(D.area() ** 2, rel=1e-8)


def test_cutoff_rejects_large_eps():
    with pytest.raises(DomainError):
        SurfaceCutoff(RevolutionTorus(2.0), 0.0, 0.0, -4.0).sample(5.0)
    with pytest.raises(DomainError):
        cutoff_potential_integral(RevolutionTorus(2.0), (0.0, 0.0), -0.1)


def test_results_do_not_depend_on_workers():
    a = cutoff_potential_integral(RevolutionTorus(1.5), (0.4, 0.0), 0.05, cfg=QuadratureConfig(workers=1))
    b = cutoff_potential_integral(RevolutionTorus(1.5), (0.4, 0.0), 0.05, cfg=QuadratureConfig(workers=3))
    assert a == b


def test_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(rel_tol=0.5)
    with pytest.raises(DomainError):
        QuadratureConfig(seed_grid=2)
    with pytest.raises(DomainError):
        CutoffSample(-1.0, 0.0, 0.0)


@given(c=st.lists(st.floats(-10, 10), min_size=4, max_size=4))
def test_fit_recovers_synthetic_coefficients(c):
    basis = ("eps^-2", "log", "1", "eps")
    eps = 0.4 * 2.0 ** -np.arange(7)
    y = c[0] / eps**2 + c[1] * np.log(eps) + c[2] + c[3] * eps
    fit = fit_asymptotics([CutoffSample(e, v, 0.0) for e, v in zip(eps, y)], basis)
    for name, want in zip(basis, c):
        assert fit[name] == pytest.approx(want, abs=1e-8 * (1 + max(map(abs, c))))


def test_fit_needs_enough_samples_and_span():
    s = [CutoffSample(e, 1.0, 0.0) for e in (0.4, 0.2, 0.1, 0.05, 0.025)]
    with pytest.raises(DomainError):
        fit_asymptotics(s, ("eps^-2", "log", "1", "eps"))
    with pytest.raises(DomainError):
        fit_asymptotics(s[:3] + [CutoffSample(0.09, 1.0, 0.0)], ("1",))
    with pytest.raises(DomainError):
        fit_asymptotics(s, ("eps^9",))


def test_ill_conditioned_fit_raises():
    eps = 0.4 * 2.0 ** -np.arange(7)
    s = [CutoffSample(e, 1.0, 0.0) for e in eps]
    with pytest.raises(IllConditionedFit):
        fit_asymptotics(s, ("1", "eps", "eps^2"), cond_limit=2.0)


def test_outer_nodes_integrate_area():
    for S in (RevolutionTorus(2.0), Sphere(1.0)):
        U, V, W = outer_nodes(S, 32)
        assert math.fsum(W) == pytest.approx(S.area(), rel=1e-10)
