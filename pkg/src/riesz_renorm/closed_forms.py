"""Explicit formulas for tori of revolution with unit generating circle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import BracketError, DomainError

LOG2 = math.log(2.0)
# below this the square root sqrt(R^2 - 1) carries too few correct digits
R_FLOOR = 1.0 + 1e-8

CLIFFORD_R = math.sqrt(2.0)
CLIFFORD_ENERGY = math.pi**3 * (6 * LOG2 - 1) / 2


def _check_R(R: float) -> float:
    R = float(R)
    if not R >= R_FLOOR:
        raise DomainError(f"closed forms require R > 1 (at least {R_FLOOR!r}), got {R!r}")
    return R


def _sqrt_r2m1(R: float) -> float:
    return math.sqrt((R - 1.0) * (R + 1.0))


def torus_energy_closed(R: float) -> float:
    """Renormalized r^-4 energy of the torus of revolution ``T_R``."""
    R = _check_R(R)
    return math.pi**3 / (2 * _sqrt_r2m1(R)) * (R * R * (3 * LOG2 - 1) + 2 - 2 / (R * R))


def torus_energy_derivative(R: float) -> float:
    """``dE/dR``; vanishes only at ``R = sqrt(2)``."""
    R = _check_R(R)
    q = R * R - 2
    return math.pi**3 * q * (q * q + 3 * R**4 * math.log(4 / math.e)) / (
        4 * R**3 * ((R - 1.0) * (R + 1.0)) ** 1.5
    )


def minimize_torus_energy(bracket: Tuple[float, float] = (1.1, 3.0), tol: float = 1e-12):
    """Root of ``dE/dR`` inside ``bracket`` by safeguarded secant/bisection.

    Returns ``(R_star, E_star)``.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (1.0 < lo < hi):
        raise BracketError(f"bracket must satisfy 1 < lo < hi, got {bracket}")
    flo, fhi = torus_energy_derivative(lo), torus_energy_derivative(hi)
    if flo == 0.0:
        return lo, torus_energy_closed(lo)
    if fhi == 0.0:
        return hi, torus_energy_closed(hi)
    if flo * fhi > 0:
        raise BracketError(f"derivative does not change sign on {bracket}")
    for _ in range(200):
        # secant candidate, then a bisection step so the bracket always halves
        for x in (hi - fhi * (hi - lo) / (fhi - flo), 0.5 * (lo + hi)):
            if not lo < x < hi:
                x = 0.5 * (lo + hi)
            fx = torus_energy_derivative(x)
            if fx == 0.0:
                return x, torus_energy_closed(x)
            if (fx < 0) == (flo < 0):
                lo, flo = x, fx
            else:
                hi, fhi = x, fx
        if hi - lo <= tol:
            break
    R_star = 0.5 * (lo + hi)
    return R_star, torus_energy_closed(R_star)


def torus_potential_closed(R: float, alpha) -> np.ndarray:
    """Renormalized potential of ``T_R`` at ``p(alpha, v)`` (any ``v``)."""
    R = _check_R(R)
    c = np.cos(alpha)
    q = (R + c) ** 2
    return (
        3 * LOG2 * math.pi * R * R / (8 * q)
        - math.pi / 8
        - math.pi / (4 * R * R * q)
        + math.pi * (1 + np.sin(alpha) ** 2) / (8 * q)
        + math.pi * c / (4 * (R + c))
    )


def torus_cutoff_potential_closed(R: float, alpha, eps) -> np.ndarray:
    """Small-eps expansion of the cutoff integral on ``T_R``, up to ``O(eps)``."""
    R = _check_R(R)
    eps = np.asarray(eps, dtype=float)
    if np.any(eps <= 0) or np.any(eps >= 1):
        raise DomainError("eps must lie in (0, 1)")
    c = np.cos(alpha)
    q = (R + c) ** 2
    return (
        math.pi / eps**2
        - math.pi * R * R / (16 * q) * np.log(R * R * eps**2 / q)
        + 3 * LOG2 * math.pi * R * R / (8 * q)
        - math.pi / 8
        - math.pi / (4 * R * R * q)
        + math.pi * (1 + np.sin(alpha) ** 2) / (8 * q)
    )


def torus_gauss(R: float, alpha):
    c = np.cos(alpha)
    return c / (R + c)


def torus_delta(R: float, alpha):
    return R * R / (R + np.cos(alpha)) ** 2


def torus_area(R: float) -> float:
    return 4 * math.pi**2 * _check_R(R)


def delta_integral_closed(R: float) -> float:
    """``int_T Delta dA = 4 pi^2 R^2 / sqrt(R^2 - 1)``."""
    R = _check_R(R)
    return 4 * math.pi**2 * R * R / _sqrt_r2m1(R)


def inverse_cos_integral(R: float, alpha: float) -> float:
    """``int_0^alpha du / (R + cos u)`` for ``alpha`` in ``[0, pi)``."""
    R = _check_R(R)
    k = math.sqrt((R - 1) / (R + 1))
    return 2 / _sqrt_r2m1(R) * math.atan(k * math.tan(alpha / 2))


def _periodic_mean(f, n: int) -> float:
    a = 2 * math.pi * np.arange(n) / n
    return math.fsum(f(a)) / n


def _periodic_integral(f, tol=1e-14, n0=64, n_max=1 << 20) -> float:
    n = n0
    prev = 2 * math.pi * _periodic_mean(f, n)
    while n < n_max:
        n *= 2
        cur = 2 * math.pi * _periodic_mean(f, n)
        if abs(cur - prev) <= tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    return prev


def delta_log_delta_integral(R: float) -> float:
    """``int_T Delta log(Delta) dA`` by periodic trapezoid quadrature in ``alpha``."""
    R = _check_R(R)
    return _periodic_integral(lambda a: 2 * math.pi * (R + np.cos(a)) * torus_delta(R, a) * np.log(torus_delta(R, a)))


def willmore_torus(R: float) -> float:
    """``int ((k1 + k2)/2)^2 dA`` over ``T_R`` by periodic trapezoid quadrature."""
    R = _check_R(R)
    # k1 = 1, k2 = cos a / (R + cos a), dA = 2 pi (R + cos a) da
    return _periodic_integral(lambda a: 2 * math.pi * (R + 2 * np.cos(a)) ** 2 / (4 * (R + np.cos(a))))


def willmore_argmin(lo: float = 1.1, hi: float = 3.0, n: int = 2001) -> float:
    grid = np.linspace(lo, hi, n)
    vals = [willmore_torus(r) for r in grid]
    return float(grid[int(np.argmin(vals))])


@dataclass(frozen=True)
class TorusEnergyCurve:
    R: Tuple[float, ...]
    energy: Tuple[float, ...]
    derivative: Tuple[float, ...]

    def argmin(self) -> float:
        return self.R[int(np.argmin(self.energy))]

    def rows(self) -> List[Tuple[float, float, float]]:
        return list(zip(self.R, self.energy, self.derivative))


def energy_curve(R_values: Sequence[float]) -> TorusEnergyCurve:
    R_values = tuple(float(r) for r in R_values)
    return TorusEnergyCurve(
        R=R_values,
        energy=tuple(torus_energy_closed(r) for r in R_values),
        derivative=tuple(torus_energy_derivative(r) for r in R_values),
    )
