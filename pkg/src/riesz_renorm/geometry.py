"""Parametrized surfaces and curves with exact or numeric differential data.

Charts are vectorized: ``chart(u, v)`` accepts broadcastable arrays and returns
an array of shape ``broadcast(u, v).shape + (3,)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateChartError, DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SurfacePointData:
    u: float
    v: float
    position: np.ndarray
    normal: np.ndarray
    kappa1: float
    kappa2: float
    gauss: float
    delta: float
    area_density: float

    @property
    def mean_curvature(self) -> float:
        return 0.5 * (self.kappa1 + self.kappa2)


def _point_data(u, v, position, normal, k_a, k_b, density) -> SurfacePointData:
    k1, k2 = (k_a, k_b) if k_a >= k_b else (k_b, k_a)
    return SurfacePointData(
        u=float(u),
        v=float(v),
        position=np.asarray(position, dtype=float),
        normal=np.asarray(normal, dtype=float),
        kappa1=float(k1),
        kappa2=float(k2),
        gauss=float(k1 * k2),
        delta=float((k1 - k2) ** 2),
        area_density=float(density),
    )


class ParamSurface:
    """A chart ``(u, v) -> R^3`` over a rectangle, optionally periodic per axis.

    ``orientation`` flips ``p_u x p_v`` so that ``normal`` points outward.
    ``revolution`` advertises that scalar invariants (and therefore the
    renormalized potential) do not depend on ``v``; ``even_in_u`` additionally
    advertises the symmetry ``u -> -u``.
    """

    revolution = False
    even_in_u = False

    def __init__(
        self,
        chart: Callable[[np.ndarray, np.ndarray], np.ndarray],
        u_range: Sequence[float] = (0.0, TWO_PI),
        v_range: Sequence[float] = (0.0, TWO_PI),
        periodic: Sequence[bool] = (True, True),
        orientation: int = 1,
        partials: Optional[Callable] = None,
        name: str = "chart",
    ):
        self._chart = chart
        self._partials = partials
        self.u_range = (float(u_range[0]), float(u_range[1]))
        self.v_range = (float(v_range[0]), float(v_range[1]))
        self.periodic = (bool(periodic[0]), bool(periodic[1]))
        self.orientation = 1 if orientation >= 0 else -1
        self.name = name

    # -- evaluation -------------------------------------------------------
    @property
    def spans(self):
        return (self.u_range[1] - self.u_range[0], self.v_range[1] - self.v_range[0])

    @property
    def closed(self) -> bool:
        return all(self.periodic)

    def wrap(self, u, v):
        """Reduce periodic parameters into the chart rectangle."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.periodic[0]:
            u = self.u_range[0] + np.mod(u - self.u_range[0], self.spans[0])
        if self.periodic[1]:
            v = self.v_range[0] + np.mod(v - self.v_range[0], self.spans[1])
        return u, v

    def chart(self, u, v):
        return self._chart(*self.wrap(u, v))

    def partials(self, u, v):
        if self._partials is not None:
            return self._partials(*self.wrap(u, v))
        hu = 1e-6 * self.spans[0]
        hv = 1e-6 * self.spans[1]
        pu = (self.chart(u + hu, v) - self.chart(u - hu, v)) / (2 * hu)
        pv = (self.chart(u, v + hv) - self.chart(u, v - hv)) / (2 * hv)
        return pu, pv

    def area_density(self, u, v):
        pu, pv = self.partials(u, v)
        return np.linalg.norm(np.cross(pu, pv), axis=-1)

    def curvature(self, u: float, v: float) -> SurfacePointData:
        return numeric_curvature(self, u, v)

    def local_chart(self, u: float, v: float):
        """Return an equivalent ``(surface, u, v)`` well conditioned near the point.

        The default chart is assumed regular everywhere it is used.
        """
        return self, float(u), float(v)

    # -- scales -----------------------------------------------------------
    def _sample_grid(self, n=24):
        u0, u1 = self.u_range
        v0, v1 = self.v_range
        # midpoints keep us off non-periodic boundaries
        us = u0 + (np.arange(n) + 0.5) * (u1 - u0) / n
        vs = v0 + (np.arange(n) + 0.5) * (v1 - v0) / n
        return np.meshgrid(us, vs, indexing="ij")

    def diameter(self) -> float:
        U, V = self._sample_grid(32)
        pts = self.chart(U, V).reshape(-1, 3)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def local_length_scale(self, u: float, v: float) -> float:
        """Smallest principal radius of curvature at the point."""
        d = self.curvature(u, v)
        kmax = max(abs(d.kappa1), abs(d.kappa2))
        if kmax * self.diameter() < 1e-12:
            return self.diameter()
        return 1.0 / kmax

    def length_scale(self) -> float:
        """Smallest principal radius of curvature over a sample grid."""
        U, V = self._sample_grid(16)
        return min(self.local_length_scale(a, b) for a, b in zip(U.ravel(), V.ravel()))

    def describe(self) -> dict:
        return {"kind": self.name}


class RevolutionTorus(ParamSurface):
    """Torus swept by a unit circle whose center runs on a circle of radius ``R``.

    The whole surface is then scaled by ``scale`` about the origin.
    """

    revolution = True
    even_in_u = True

    def __init__(self, R: float, scale: float = 1.0):
        R = float(R)
        scale = float(scale)
        if not R > 1.0:
            raise DomainError(f"torus requires R > 1, got {R}")
        if not scale > 0.0:
            raise DomainError(f"scale must be positive, got {scale}")
        self.R = R
        self.scale = scale
        super().__init__(
            self._torus_chart,
            periodic=(True, True),
            orientation=-1,
            partials=self._torus_partials,
            name="torus",
        )

    def _torus_chart(self, u, v):
        rho = self.R + np.cos(u)
        return self.scale * np.stack(
            np.broadcast_arrays(rho * np.cos(v), rho * np.sin(v), np.sin(u)), axis=-1
        )

    def _torus_partials(self, u, v):
        rho = self.R + np.cos(u)
        su, cu = np.sin(u), np.cos(u)
        sv, cv = np.sin(v), np.cos(v)
        pu = np.stack(np.broadcast_arrays(-su * cv, -su * sv, cu), axis=-1)
        pv = np.stack(np.broadcast_arrays(-rho * sv, rho * cv, 0.0 * rho), axis=-1)
        return self.scale * pu, self.scale * pv

    def area_density(self, u, v):
        u, v = np.broadcast_arrays(*self.wrap(u, v))
        return self.scale**2 * (self.R + np.cos(u))

    def curvature(self, u: float, v: float) -> SurfacePointData:
        return torus_curvature(self, u, v)

    def diameter(self) -> float:
        return 2.0 * (self.R + 1.0) * self.scale

    def local_length_scale(self, u: float, v: float) -> float:
        c = math.cos(u)
        kmax = max(1.0, abs(c) / (self.R + c))
        return self.scale / kmax

    def length_scale(self) -> float:
        return self.scale * min(1.0, self.R - 1.0)

    def area(self) -> float:
        return 4.0 * math.pi**2 * self.R * self.scale**2

    def describe(self) -> dict:
        return {"kind": "torus", "R": self.R, "scale": self.scale}

    def __repr__(self):
        return f"RevolutionTorus(R={self.R!r}, scale={self.scale!r})"


def _frame_from(direction) -> np.ndarray:
    """Rotation matrix whose first column is the unit vector ``direction``."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    helper = np.array([0.0, 0.0, 1.0]) if abs(d[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e2 = np.cross(helper, d)
    e2 /= np.linalg.norm(e2)
    e3 = np.cross(d, e2)
    return np.column_stack([d, e2, e3])


class Sphere(ParamSurface):
    """Round sphere in polar coordinates ``u`` (colatitude), ``v`` (azimuth)."""

    revolution = True

    def __init__(self, radius: float = 1.0, center=(0.0, 0.0, 0.0), rotation=None):
        radius = float(radius)
        if not radius > 0.0:
            raise DomainError(f"sphere radius must be positive, got {radius}")
        self.radius = radius
        self.center = np.asarray(center, dtype=float)
        self.rotation = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
        super().__init__(
            self._sphere_chart,
            u_range=(0.0, math.pi),
            v_range=(0.0, TWO_PI),
            periodic=(False, True),
            orientation=1,
            partials=self._sphere_partials,
            name="sphere",
        )

    def _place(self, local):
        return local @ self.rotation.T + self.center

    def _sphere_chart(self, u, v):
        r = self.radius
        local = np.stack(
            np.broadcast_arrays(r * np.sin(u) * np.cos(v), r * np.sin(u) * np.sin(v), r * np.cos(u)),
            axis=-1,
        )
        return self._place(local)

    def _sphere_partials(self, u, v):
        r = self.radius
        su, cu, sv, cv = np.sin(u), np.cos(u), np.sin(v), np.cos(v)
        pu = np.stack(np.broadcast_arrays(r * cu * cv, r * cu * sv, -r * su), axis=-1)
        pv = np.stack(np.broadcast_arrays(-r * su * sv, r * su * cv, 0.0 * su), axis=-1)
        return pu @ self.rotation.T, pv @ self.rotation.T

    def area_density(self, u, v):
        u, v = np.broadcast_arrays(*self.wrap(u, v))
        return self.radius**2 * np.abs(np.sin(u))

    def curvature(self, u: float, v: float) -> SurfacePointData:
        p = self.chart(u, v)
        n = (p - self.center) / self.radius
        k = 1.0 / self.radius
        return _point_data(u, v, p, n, k, k, self.area_density(u, v))

    def local_chart(self, u: float, v: float):
        # rotate so the point sits on the equator at v = 0, far from the poles
        direction = self.chart(u, v) - self.center
        return Sphere(self.radius, self.center, _frame_from(direction)), 0.5 * math.pi, 0.0

    def diameter(self) -> float:
        return 2.0 * self.radius

    def local_length_scale(self, u: float, v: float) -> float:
        return self.radius

    def length_scale(self) -> float:
        return self.radius

    def area(self) -> float:
        return 4.0 * math.pi * self.radius**2

    def describe(self) -> dict:
        return {"kind": "sphere", "radius": self.radius, "center": [float(c) for c in self.center]}


def torus_chart(T: RevolutionTorus, u, v):
    """Point ``scale * ((R + cos u) cos v, (R + cos u) sin v, sin u)``."""
    return T.chart(u, v)


def chord_dist_sq(T: RevolutionTorus, alpha, u, v):
    """Squared chord from ``p(alpha, 0)`` to ``p(u, v)``, expanded trigonometric form."""
    R = T.R
    ca, sa = np.cos(alpha), np.sin(alpha)
    cu, su = np.cos(u), np.sin(u)
    d2 = 2 * R * R + 2 + 2 * R * (ca + cu) - 2 * sa * su - 2 * (R + ca) * (R + cu) * np.cos(v)
    return T.scale**2 * d2


def chord_dist_sq_ts(T: RevolutionTorus, alpha, u, v):
    """Same chord in the variables ``t = 2 sin((u - a)/2)``, ``s = 2 (R + cos a) sin(v/2)``.

    Valid for ``|u - alpha| <= pi``.
    """
    R = T.R
    ca, sa = np.cos(alpha), np.sin(alpha)
    t = 2 * np.sin(0.5 * (u - alpha))
    s = 2 * (R + ca) * np.sin(0.5 * v)
    w = 2 * (R + ca)
    d2 = t * t + s * s - ca / w * t * t * s * s - sa / w * s * s * t * np.sqrt(np.maximum(4 - t * t, 0.0))
    return T.scale**2 * d2


def chord_dist_sq_theta_phi(T: RevolutionTorus, alpha, u, v):
    """Same chord in the angles ``theta = (pi + a - u)/2``, ``phi = (pi - v)/2``.

    Valid for ``|u - alpha| <= pi``.
    """
    R = T.R
    ca, sa = np.cos(alpha), np.sin(alpha)
    th = 0.5 * (math.pi + alpha - u)
    ph = 0.5 * (math.pi - v)
    c2 = np.cos(th) ** 2
    inner = R + ca - 2 * ca * c2 - 2 * sa * np.abs(np.sin(th)) * np.cos(th)
    return T.scale**2 * 4.0 * (c2 + (R + ca) * inner * np.cos(ph) ** 2)


def torus_curvature(T: RevolutionTorus, alpha: float, v: float = 0.0) -> SurfacePointData:
    """Closed-form curvature data of ``T`` at ``p(alpha, v)`` (outward normal)."""
    alpha = float(alpha)
    c = math.cos(alpha)
    rho = T.R + c
    k_tube = 1.0 / T.scale
    k_par = c / (rho * T.scale)
    normal = np.array([c * math.cos(v), c * math.sin(v), math.sin(alpha)])
    return _point_data(alpha, v, T.chart(alpha, v), normal, k_tube, k_par, T.scale**2 * rho)


def numeric_curvature(S: ParamSurface, u: float, v: float, step: Optional[float] = None) -> SurfacePointData:
    """Curvature from central-difference fundamental forms with one Richardson level.

    ``step`` is relative to each axis span (default 1e-4).
    """
    if step is None:
        step = 1e-4
    if not 0.0 < step <= 1e-2:
        raise DomainError(f"relative step must lie in (0, 1e-2], got {step}")
    su, sv = S.spans
    hu0, hv0 = step * su, step * sv

    def derivs(hu, hv):
        p = S.chart
        p00 = p(u, v)
        pp0, pm0 = p(u + hu, v), p(u - hu, v)
        p0p, p0m = p(u, v + hv), p(u, v - hv)
        ppp, ppm = p(u + hu, v + hv), p(u + hu, v - hv)
        pmp, pmm = p(u - hu, v + hv), p(u - hu, v - hv)
        pu = (pp0 - pm0) / (2 * hu)
        pv = (p0p - p0m) / (2 * hv)
        puu = (pp0 - 2 * p00 + pm0) / hu**2
        pvv = (p0p - 2 * p00 + p0m) / hv**2
        puv = (ppp - ppm - pmp + pmm) / (4 * hu * hv)
        return np.array([pu, pv, puu, puv, pvv])

    coarse = derivs(hu0, hv0)
    fine = derivs(0.5 * hu0, 0.5 * hv0)
    pu, pv, puu, puv, pvv = (4.0 * fine - coarse) / 3.0

    cross = np.cross(pu, pv)
    density = float(np.linalg.norm(cross))
    if density < 1e-12:
        raise DegenerateChartError(f"chart is not an immersion at (u={u}, v={v})")
    n = S.orientation * cross / density
    E, F, G = pu @ pu, pu @ pv, pv @ pv
    L, M, N = puu @ n, puv @ n, pvv @ n
    det_I = E * G - F * F
    K = (L * N - M * M) / det_I
    H = -(E * N - 2 * F * M + G * L) / (2 * det_I)
    root = math.sqrt(max(H * H - K, 0.0))
    return _point_data(u, v, S.chart(u, v), n, H + root, H - root, density)


# -- curves --------------------------------------------------------------


class Curve:
    """Closed curve ``t -> R^3`` over ``[0, 2 pi)``."""

    def __init__(self, chart: Callable, speed: Optional[Callable] = None, name: str = "curve"):
        self._chart = chart
        self._speed = speed
        self.name = name
        self.period = TWO_PI

    def point(self, t):
        return self._chart(np.mod(np.asarray(t, dtype=float), self.period))

    def speed(self, t):
        if self._speed is not None:
            return self._speed(np.mod(np.asarray(t, dtype=float), self.period))
        h = 1e-6
        return np.linalg.norm(self.point(t + h) - self.point(t - h), axis=-1) / (2 * h)

    def curvature(self, t: float) -> float:
        h = 1e-4
        p = [self.point(t + k * h) for k in (-1, 0, 1)]
        d1 = (p[2] - p[0]) / (2 * h)
        d2 = (p[2] - 2 * p[1] + p[0]) / h**2
        s = np.linalg.norm(d1)
        return float(np.linalg.norm(np.cross(d1, d2)) / s**3)

    def length_scale(self) -> float:
        ts = np.linspace(0.0, self.period, 64, endpoint=False)
        return 1.0 / max(self.curvature(t) for t in ts)

    def diameter(self) -> float:
        pts = self.point(np.linspace(0.0, self.period, 256, endpoint=False))
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    def describe(self) -> dict:
        return {"kind": self.name}


class Circle(Curve):
    def __init__(self, radius: float = 1.0):
        radius = float(radius)
        if not radius > 0.0:
            raise DomainError(f"circle radius must be positive, got {radius}")
        self.radius = radius
        super().__init__(
            lambda t: radius * np.stack(np.broadcast_arrays(np.cos(t), np.sin(t), 0.0 * t), axis=-1),
            lambda t: radius + 0.0 * t,
            name="circle",
        )

    def curvature(self, t: float) -> float:
        return 1.0 / self.radius

    def length(self) -> float:
        return TWO_PI * self.radius

    def describe(self) -> dict:
        return {"kind": "circle", "radius": self.radius}


class Ellipse(Curve):
    def __init__(self, a: float, b: float):
        a, b = float(a), float(b)
        if not (a > 0.0 and b > 0.0):
            raise DomainError("ellipse semi-axes must be positive")
        self.a, self.b = a, b
        super().__init__(
            lambda t: np.stack(np.broadcast_arrays(a * np.cos(t), b * np.sin(t), 0.0 * t), axis=-1),
            lambda t: np.hypot(a * np.sin(t), b * np.cos(t)),
            name="ellipse",
        )

    def curvature(self, t: float) -> float:
        return self.a * self.b / float(np.hypot(self.a * np.sin(t), self.b * np.cos(t))) ** 3

    def length_scale(self) -> float:
        return min(self.a, self.b) ** 2 / max(self.a, self.b)

    def describe(self) -> dict:
        return {"kind": "ellipse", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class PlanarDisk:
    """Closed disk in the plane, used for planar-domain cutoff energies."""

    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0.0:
            raise DomainError("disk radius must be positive")

    def area(self) -> float:
        return math.pi * self.radius**2

    def perimeter(self) -> float:
        return TWO_PI * self.radius

    def diameter(self) -> float:
        return 2.0 * self.radius

    def length_scale(self) -> float:
        return self.radius

    def describe(self) -> dict:
        return {"kind": "disk", "radius": self.radius}
