"""Moebius maps of R^3, composed surfaces, and the Clifford torus projection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import DomainError, PoleError, SingularPointError
from .geometry import ParamSurface, SurfacePointData, numeric_curvature


class MoebiusMap:
    kind = "abstract"

    def apply(self, p):
        raise NotImplementedError

    def jacobian(self, p):
        raise NotImplementedError

    def __call__(self, p):
        return self.apply(p)

    @property
    def inversions(self):
        return []

    def describe(self) -> dict:
        return {"kind": self.kind}


class Similarity(MoebiusMap):
    """``p -> scale * rotation @ p + translation``."""

    kind = "similarity"

    def __init__(self, scale: float = 1.0, rotation=None, translation=(0.0, 0.0, 0.0)):
        if not scale > 0:
            raise DomainError("similarity scale must be positive")
        self.scale = float(scale)
        self.rotation = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
        if not np.allclose(self.rotation @ self.rotation.T, np.eye(3), atol=1e-12):
            raise DomainError("rotation must be orthogonal")
        self.translation = np.asarray(translation, dtype=float)

    def apply(self, p):
        return self.scale * np.asarray(p, dtype=float) @ self.rotation.T + self.translation

    def jacobian(self, p):
        p = np.asarray(p, dtype=float)
        return np.broadcast_to(self.scale * self.rotation, p.shape[:-1] + (3, 3))

    def describe(self) -> dict:
        return {"kind": self.kind, "scale": self.scale, "rotation": self.rotation.tolist(),
                "translation": self.translation.tolist()}


class Inversion(MoebiusMap):
    """Inversion in the sphere of given ``center`` and ``radius``."""

    kind = "inversion"

    def __init__(self, center, radius: float = 1.0):
        if not radius > 0:
            raise DomainError("inversion radius must be positive")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def _offset(self, p):
        d = np.asarray(p, dtype=float) - self.center
        n2 = np.sum(d * d, axis=-1, keepdims=True)
        if np.any(n2 <= (1e-12 * self.radius) ** 2):
            raise SingularPointError("point coincides with the inversion center")
        return d, n2

    def apply(self, p):
        d, n2 = self._offset(p)
        return self.center + self.radius**2 * d / n2

    def jacobian(self, p):
        d, n2 = self._offset(p)
        k = self.radius**2 / n2[..., None]
        outer = d[..., :, None] * d[..., None, :] / n2[..., None]
        return k * (np.eye(3) - 2.0 * outer)

    @property
    def inversions(self):
        return [self]

    def describe(self) -> dict:
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


class Composition(MoebiusMap):
    """Apply ``maps[0]`` first, then ``maps[1]``, and so on."""

    kind = "composition"

    def __init__(self, maps: Sequence[MoebiusMap]):
        maps = list(maps)
        if not maps:
            raise DomainError("composition needs at least one map")
        self.maps = maps

    def apply(self, p):
        for m in self.maps:
            p = m.apply(p)
        return p

    def jacobian(self, p):
        J = None
        for m in self.maps:
            Jm = m.jacobian(p)
            J = Jm if J is None else Jm @ J
            p = m.apply(p)
        return J

    @property
    def inversions(self):
        return [i for m in self.maps for i in m.inversions]

    def describe(self) -> dict:
        return {"kind": self.kind, "maps": [m.describe() for m in self.maps]}


def apply(map_: MoebiusMap, p):
    return map_.apply(p)


def sphere_image_under_inversion(inv: Inversion, center, radius):
    """Center and radius of the image of a sphere not through the inversion center."""
    c = np.asarray(center, dtype=float) - inv.center
    d = float(np.linalg.norm(c))
    if abs(d - radius) <= 1e-12 * max(d, radius):
        raise SingularPointError("sphere passes through the inversion center")
    k = inv.radius**2 / (d * d - radius * radius)
    return inv.center + k * c, abs(k) * radius


class ComposedSurface(ParamSurface):
    """``map o chart``; curvature comes from numeric differentiation of the composed chart."""

    def __init__(self, base: ParamSurface, map_: MoebiusMap):
        self.base = base
        self.map = map_
        u = 0.5 * sum(base.u_range) + 0.1
        v = 0.5 * sum(base.v_range) + 0.1
        det = float(np.linalg.det(map_.jacobian(base.chart(u, v))))
        super().__init__(
            lambda U, V: map_.apply(base.chart(U, V)),
            u_range=base.u_range,
            v_range=base.v_range,
            periodic=base.periodic,
            orientation=base.orientation * (1 if det > 0 else -1),
            partials=self._composed_partials,
            name="composed",
        )
        # similarities keep every symmetry of the base surface
        if not map_.inversions:
            self.revolution = base.revolution
            self.even_in_u = base.even_in_u
        self.closes_up = base.closed or getattr(base, "closes_up", False) or base.name == "sphere"

    def _composed_partials(self, u, v):
        pu, pv = self.base.partials(u, v)
        J = self.map.jacobian(self.base.chart(u, v))
        return np.einsum("...ij,...j->...i", J, pu), np.einsum("...ij,...j->...i", J, pv)

    def curvature(self, u: float, v: float) -> SurfacePointData:
        return numeric_curvature(self, u, v)

    def local_chart(self, u: float, v: float):
        b, u2, v2 = self.base.local_chart(u, v)
        if b is self.base:
            return self, u2, v2
        return ComposedSurface(b, self.map), u2, v2

    @cached_property
    def _diameter(self) -> float:
        return ParamSurface.diameter(self)

    def diameter(self) -> float:
        return self._diameter

    @cached_property
    def _length_scale(self) -> float:
        return ParamSurface.length_scale(self)

    def length_scale(self) -> float:
        return self._length_scale

    def describe(self) -> dict:
        return {"kind": "composed", "base": self.base.describe(), "map": self.map.describe()}


def _surface_gap(chart, S: ParamSurface, center) -> float:
    """Distance from ``center`` to the surface: grid search, then local least squares."""
    U, V = S._sample_grid(64)
    d = np.linalg.norm(chart(U, V) - center, axis=-1)
    i, j = np.unravel_index(int(np.argmin(d)), d.shape)
    lo = [-np.inf if S.periodic[0] else S.u_range[0], -np.inf if S.periodic[1] else S.v_range[0]]
    hi = [np.inf if S.periodic[0] else S.u_range[1], np.inf if S.periodic[1] else S.v_range[1]]
    sol = least_squares(lambda x: chart(x[0], x[1]) - center, [U[i, j], V[i, j]], bounds=(lo, hi),
                        xtol=1e-14, ftol=1e-14, gtol=1e-14)
    return float(min(d[i, j], np.linalg.norm(sol.fun)))


def compose_surface(S: ParamSurface, map_: MoebiusMap, min_clearance: float = 1e-3) -> ComposedSurface:
    """Image of ``S`` under ``map_``; every inversion center must stay off the surface."""
    steps = map_.maps if isinstance(map_, Composition) else [map_]
    done: list = []
    for m in steps:
        prefix = list(done)

        def chart(u, v, prefix=prefix):
            p = S.chart(u, v)
            for q in prefix:
                p = q.apply(p)
            return p

        U, V = S._sample_grid(64)
        pts = chart(U, V).reshape(-1, 3)
        diam = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
        for inv in m.inversions:
            gap = _surface_gap(chart, S, inv.center)
            if gap <= min_clearance * diam:
                raise SingularPointError(
                    f"inversion center is {gap:.3g} from the surface (needs > {min_clearance * diam:.3g})"
                )
        done.append(m)
    return ComposedSurface(S, map_)


# -- Clifford torus --------------------------------------------------------------


@dataclass(frozen=True)
class TorusFit:
    center: np.ndarray
    axis: np.ndarray
    center_distance: float
    tube_radius: float
    max_residual: float

    @property
    def ratio(self) -> float:
        return self.center_distance / self.tube_radius

    def to_dict(self) -> dict:
        return {
            "center": [float(x) for x in self.center],
            "axis": [float(x) for x in self.axis],
            "center_distance": self.center_distance,
            "tube_radius": self.tube_radius,
            "ratio": self.ratio,
            "max_residual": self.max_residual,
        }


def _axis_from_angles(theta, phi):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def fit_torus_of_revolution(points) -> TorusFit:
    """Least-squares torus of revolution through 3-D samples.

    The radial residual of a point ``q`` (relative to the center) is
    ``hypot(|q_perp| - R, q . axis) - r``.
    """
    P = np.asarray(points, dtype=float).reshape(-1, 3)
    c0 = P.mean(axis=0)
    w, vecs = np.linalg.eigh(np.cov((P - c0).T))
    n0 = vecs[:, 0]
    theta0 = math.acos(max(-1.0, min(1.0, n0[2])))
    phi0 = math.atan2(n0[1], n0[0])
    q = P - c0
    h = q @ n0
    rad = np.sqrt(np.maximum(np.sum(q * q, axis=1) - h * h, 0.0))
    R0 = 0.5 * (rad.max() + rad.min())
    r0 = 0.5 * (rad.max() - rad.min())

    def resid(x):
        c, n = x[:3], _axis_from_angles(x[3], x[4])
        q = P - c
        h = q @ n
        perp = np.sqrt(np.maximum(np.sum(q * q, axis=1) - h * h, 0.0))
        return np.hypot(perp - x[5], h) - x[6]

    scale = max(R0, 1e-300)
    sol = least_squares(resid, np.r_[c0, theta0, phi0, R0, r0], xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        x_scale=np.r_[scale, scale, scale, 1.0, 1.0, scale, scale], max_nfev=2000)
    x = sol.x
    return TorusFit(
        center=x[:3],
        axis=_axis_from_angles(x[3], x[4]),
        center_distance=float(abs(x[5])),
        tube_radius=float(abs(x[6])),
        max_residual=float(np.max(np.abs(resid(x)))),
    )


def clifford_torus_points(n: int = 48) -> np.ndarray:
    """Samples of ``{|z1| = |z2| = 1/sqrt(2)}`` in ``S^3 subset R^4``."""
    a = 2 * math.pi * np.arange(n) / n
    A, B = np.meshgrid(a, a + math.pi / n, indexing="ij")
    X = np.stack([np.cos(A), np.sin(A), np.cos(B), np.sin(B)], axis=-1) / math.sqrt(2.0)
    return X.reshape(-1, 4)


def stereographic(X, pole) -> np.ndarray:
    """Project points of ``S^3`` from ``pole`` onto the hyperplane orthogonal to it."""
    pole = np.asarray(pole, dtype=float)
    pole = pole / np.linalg.norm(pole)
    denom = 1.0 - X @ pole
    if np.any(denom <= 1e-12):
        raise PoleError("a projected point coincides with the pole")
    # orthonormal basis of the complement of the pole
    Q, _ = np.linalg.qr(np.column_stack([pole, np.eye(4)]))
    basis = Q[:, 1:4]
    return (X @ basis) / denom[:, None]


def random_isometry(rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SO(4)."""
    Q, R = np.linalg.qr(rng.standard_normal((4, 4)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


@dataclass(frozen=True)
class CliffordReport:
    fit: TorusFit
    pole: np.ndarray

    @property
    def ratio(self) -> float:
        return self.fit.ratio

    def to_dict(self) -> dict:
        d = self.fit.to_dict()
        d["pole"] = [float(x) for x in self.pole]
        return d


def clifford_image(pole=(0.0, 0.0, 0.0, 1.0), isometry: Optional[np.ndarray] = None, n: int = 48) -> CliffordReport:
    """Stereographic image of the Clifford torus with a fitted torus of revolution.

    ``isometry`` (an element of SO(4)) moves the torus and the pole together.
    """
    pole = np.asarray(pole, dtype=float)
    pole = pole / np.linalg.norm(pole)
    z1 = pole[0] ** 2 + pole[1] ** 2
    if abs(z1 - 0.5) <= 1e-12:
        raise PoleError("projection pole lies on the Clifford torus")
    X = clifford_torus_points(n)
    if isometry is not None:
        g = np.asarray(isometry, dtype=float)
        X = X @ g.T
        pole = g @ pole
    Y = stereographic(X, pole)
    return CliffordReport(fit_torus_of_revolution(Y), pole)


@dataclass(frozen=True)
class InvarianceResult:
    before: float
    after: float

    @property
    def deviation(self) -> float:
        scale = max(abs(self.before), 1.0)
        return abs(self.after - self.before) / scale

    def to_dict(self) -> dict:
        return {"before": self.before, "after": self.after, "deviation": self.deviation}


def invariance_experiment(S: ParamSurface, map_: MoebiusMap, cfg=None, workers: Optional[int] = None) -> InvarianceResult:
    """Numeric renormalized energy of ``S`` and of its image under ``map_``."""
    from .renormalization import surface_energy

    image = compose_surface(S, map_)
    before = surface_energy(S, cfg, workers=workers).value
    after = surface_energy(image, cfg, workers=workers).value
    return InvarianceResult(before, after)
