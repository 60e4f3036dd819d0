"""Quadrature over charts with an excluded chord ball, and asymptotic fitting.

The cutoff integral ``int_{S \\ B_eps(x)} |x - y|^lam dA(y)`` is split in two:

* a parameter rectangle (the *patch*) around ``x`` integrated in polar
  coordinates centred at ``x``; along every ray the cutoff radius is found by a
  bracketing root solve so the excluded set is exactly ``{|x - y| < eps}``, and the radial
  direction uses ``log rho`` with dedicated panels on the ring
  ``eps <= rho <= 4 eps``;
* the rest of the chart, where the integrand is smooth, handled by adaptive
  tensor Gauss-Legendre cubature.

The second part does not depend on ``eps`` and is computed once per point.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, IllConditionedFit, ToleranceNotMet
from .geometry import TWO_PI, Curve, ParamSurface, PlanarDisk, SurfacePointData


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-9
    max_depth: int = 30
    ring_refinement: int = 6
    seed_grid: int = 64
    # cubature order per cell and per radial panel
    order: int = 8
    radial_order: int = 12
    angular_nodes: int = 32
    patch_factor: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if not 0.0 < self.rel_tol <= 1e-2:
            raise DomainError(f"rel_tol must lie in (0, 1e-2], got {self.rel_tol}")
        if self.max_depth < 4:
            raise DomainError("max_depth must be at least 4")
        if self.seed_grid < 8:
            raise DomainError("seed_grid must be at least 8")
        if self.ring_refinement < 1:
            raise DomainError("ring_refinement must be at least 1")


@dataclass(frozen=True)
class CutoffSample:
    eps: float
    value: float
    err_est: float

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError("cutoff eps must be positive")
        if self.err_est < 0:
            raise DomainError("error estimate must be non-negative")


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    evaluations: int = 0


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def fsum(values) -> float:
    return math.fsum(np.asarray(values, dtype=float).ravel())


# -- 1-D adaptive ---------------------------------------------------------


def adaptive_interval(f: Callable, a: float, b: float, rel_tol=1e-12, abs_tol=0.0,
                      order=16, max_depth=40, seed=4) -> QuadResult:
    """Level-synchronous adaptive Gauss-Legendre on ``[a, b]``; ``f`` is vectorized."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, seed + 1)
    lo, hi = edges[:-1], edges[1:]

    def panel(lo, hi):
        mid = 0.5 * (lo + hi)[:, None]
        half = 0.5 * (hi - lo)[:, None]
        vals = f(mid + half * x)
        return (vals * w).sum(axis=1) * half[:, 0]

    coarse = panel(lo, hi)
    scale = abs(fsum(coarse))
    accepted, errors = [], []
    n_eval = coarse.size * order
    for _ in range(max_depth):
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        n_eval += 2 * lo.size * order
        fine = left + right
        err = np.abs(fine - coarse)
        tol = max(rel_tol * scale, abs_tol) * (hi - lo) / (b - a)
        ok = err <= tol
        accepted.append(fine[ok])
        errors.append(err[ok])
        if ok.all():
            return QuadResult(fsum(np.concatenate(accepted)), fsum(np.concatenate(errors)), n_eval)
        # the global budget also stops refinement near integrable endpoint singularities
        total_err = fsum(np.concatenate(errors + [err[~ok]]))
        if total_err <= max(rel_tol * scale, abs_tol):
            return QuadResult(fsum(np.concatenate(accepted + [fine[~ok]])), total_err, n_eval)
        keep = ~ok
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
        order_idx = np.argsort(lo, kind="stable")
        lo, hi, coarse = lo[order_idx], hi[order_idx], coarse[order_idx]
    value = fsum(np.concatenate(accepted + [coarse]))
    raise ToleranceNotMet("1-D adaptive quadrature exhausted its depth", value,
                          fsum(np.concatenate(errors)) + fsum(np.abs(coarse)))


# -- 2-D adaptive ---------------------------------------------------------


def _cell_rule(f, cells: np.ndarray, order: int) -> np.ndarray:
    """Tensor GL of ``f(u, v)`` on each cell ``[u0, u1, v0, v1]``."""
    x, w = gauss_legendre(order)
    um = 0.5 * (cells[:, 0] + cells[:, 1])
    uh = 0.5 * (cells[:, 1] - cells[:, 0])
    vm = 0.5 * (cells[:, 2] + cells[:, 3])
    vh = 0.5 * (cells[:, 3] - cells[:, 2])
    U = um[:, None, None] + uh[:, None, None] * x[None, :, None]
    V = vm[:, None, None] + vh[:, None, None] * x[None, None, :]
    vals = f(U, V)
    return np.einsum("cij,i,j->c", vals, w, w) * uh * vh


def _split(cells: np.ndarray) -> np.ndarray:
    um = 0.5 * (cells[:, 0] + cells[:, 1])
    vm = 0.5 * (cells[:, 2] + cells[:, 3])
    u0, u1, v0, v1 = cells.T
    kids = np.stack(
        [
            np.stack([u0, um, v0, vm], axis=1),
            np.stack([um, u1, v0, vm], axis=1),
            np.stack([u0, um, vm, v1], axis=1),
            np.stack([um, u1, vm, v1], axis=1),
        ],
        axis=1,
    )
    return kids.reshape(-1, 4)


def _evaluate_cells(f, cells, order, workers):
    if workers <= 1 or len(cells) < 2 * workers:
        return _cell_rule(f, cells, order)
    chunks = np.array_split(cells, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda c: _cell_rule(f, c, order), chunks))
    return np.concatenate(parts)


MAX_ACTIVE_CELLS = 1 << 16


def adaptive_rectangles(f: Callable, rects: Sequence[Tuple[float, float, float, float]],
                        cfg: QuadratureConfig, seed_cells: Sequence[Tuple[int, int]] = None,
                        abs_floor: float = 0.0) -> QuadResult:
    """Integrate ``f(u, v)`` over a union of rectangles.

    Each rectangle is seeded with a grid of cells, then every cell is compared
    against its four children; cells whose difference exceeds their share of
    ``rel_tol * |integral|`` are split. Work proceeds level by level in a fixed
    order, so the result does not depend on ``cfg.workers``.
    """
    cells = []
    total_area = sum((r[1] - r[0]) * (r[3] - r[2]) for r in rects)
    for k, (u0, u1, v0, v1) in enumerate(rects):
        if seed_cells is not None:
            nu, nv = seed_cells[k]
        else:
            nu = nv = max(1, cfg.seed_grid // cfg.order)
        us = np.linspace(u0, u1, nu + 1)
        vs = np.linspace(v0, v1, nv + 1)
        for i in range(nu):
            for j in range(nv):
                cells.append((us[i], us[i + 1], vs[j], vs[j + 1]))
    cells = np.array(cells, dtype=float).reshape(-1, 4)
    if cells.size == 0:
        return QuadResult(0.0, 0.0, 0)
    coarse = _evaluate_cells(f, cells, cfg.order, cfg.workers)
    # sum of |cell integrals| so cancelling integrands still get a sensible scale
    scale = fsum(np.abs(coarse))
    accepted, errors = [], []
    n_eval = len(cells) * cfg.order**2
    for _ in range(cfg.max_depth):
        if len(cells) > MAX_ACTIVE_CELLS:
            break
        kids = _split(cells)
        kid_vals = _evaluate_cells(f, kids, cfg.order, cfg.workers)
        n_eval += len(kids) * cfg.order**2
        fine = kid_vals.reshape(-1, 4)
        fine_sum = np.array([math.fsum(row) for row in fine])
        err = np.abs(fine_sum - coarse)
        area = (cells[:, 1] - cells[:, 0]) * (cells[:, 3] - cells[:, 2])
        tol = np.maximum(cfg.rel_tol * scale, abs_floor) * area / total_area
        ok = err <= tol
        accepted.append(fine_sum[ok])
        errors.append(err[ok])
        if ok.all():
            return QuadResult(fsum(np.concatenate(accepted)), fsum(np.concatenate(errors)), n_eval)
        bad = np.repeat(~ok, 4)
        cells = kids[bad]
        coarse = kid_vals[bad]
    value = fsum(np.concatenate(accepted + [coarse]))
    raise ToleranceNotMet("adaptive cubature exhausted max_depth", value,
                          fsum(np.concatenate(errors)) + fsum(np.abs(coarse)))


def integrate_chart(S: ParamSurface, f: Optional[Callable] = None, cfg: QuadratureConfig = None) -> QuadResult:
    """Integrate ``f(u, v)`` against the area element of ``S`` over its chart rectangle.

    ``f=None`` integrates 1 (the area).
    """
    cfg = cfg or QuadratureConfig()

    def integrand(U, V):
        dens = S.area_density(U, V)
        return dens if f is None else f(U, V) * dens

    u0, u1 = S.u_range
    v0, v1 = S.v_range
    return adaptive_rectangles(integrand, [(u0, u1, v0, v1)], cfg)


# -- cutoff integrals over surfaces --------------------------------------


def _complement(center, half, lo, hi, periodic):
    """Parameter intervals outside ``[center - half, center + half]``."""
    if periodic:
        return [(center + half, center + (hi - lo) - half)]
    out = []
    if center - half > lo:
        out.append((lo, center - half))
    if center + half < hi:
        out.append((center + half, hi))
    return out


class SurfaceCutoff:
    """Cutoff integrals of ``|x - y|^lam`` over ``S`` for one point ``x``.

    Construction integrates the smooth far field once; ``sample(eps)`` then
    adds the polar patch for each cutoff radius.
    """

    def __init__(self, S: ParamSurface, u: float, v: float, lam: float,
                 cfg: QuadratureConfig = None, length_scale: Optional[float] = None):
        self.cfg = cfg or QuadratureConfig()
        self.lam = float(lam)
        self.surface, u, v = S.local_chart(u, v)
        S = self.surface
        self.u0, self.v0 = float(u), float(v)
        self.x = S.chart(self.u0, self.v0)
        pu, pv = S.partials(self.u0, self.v0)
        self.su = float(np.linalg.norm(pu))
        self.sv = float(np.linalg.norm(pv))
        if self.su * self.sv < 1e-12 * S.diameter() ** 2:
            raise DomainError("chart is degenerate at the cutoff centre")
        self.length_scale = float(length_scale if length_scale is not None
                                  else S.local_length_scale(self.u0, self.v0))
        H = self.cfg.patch_factor * self.length_scale
        self.a = min(H / self.su, self._max_half(0, self.u0))
        self.b = min(H / self.sv, self._max_half(1, self.v0))
        self.A = self.a * self.su
        self.B = self.b * self.sv
        self._far: Optional[QuadResult] = None
        self._far_min_dist = math.inf

    def _max_half(self, axis: int, c: float) -> float:
        S = self.surface
        lo, hi = (S.u_range, S.v_range)[axis]
        if S.periodic[axis]:
            return 0.45 * (hi - lo)
        return 0.9 * min(c - lo, hi - c)

    @property
    def max_eps(self) -> float:
        """Largest cutoff for which the excluded ball is a patch-interior disk."""
        self.far_field()
        return min(0.5 * min(self.A, self.B), 0.9 * self._far_min_dist)

    def _integrand(self, U, V):
        Y = self.surface.chart(U, V)
        d2 = np.sum((Y - self.x) ** 2, axis=-1)
        self._far_min_dist = min(self._far_min_dist, float(np.sqrt(d2.min())))
        return d2 ** (0.5 * self.lam) * self.surface.area_density(U, V)

    def far_field(self) -> QuadResult:
        if self._far is None:
            S = self.surface
            ucomp = _complement(self.u0, self.a, *S.u_range, S.periodic[0])
            vcomp = _complement(self.v0, self.b, *S.v_range, S.periodic[1])
            vfull = (self.v0 - 0.5 * S.spans[1], self.v0 + 0.5 * S.spans[1]) if S.periodic[1] else S.v_range
            rects = [(u0, u1, vfull[0], vfull[1]) for (u0, u1) in ucomp]
            rects += [(self.u0 - self.a, self.u0 + self.a, v0, v1) for (v0, v1) in vcomp]
            # seed proportional to each rectangle's physical extent
            seeds = []
            base = max(2, self.cfg.seed_grid // self.cfg.order)
            for (u0, u1, v0, v1) in rects:
                lu = (u1 - u0) * self.su
                lv = (v1 - v0) * self.sv
                m = max(lu, lv)
                seeds.append((max(1, round(base * lu / m)), max(1, round(base * lv / m))))
            self._far = adaptive_rectangles(self._integrand, rects, self.cfg, seeds)
        return self._far

    # polar patch ---------------------------------------------------------
    def _sectors(self):
        tc = math.atan2(self.B, self.A)
        return [(-tc, tc), (tc, math.pi - tc), (math.pi - tc, math.pi + tc), (math.pi + tc, TWO_PI - tc)]

    def _rho_max(self, phi):
        c, s = np.abs(np.cos(phi)), np.abs(np.sin(phi))
        with np.errstate(divide="ignore"):
            return np.minimum(np.where(c > 0, self.A / c, np.inf), np.where(s > 0, self.B / s, np.inf))

    def _ray_points(self, rho, phi):
        U = self.u0 + rho * np.cos(phi) / self.su
        V = self.v0 + rho * np.sin(phi) / self.sv
        return U, V

    def _chord(self, rho, phi):
        Y = self.surface.chart(*self._ray_points(rho, phi))
        return np.sqrt(np.sum((Y - self.x) ** 2, axis=-1))

    def cutoff_radius(self, eps: float, phi: np.ndarray) -> np.ndarray:
        """Polar radius where the chord from ``x`` first reaches ``eps``, per ray."""
        rmax = self._rho_max(phi)
        lo = np.zeros_like(phi)
        hi = np.minimum(rmax, 4.0 * eps * np.ones_like(phi))
        need = self._chord(hi, phi) < eps
        hi = np.where(need, rmax, hi)
        # Illinois regula falsi on chord(rho) - eps, which is nearly linear in rho
        flo = np.full_like(phi, -eps)
        fhi = self._chord(hi, phi) - eps
        x = hi
        side = np.zeros(phi.shape, dtype=int)
        for _ in range(80):
            x = hi - fhi * (hi - lo) / (fhi - flo)
            x = np.where((x > lo) & (x < hi), x, 0.5 * (lo + hi))
            fx = self._chord(x, phi) - eps
            if np.all(np.abs(fx) <= 4e-16 * eps) or np.all(hi - lo <= 4e-16 * hi):
                break
            left = fx < 0
            lo, flo = np.where(left, x, lo), np.where(left, fx, flo)
            hi, fhi = np.where(left, hi, x), np.where(left, fhi, fx)
            fhi = np.where(left & (side == 1), 0.5 * fhi, fhi)
            flo = np.where(~left & (side == -1), 0.5 * flo, flo)
            side = np.where(left, 1, -1)
        return x

    def _patch(self, eps: float, n_phi: int, n_rad: int, ring_panels: int) -> float:
        xphi, wphi = gauss_legendre(n_phi)
        xr, wr = gauss_legendre(n_rad)
        total = []
        for (p0, p1) in self._sectors():
            ph = 0.5 * (p0 + p1) + 0.5 * (p1 - p0) * xphi
            wph = 0.5 * (p1 - p0) * wphi
            s_eps = np.log(self.cutoff_radius(eps, ph))
            s_max = np.log(self._rho_max(ph))
            s_ring = np.minimum(s_eps + math.log(4.0), s_max)
            n_rest = int(math.ceil(max(float(np.max(s_max - s_ring)), 0.0) / 1.0))
            bounds = [s_eps + (s_ring - s_eps) * k / ring_panels for k in range(ring_panels + 1)]
            bounds += [s_ring + (s_max - s_ring) * k / n_rest for k in range(1, n_rest + 1)]
            S_nodes, S_w = [], []
            for lo, hi in zip(bounds[:-1], bounds[1:]):
                half = 0.5 * (hi - lo)
                S_nodes.append(0.5 * (lo + hi)[:, None] + half[:, None] * xr[None, :])
                S_w.append(half[:, None] * wr[None, :])
            S_nodes = np.concatenate(S_nodes, axis=1)
            S_w = np.concatenate(S_w, axis=1)
            rho = np.exp(S_nodes)
            PH = np.broadcast_to(ph[:, None], rho.shape)
            U, V = self._ray_points(rho, PH)
            Y = self.surface.chart(U, V)
            d2 = np.sum((Y - self.x) ** 2, axis=-1)
            if np.any(d2 < (eps * (1 - 1e-9)) ** 2):
                raise DomainError("excluded ball is not a single disk on the chart patch")
            dens = self.surface.area_density(U, V) / (self.su * self.sv)
            vals = d2 ** (0.5 * self.lam) * dens * rho * rho
            total.append((vals * S_w).sum(axis=1) * wph)
        return fsum(np.concatenate(total))

    def sample(self, eps: float) -> CutoffSample:
        eps = float(eps)
        if not eps > 0:
            raise DomainError("cutoff eps must be positive")
        if eps >= self.max_eps:
            raise DomainError(
                f"eps={eps:g} too large: the excluded ball must be a small disk (limit {self.max_eps:g})"
            )
        cfg = self.cfg
        fine = self._patch(eps, cfg.angular_nodes, cfg.radial_order, cfg.ring_refinement)
        coarse = self._patch(eps, max(4, (3 * cfg.angular_nodes) // 4), max(4, (2 * cfg.radial_order) // 3),
                             max(1, cfg.ring_refinement // 2))
        far = self.far_field()
        value = math.fsum([fine, far.value])
        return CutoffSample(eps, value, abs(fine - coarse) + far.error)


def cutoff_potential_integral(S: ParamSurface, x, eps: float, lam: float = -4.0,
                              cfg: QuadratureConfig = None) -> CutoffSample:
    """``int_{S minus B_eps(x)} |x - y|^lam dA(y)``; ``x`` is a SurfacePointData or ``(u, v)``."""
    u, v = (x.u, x.v) if isinstance(x, SurfacePointData) else x
    return SurfaceCutoff(S, u, v, lam, cfg).sample(eps)


# -- cutoff integrals over curves -------------------------------------------


class CurveCutoff:
    """Cutoff integrals of ``|x - y|^lam ds(y)`` over a closed curve.

    ``mode="chord"`` excludes ``|x - y| < eps``; ``mode="arc"`` excludes points
    within arclength ``eps`` of ``x``.
    """

    def __init__(self, K: Curve, t: float, lam: float = -2.0, cfg: QuadratureConfig = None,
                 mode: str = "chord", length_scale: Optional[float] = None):
        if mode not in ("chord", "arc"):
            raise DomainError(f"unknown cutoff mode {mode!r}")
        self.K = K
        self.t0 = float(t)
        self.lam = float(lam)
        self.cfg = cfg or QuadratureConfig()
        self.mode = mode
        self.x = K.point(self.t0)
        self.speed0 = float(K.speed(self.t0))
        ell = float(length_scale if length_scale is not None else K.length_scale())
        self.a = min(self.cfg.patch_factor * ell / self.speed0, 0.45 * K.period)
        self._far: Optional[QuadResult] = None
        self._far_min = math.inf

    def _f(self, t):
        d2 = np.sum((self.K.point(t) - self.x) ** 2, axis=-1)
        self._far_min = min(self._far_min, float(np.sqrt(d2.min())))
        return d2 ** (0.5 * self.lam) * self.K.speed(t)

    def far_field(self) -> QuadResult:
        if self._far is None:
            tol = max(self.cfg.rel_tol, 1e-14)
            self._far = adaptive_interval(self._f, self.t0 + self.a, self.t0 + self.K.period - self.a,
                                          rel_tol=tol, order=16)
        return self._far

    def _measure(self, t):
        """Chord or arclength from ``x`` to ``p(t)``, for scalar or array ``t``."""
        t = np.asarray(t, dtype=float)
        if self.mode == "chord":
            return np.linalg.norm(self.K.point(t) - self.x, axis=-1)
        x, w = gauss_legendre(24)
        half = 0.5 * (t - self.t0)
        nodes = self.t0 + half[..., None] * (1 + x)
        return np.abs(half) * (self.K.speed(nodes) * w).sum(axis=-1)

    @property
    def max_eps(self) -> float:
        self.far_field()
        end = np.array([self.t0 + self.a, self.t0 - self.a])
        return float(min(0.5 * np.min(self._measure(end)), 0.9 * self._far_min))

    def _cutoff_params(self, eps):
        sides = np.array([1.0, -1.0])
        lo = np.zeros(2)
        hi = np.full(2, self.a)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            inside = self._measure(self.t0 + sides * mid) < eps
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        return 0.5 * (lo + hi)

    def _near(self, eps, order, ring_panels):
        xr, wr = gauss_legendre(order)
        offs = self._cutoff_params(eps)
        total = []
        for sign, off in zip((1.0, -1.0), offs):
            s_eps, s_max = math.log(off), math.log(self.a)
            s_ring = min(s_eps + math.log(4.0), s_max)
            n_rest = int(math.ceil(max(s_max - s_ring, 0.0)))
            bounds = [s_eps + (s_ring - s_eps) * k / ring_panels for k in range(ring_panels + 1)]
            bounds += [s_ring + (s_max - s_ring) * k / n_rest for k in range(1, n_rest + 1)]
            for lo, hi in zip(bounds[:-1], bounds[1:]):
                half = 0.5 * (hi - lo)
                s = 0.5 * (lo + hi) + half * xr
                tau = np.exp(s)
                t = self.t0 + sign * tau
                d2 = np.sum((self.K.point(t) - self.x) ** 2, axis=-1)
                total.append(d2 ** (0.5 * self.lam) * self.K.speed(t) * tau * wr * half)
        return fsum(np.concatenate(total))

    def sample(self, eps: float) -> CutoffSample:
        eps = float(eps)
        if not eps > 0:
            raise DomainError("cutoff eps must be positive")
        if eps >= self.max_eps:
            raise DomainError(f"eps={eps:g} too large for the curve (limit {self.max_eps:g})")
        fine = self._near(eps, self.cfg.radial_order, self.cfg.ring_refinement)
        coarse = self._near(eps, max(4, (2 * self.cfg.radial_order) // 3), max(1, self.cfg.ring_refinement // 2))
        far = self.far_field()
        return CutoffSample(eps, math.fsum([fine, far.value]), abs(fine - coarse) + far.error)


# -- cutoff energies --------------------------------------------------------


@lru_cache(maxsize=None)
def clenshaw_curtis(m: int):
    """Angles ``k pi / m`` and Clenshaw-Curtis weights on ``[-1, 1]`` (``m`` even)."""
    if m < 2 or m % 2:
        raise DomainError("Clenshaw-Curtis needs an even number of intervals")
    th = math.pi * np.arange(m + 1) / m
    j = np.arange(1, m // 2 + 1)
    b = np.where(j == m // 2, 1.0, 2.0)
    w = 1.0 - np.sum(b[None, :] * np.cos(2 * np.outer(np.arange(m + 1), j) * math.pi / m) / (4 * j * j - 1), axis=1)
    w *= 2.0 / m
    w[0] *= 0.5
    w[-1] *= 0.5
    th.setflags(write=False)
    w.setflags(write=False)
    return th, w


def default_ladder(length_scale: float, top: float = 0.4, levels: int = 7) -> List[float]:
    """Geometric ladder ``top * ell * 2^-k``, ``k = 0..levels-1``."""
    return [top * length_scale * 2.0**-k for k in range(levels)]


def outer_nodes(S: ParamSurface, n: int, nv: Optional[int] = None):
    """Nested outer rule for integrating a function of ``x`` over ``S``.

    Returns ``(u, v, weights)`` where the weights include the area density.
    Surfaces advertising revolution symmetry only sample ``v = v0``; periodic
    axes use the trapezoid rule, non-periodic ones Clenshaw-Curtis. Doubling
    ``n`` reuses every previous node.
    """

    def axis(lo, hi, periodic, m):
        if periodic:
            t = lo + (hi - lo) * np.arange(m) / m
            return t, np.full(m, (hi - lo) / m)
        th, w = clenshaw_curtis(m)
        return lo + (hi - lo) * 0.5 * (1 - np.cos(th)), 0.5 * (hi - lo) * w

    uu, wu = axis(*S.u_range, S.periodic[0], n)
    if S.revolution:
        vv, wv = np.array([S.v_range[0]]), np.array([S.spans[1]])
    else:
        vv, wv = axis(*S.v_range, S.periodic[1], nv if nv else max(4, n // 2))
    U, V = np.meshgrid(uu, vv, indexing="ij")
    W = (np.outer(wu, wv) * S.area_density(U, V)).ravel()
    # degenerate boundary rows (sphere poles) carry no weight
    keep = W > 0
    return U.ravel()[keep], V.ravel()[keep], W[keep]


def _map_ordered(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cutoff_energy_samples(M, eps_list: Sequence[float], lam: float, cfg: QuadratureConfig = None,
                          n_outer: int = 32, workers: int = 1) -> List[CutoffSample]:
    """``E(eps) = iint_{M x M, |x - y| >= eps} |x - y|^lam`` for each ``eps``."""
    cfg = cfg or QuadratureConfig()
    eps_list = [float(e) for e in eps_list]
    if isinstance(M, PlanarDisk):
        return [_disk_cutoff_energy(M, e, lam) for e in eps_list]
    if isinstance(M, Curve):
        ell = M.length_scale()
        ts = M.period * np.arange(n_outer) / n_outer
        w = M.period / n_outer * M.speed(ts)

        def one(t):
            c = CurveCutoff(M, t, lam, cfg, length_scale=ell)
            return [c.sample(e) for e in eps_list]

        rows = _map_ordered(one, ts, workers)
    elif isinstance(M, ParamSurface):
        ell = M.length_scale()
        U, V, w = outer_nodes(M, n_outer)

        def one(uv):
            c = SurfaceCutoff(M, uv[0], uv[1], lam, cfg, length_scale=ell)
            return [c.sample(e) for e in eps_list]

        rows = _map_ordered(one, list(zip(U, V)), workers)
    else:
        raise DomainError(f"unsupported domain {type(M).__name__}")
    out = []
    for k, e in enumerate(eps_list):
        vals = [r[k].value for r in rows]
        errs = [r[k].err_est for r in rows]
        out.append(CutoffSample(e, math.fsum(np.multiply(w, vals)), math.fsum(np.multiply(w, errs))))
    return out


def cutoff_energy_integral(M, eps: float, lam: float, cfg: QuadratureConfig = None, **kw) -> CutoffSample:
    return cutoff_energy_samples(M, [eps], lam, cfg, **kw)[0]


def _disk_overlap(r, radius):
    """Area of a disk intersected with its translate by ``r``."""
    q = np.clip(r / (2 * radius), 0.0, 1.0)
    return 2 * radius**2 * (np.arccos(q) - q * np.sqrt(1 - q * q))


def _disk_cutoff_energy(D: PlanarDisk, eps: float, lam: float) -> CutoffSample:
    # pairs at distance r have density 2 pi r * overlap(r)
    diam = D.diameter()
    if not 0 < eps < diam:
        raise DomainError("eps must lie strictly between 0 and the disk diameter")

    def f(s):
        r = np.exp(s)
        return r ** (lam + 2) * 2 * math.pi * _disk_overlap(r, D.radius)

    # log variable near eps, then sqrt-type endpoint at the diameter
    s_lo, s_mid = math.log(eps), math.log(0.5 * diam)
    first = adaptive_interval(f, s_lo, s_mid, rel_tol=1e-14, order=20) if eps < 0.5 * diam else QuadResult(0.0, 0.0)
    r0 = max(eps, 0.5 * diam)

    def g(w):
        r = diam - w * w
        return r**lam * 2 * math.pi * r * _disk_overlap(r, D.radius) * 2 * w

    second = adaptive_interval(g, 0.0, math.sqrt(diam - r0), rel_tol=1e-14, order=20)
    return CutoffSample(eps, math.fsum([first.value, second.value]), first.error + second.error)


# -- asymptotic fitting ---------------------------------------------------

BASIS_ORDER = ("eps^-2", "eps^-1", "log", "1", "eps", "eps^2", "eps^3")

_BASIS_FUNCS = {
    "eps^-2": lambda e: e**-2,
    "eps^-1": lambda e: 1.0 / e,
    "log": np.log,
    "1": lambda e: np.ones_like(e),
    "eps": lambda e: e,
    "eps^2": lambda e: e**2,
    "eps^3": lambda e: e**3,
}


@dataclass(frozen=True)
class AsymptoticFit:
    basis: Tuple[str, ...]
    coefficients: Dict[str, float]
    residual: float
    condition: float
    eps: Tuple[float, ...] = field(default=())

    def __getitem__(self, name: str) -> float:
        return self.coefficients.get(name, 0.0)

    def full_vector(self, names: Sequence[str] = BASIS_ORDER[:6]) -> List[float]:
        return [self.coefficients.get(n, 0.0) for n in names]

    def to_dict(self) -> dict:
        return {
            "basis": list(self.basis),
            "coefficients": {k: self.coefficients[k] for k in self.basis},
            "residual": self.residual,
            "condition": self.condition,
            "eps": list(self.eps),
        }


def fit_asymptotics(samples: Sequence[CutoffSample], basis: Sequence[str], cond_limit: float = 1e12) -> AsymptoticFit:
    """Least-squares fit of cutoff samples in a chosen subset of the expansion basis."""
    basis = tuple(basis)
    unknown = [b for b in basis if b not in _BASIS_FUNCS]
    if unknown:
        raise DomainError(f"unknown basis functions {unknown}")
    if len(samples) < len(basis) + 2:
        raise DomainError(f"need at least {len(basis) + 2} samples for a {len(basis)}-term fit")
    eps = np.array([s.eps for s in samples], dtype=float)
    if eps.max() / eps.min() < 8.0 * (1 - 1e-12):
        raise DomainError("samples must span at least a factor 8 in eps")
    y = np.array([s.value for s in samples], dtype=float)
    A = np.column_stack([_BASIS_FUNCS[b](eps) for b in basis])
    norms = np.linalg.norm(A, axis=0)
    As = A / norms
    cond = float(np.linalg.cond(As))
    if not np.isfinite(cond) or cond > cond_limit:
        raise IllConditionedFit(f"design matrix condition number {cond:.3g} exceeds {cond_limit:g}")
    sol, *_ = np.linalg.lstsq(As, y, rcond=None)
    coef = sol / norms
    resid = y - A @ coef
    return AsymptoticFit(
        basis=basis,
        coefficients={b: float(c) for b, c in zip(basis, coef)},
        residual=float(np.max(np.abs(resid))),
        condition=cond,
        eps=tuple(float(e) for e in eps),
    )
