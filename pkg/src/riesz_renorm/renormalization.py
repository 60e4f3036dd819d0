"""Renormalized potentials and energies of surfaces (r^-4) and knots (r^-2)."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import closed_forms as cf
from .errors import DomainError, NonConvergence
from .geometry import Circle, Curve, ParamSurface, PlanarDisk, RevolutionTorus, Sphere
from .quadrature import (
    AsymptoticFit,
    CurveCutoff,
    CutoffSample,
    QuadratureConfig,
    SurfaceCutoff,
    _map_ordered,
    cutoff_energy_samples,
    default_ladder,
    fit_asymptotics,
    outer_nodes,
)

logger = logging.getLogger(__name__)

SURFACE_BASIS = ("eps^-2", "log", "1", "eps", "eps^2")
CURVE_BASIS = ("eps^-1", "1", "eps", "eps^2", "eps^3")
PLANAR_BASIS = ("eps^-2", "eps^-1", "1", "eps")


@dataclass(frozen=True)
class RenormConfig:
    """Knobs of the renormalization pipeline.

    Ladders are ``top * ell * 2^-k`` where ``ell`` is the smallest principal
    radius of curvature at the point (surfaces) or on the curve (knots).
    """

    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    ladder_top: float = 0.2
    knot_ladder_top: float = 0.02
    ladder_levels: int = 7
    basis: Tuple[str, ...] = ("1", "eps", "eps^2")
    log_normalization: float = 1.0
    residual_rel: float = 1e-5
    energy_rel_tol: float = 1e-5
    outer_start: int = 16
    outer_max: int = 256
    workers: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["basis"] = list(self.basis)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RenormConfig":
        d = dict(d)
        quad = QuadratureConfig(**d.pop("quad", {}))
        if "basis" in d:
            d["basis"] = tuple(d["basis"])
        return cls(quad=quad, **d)


@dataclass(frozen=True)
class RenormPotentialResult:
    value: float
    fit: AsymptoticFit
    counterterms: Dict[str, float]
    err_est: float = 0.0

    def to_dict(self) -> dict:
        return {"value": self.value, "err_est": self.err_est, "counterterms": dict(self.counterterms),
                "fit": self.fit.to_dict()}


@dataclass(frozen=True)
class EnergyReport:
    value: float
    method: str
    err_est: float
    surface: dict
    config: dict
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("closed-form", "numeric-renormalized", "cutoff-fit"):
            raise DomainError(f"unknown method tag {self.method!r}")
        if not self.err_est >= 0:
            raise DomainError("err_est must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


def _ladder(length_scale: float, top: float, levels: int, limit: float) -> List[float]:
    hi = min(top * length_scale, 0.95 * limit)
    return [hi * 2.0**-k for k in range(levels)]


def _accept(fit: AsymptoticFit, value: float, length_scale: float, cfg: RenormConfig, what: str, inv_dim: int):
    # the potential carries units length^-inv_dim
    bound = cfg.residual_rel * (abs(value) + length_scale**-inv_dim)
    if not fit.residual <= bound:
        raise NonConvergence(
            f"{what}: fit residual {fit.residual:.3g} exceeds {bound:.3g}",
            {"fit": fit.to_dict(), "bound": bound},
        )


def log_counterterm(delta: float, eps, c: float = 1.0):
    """``(pi Delta / 16) log(c Delta eps^2)``, defined as 0 when ``Delta = 0``."""
    if delta == 0.0:
        return 0.0 * np.asarray(eps, dtype=float)
    return math.pi * delta / 16 * np.log(c * delta * np.asarray(eps, dtype=float) ** 2)


def surface_potential(S: ParamSurface, u: float, v: float, cfg: RenormConfig = None,
                      point=None) -> RenormPotentialResult:
    """Renormalized r^-4 potential of ``S`` at the chart point ``(u, v)``.

    Each cutoff sample has the divergent counterterms removed analytically; the
    remainder is extrapolated to ``eps = 0`` in ``cfg.basis``.
    """
    cfg = cfg or RenormConfig()
    if point is not None:
        resid = float(np.linalg.norm(S.chart(u, v) - np.asarray(point, dtype=float)))
        if resid > 1e-9 * max(1.0, S.diameter()):
            raise DomainError(f"point is not on the surface (chord residual {resid:.3g})")
    # curvature and scales come from the well-conditioned local chart
    S, u, v = S.local_chart(u, v)
    data = S.curvature(u, v)
    ell = S.local_length_scale(u, v)
    cut = SurfaceCutoff(S, u, v, -4.0, cfg.quad, length_scale=ell)
    ladder = _ladder(ell, cfg.ladder_top, cfg.ladder_levels, cut.max_eps)
    samples = []
    for eps in ladder:
        s = cut.sample(eps)
        shifted = (s.value - math.pi / eps**2 + float(log_counterterm(data.delta, eps, cfg.log_normalization))
                   + math.pi * data.gauss / 4)
        samples.append(CutoffSample(eps, shifted, s.err_est))
    fit = fit_asymptotics(samples, cfg.basis)
    value = fit["1"]
    _accept(fit, value, ell, cfg, "surface potential", 2)
    return RenormPotentialResult(
        value=value,
        fit=fit,
        counterterms={"inverse_square": math.pi, "log": math.pi * data.delta / 16,
                      "gauss": math.pi * data.gauss / 4},
        err_est=fit.residual + max(s.err_est for s in samples),
    )


def _outer_energy(S: ParamSurface, V_at, cfg: RenormConfig, workers: int):
    """Nested-rule integral of ``V`` over ``S`` with doubling until converged."""
    cache: Dict[Tuple[float, float], float] = {}
    mirror = S.revolution and S.even_in_u and S.periodic[0]

    def key(u, v):
        if mirror:
            # V(u) = V(-u): evaluate only on [u0, u0 + pi]
            lo = S.u_range[0]
            w = (u - lo) % S.spans[0]
            u = lo + min(w, S.spans[0] - w)
        return (round(float(u), 14), round(float(v), 14))

    def integral(n, nv=None):
        U, V, W = outer_nodes(S, n, nv)
        keys = [key(a, b) for a, b in zip(U, V)]
        todo = sorted({k for k in keys if k not in cache})
        for k, val in zip(todo, _map_ordered(lambda k: V_at(*k), todo, workers)):
            cache[k] = val
        return math.fsum(W * np.array([cache[k] for k in keys]))

    def tol(value):
        # energies are dimensionless; zero-energy surfaces use an absolute floor of 1
        return cfg.energy_rel_tol * max(abs(value), 1.0)

    if not S.revolution:
        return _outer_energy_2d(integral, tol, cfg, cache)

    n = cfg.outer_start
    prev = integral(n)
    while True:
        n *= 2
        cur = integral(n)
        err = abs(cur - prev)
        if err <= tol(cur):
            return cur, err, n, len(cache)
        if n >= cfg.outer_max:
            raise NonConvergence(f"outer energy quadrature did not settle by n={n}", {"last": cur, "change": err})
        prev = cur


def _outer_energy_2d(integral, tol, cfg: RenormConfig, cache):
    """Refine the two parameter axes separately and combine the sparse-grid way."""
    nu, nv = cfg.outer_start, max(4, cfg.outer_start // 2)
    while True:
        base = integral(nu, nv)
        eu, ev = integral(2 * nu, nv), integral(nu, 2 * nv)
        du, dv = abs(eu - base), abs(ev - base)
        cur = eu + ev - base
        if du <= tol(cur) and dv <= tol(cur):
            return cur, du + dv, 2 * nu, len(cache)
        if du > tol(cur):
            nu *= 2
        if dv > tol(cur):
            nv *= 2
        if max(nu, nv) >= cfg.outer_max:
            raise NonConvergence(f"outer energy quadrature did not settle by n={max(nu, nv)}",
                                 {"last": cur, "change": du + dv})


def surface_energy(S: ParamSurface, cfg: RenormConfig = None, workers: Optional[int] = None) -> EnergyReport:
    """Integral of the renormalized potential over a closed surface."""
    cfg = cfg or RenormConfig()
    workers = cfg.workers if workers is None else workers
    if not (S.closed or isinstance(S, Sphere) or getattr(S, "closes_up", False)):
        raise DomainError("surface energy needs a closed surface")
    value, err, n, evals = _outer_energy(S, lambda u, v: surface_potential(S, u, v, cfg).value, cfg, workers)
    return EnergyReport(value, "numeric-renormalized", err, S.describe(), cfg.to_dict(),
                        {"outer_nodes": n, "potential_evaluations": evals})


def _curve_cut(K: Curve, t: float, cfg: RenormConfig, mode: str):
    return CurveCutoff(K, t, -2.0, cfg.quad, mode=mode, length_scale=K.length_scale())


def knot_potential(K: Curve, t: float, cfg: RenormConfig = None, mode: str = "chord") -> RenormPotentialResult:
    """``lim (int_{K \\ B_eps(x)} |x - y|^-2 dy - 2/eps)`` at ``x = K(t)``.

    ``mode="arc"`` removes the arclength neighbourhood instead of the chord ball.
    """
    cfg = cfg or RenormConfig()
    ell = K.length_scale()
    cut = _curve_cut(K, t, cfg, mode)
    ladder = _ladder(ell, cfg.knot_ladder_top, cfg.ladder_levels, cut.max_eps)
    samples = []
    for eps in ladder:
        s = cut.sample(eps)
        samples.append(CutoffSample(eps, s.value - 2.0 / eps, s.err_est))
    fit = fit_asymptotics(samples, cfg.basis)
    value = fit["1"]
    _accept(fit, value, ell, cfg, "knot potential", 1)
    return RenormPotentialResult(value, fit, {"inverse": 2.0}, fit.residual + max(s.err_est for s in samples))


def knot_energy(K: Curve, cfg: RenormConfig = None, mode: str = "chord", workers: Optional[int] = None) -> EnergyReport:
    """Trapezoid integral of the knot potential against arclength, doubled until settled."""
    cfg = cfg or RenormConfig()
    workers = cfg.workers if workers is None else workers
    cache: Dict[float, float] = {}

    def integral(n):
        ts = K.period * np.arange(n) / n
        todo = [t for t in ts if float(t) not in cache]
        for t, val in zip(todo, _map_ordered(lambda t: knot_potential(K, t, cfg, mode).value, todo, workers)):
            cache[float(t)] = val
        w = K.period / n * K.speed(ts)
        return math.fsum(w * np.array([cache[float(t)] for t in ts]))

    n = cfg.outer_start
    prev = integral(n)
    while True:
        n *= 2
        cur = integral(n)
        err = abs(cur - prev)
        # the circle family has energy 0, so measure against the length instead
        if err <= cfg.energy_rel_tol * max(abs(cur), 1e-3):
            break
        if n >= cfg.outer_max:
            raise NonConvergence("knot energy quadrature did not settle", {"last": cur, "change": err})
        prev = cur
    return EnergyReport(cur, "numeric-renormalized", err, K.describe(), cfg.to_dict(),
                        {"outer_nodes": n, "cutoff": mode})


# -- expansions of the global cutoff energy ---------------------------------------


@dataclass(frozen=True)
class ExpansionCheck:
    fit: AsymptoticFit
    predicted: Dict[str, float]
    samples: Tuple[CutoffSample, ...]

    def relative_deviation(self, name: str) -> float:
        p = self.predicted[name]
        return abs(self.fit[name] - p) / abs(p) if p != 0 else abs(self.fit[name])

    def to_dict(self) -> dict:
        return {
            "fit": self.fit.to_dict(),
            "predicted": dict(self.predicted),
            "deviation": {k: self.fit[k] - v for k, v in self.predicted.items()},
            "samples": [[s.eps, s.value, s.err_est] for s in self.samples],
        }


def expansion_check(M, lam: float, basis: Optional[Sequence[str]] = None, cfg: RenormConfig = None,
                    ladder: Optional[Sequence[float]] = None, workers: Optional[int] = None) -> ExpansionCheck:
    """Fit the small-eps expansion of the double cutoff integral and pair it with predictions."""
    cfg = cfg or RenormConfig()
    workers = cfg.workers if workers is None else workers
    if isinstance(M, Circle):
        if lam != -2:
            raise DomainError("curve expansion is defined for lambda = -2")
        basis = tuple(basis or CURVE_BASIS)
        predicted = {"eps^-1": 2 * M.length(), "1": 0.0}
        n_outer = 8
    elif isinstance(M, RevolutionTorus):
        if lam != -4:
            raise DomainError("surface expansion is defined for lambda = -4")
        basis = tuple(basis or SURFACE_BASIS)
        # scale invariance: Delta integrals rescale, Delta log Delta picks up -2 log(scale) * int Delta
        d_int = cf.delta_integral_closed(M.R)
        dlog = cf.delta_log_delta_integral(M.R) - 2 * math.log(M.scale) * d_int
        chi = 0
        predicted = {
            "eps^-2": math.pi * M.area(),
            "log": -math.pi / 8 * d_int,
            "1": cf.torus_energy_closed(M.R) - math.pi / 16 * dlog - math.pi**2 / 2 * chi,
        }
        n_outer = 64
    elif isinstance(M, PlanarDisk):
        if lam != -4:
            raise DomainError("planar expansion is defined for lambda = -4")
        basis = tuple(basis or PLANAR_BASIS)
        predicted = {"eps^-2": math.pi * M.area(), "eps^-1": -2 * M.perimeter()}
        n_outer = 0
    else:
        raise DomainError(f"expansion check supports circles, tori of revolution and disks, not {type(M).__name__}")
    if ladder is None:
        ladder = default_ladder(M.length_scale(), 0.4, cfg.ladder_levels)
    samples = cutoff_energy_samples(M, ladder, lam, cfg.quad, n_outer=n_outer, workers=workers)
    fit = fit_asymptotics(samples, basis)
    return ExpansionCheck(fit, predicted, tuple(samples))


# -- tubes around the unit circle ------------------------------------------------

TUBE_LEADING = math.pi**3 * (3 * cf.LOG2 - 1) / 2
TUBE_LINEAR = 3 * math.pi**3 * (cf.LOG2 + 1) / 4
TUBE_CUBIC = math.pi**3 * (9 * cf.LOG2 - 11) / 16


def tube_energy(eps_tube: float) -> float:
    """Energy of the boundary of the radius-``eps`` tube around the unit circle.

    That surface is similar to ``T_{1/eps}``, and the energy is scale invariant.
    """
    eps_tube = float(eps_tube)
    if not 0.0 < eps_tube < 1.0:
        raise DomainError(f"tube radius must lie in (0, 1), got {eps_tube}")
    return cf.torus_energy_closed(1.0 / eps_tube)


def tube_series_residual(eps_tube: float) -> float:
    """Tube energy minus its ``1/eps`` and ``eps`` terms."""
    return tube_energy(eps_tube) - TUBE_LEADING / eps_tube - TUBE_LINEAR * eps_tube


def tube_linear_coefficient(eps_pair: Tuple[float, float] = (1e-2, 1e-3)) -> float:
    """Richardson estimate of the ``eps`` coefficient from two tube radii.

    ``(E - leading/eps)/eps = c1 + c3 eps^2 + ...``; eliminating ``c3`` uses
    the ratio of the squared radii.
    """
    e1, e2 = eps_pair
    g = [(tube_energy(e) - TUBE_LEADING / e) / e for e in (e1, e2)]
    r = (e1 / e2) ** 2
    return (r * g[1] - g[0]) / (r - 1)


def tube_cubic_coefficient(eps_values: Sequence[float] = (0.2, 0.1, 0.05)) -> float:
    """Three-point fit of the residual in ``{eps^3, eps^5, eps^7}``; returns the cubic coefficient."""
    e = np.asarray(eps_values, dtype=float)
    if e.size != 3:
        raise DomainError("cubic extraction uses exactly three radii")
    A = np.column_stack([e**3, e**5, e**7])
    y = np.array([tube_series_residual(x) for x in e])
    return float(np.linalg.solve(A, y)[0])


def tube_residual_ladder(eps_values: Sequence[float]) -> List[Tuple[float, float, float]]:
    """Rows ``(eps, energy, residual)`` for the tube series."""
    return [(float(e), tube_energy(e), tube_series_residual(e)) for e in eps_values]
