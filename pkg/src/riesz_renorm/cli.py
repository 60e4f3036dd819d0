"""Command-line front end: ``riesz-renorm <command> [options]``.

Exit codes: 0 success, 1 a verify criterion failed, 2 usage or validation error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from . import closed_forms as cf
from .errors import DomainError, IllConditionedFit, NonConvergence, RenormError, ToleranceNotMet
from .geometry import Circle, PlanarDisk, RevolutionTorus, Sphere
from .quadrature import QuadratureConfig
from .renormalization import (
    RenormConfig,
    expansion_check,
    surface_energy,
    surface_potential,
    tube_cubic_coefficient,
    tube_linear_coefficient,
    tube_residual_ladder,
)
from .serialize import csv_text, dumps, loads

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything that determines a command's output.

    ``threads`` and ``out`` only decide how and where the work happens, so they
    are left out of :meth:`to_dict`; the echo then stays identical across
    thread counts.
    """

    command: str
    surface: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    ladder: Optional[List[float]] = None
    quad: dict = field(default_factory=dict)
    renorm: dict = field(default_factory=dict)
    format: str = "json"
    threads: int = 1
    out: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "surface": dict(self.surface),
            "params": dict(self.params),
            "ladder": None if self.ladder is None else list(self.ladder),
            "quad": dict(self.quad),
            "renorm": dict(self.renorm),
            "format": self.format,
        }

    @classmethod
    def from_dict(cls, d: dict, threads: int = 1, out: Optional[str] = None) -> "RunConfig":
        return cls(command=d["command"], surface=dict(d.get("surface", {})), params=dict(d.get("params", {})),
                   ladder=d.get("ladder"), quad=dict(d.get("quad", {})), renorm=dict(d.get("renorm", {})),
                   format=d.get("format", "json"), threads=threads, out=out)

    def renorm_config(self) -> RenormConfig:
        quad = replace(QuadratureConfig(**self.quad), workers=self.threads)
        return replace(RenormConfig(), quad=quad, workers=self.threads, **self.renorm)


# -- argument parsing ----------------------------------------------------------


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: $RENORM_THREADS or 1); results do not depend on it")
    common.add_argument("--out", default=None, help="write output to this path instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--ladder-top", type=float, default=None, help="top cutoff rung, relative to the local length scale")
    common.add_argument("--ladder-levels", type=int, default=None)
    common.add_argument("--quad-rel-tol", type=float, default=None)
    common.add_argument("--angular-nodes", type=int, default=None)
    common.add_argument("--radial-order", type=int, default=None)

    p = argparse.ArgumentParser(prog="riesz-renorm", description="Renormalized r^-4 energies of surfaces and curves.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("energy", parents=[common], help="energy of a torus of revolution or a round sphere")
    g = e.add_mutually_exclusive_group(required=True)
    g.add_argument("--torus", type=float, metavar="R")
    g.add_argument("--sphere", type=float, metavar="r")
    e.add_argument("--method", choices=("closed", "numeric", "both"), default="closed")

    q = sub.add_parser("potential", parents=[common], help="renormalized potential along a meridian of T_R")
    q.add_argument("--torus", type=float, metavar="R", required=True)
    q.add_argument("--alpha", type=_float_list, required=True, help="comma-separated meridian angles")
    q.add_argument("--no-numeric", action="store_true", help="closed form only")

    s = sub.add_parser("sweep", parents=[common], help="closed-form E(R) and dE/dR on a grid")
    s.add_argument("--from", dest="lo", type=float, default=1.1)
    s.add_argument("--to", dest="hi", type=float, default=3.0)
    s.add_argument("--steps", type=_positive_int, default=20)
    s.add_argument("--numeric", action="store_true", help="add the numeric energy column")

    m = sub.add_parser("minimize", parents=[common], help="minimizer of the closed-form torus energy")
    m.add_argument("--bracket", type=_float_list, default=[1.1, 3.0])

    f = sub.add_parser("fit", parents=[common], help="fit the small-eps expansion of a global cutoff energy")
    g = f.add_mutually_exclusive_group(required=True)
    g.add_argument("--disk", type=float, nargs="?", const=1.0, metavar="RADIUS")
    g.add_argument("--circle", type=float, nargs="?", const=1.0, metavar="RADIUS")
    g.add_argument("--torus", type=float, metavar="R")
    f.add_argument("--lambda", dest="lam", type=float, required=True)
    f.add_argument("--eps", type=_float_list, default=None, help="explicit cutoff ladder")

    t = sub.add_parser("tube", parents=[common], help="tube energy series around the unit circle")
    t.add_argument("--eps", type=_float_list, default=[0.2, 0.1, 0.05, 0.02, 0.01, 0.001])

    c = sub.add_parser("clifford", parents=[common], help="stereographic image of the Clifford torus")
    c.add_argument("--pole", type=_float_list, default=[0.0, 0.0, 0.0, 1.0])

    v = sub.add_parser("verify", parents=[common], help="run the acceptance criteria")
    v.add_argument("--criteria", type=_int_list, default=None, help="subset, e.g. 3,9,10")
    return p


def _default_threads() -> int:
    env = os.environ.get("RENORM_THREADS")
    if env is None:
        return 1
    try:
        n = int(env)
    except ValueError as exc:
        raise UsageError(f"RENORM_THREADS must be an integer, got {env!r}") from exc
    if n < 1:
        raise UsageError("RENORM_THREADS must be positive")
    return n


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    cmd = args.command
    threads = args.threads if args.threads is not None else _default_threads()
    fmt = args.format or ("csv" if cmd in ("potential", "sweep", "tube") else "json")
    quad = {}
    for key, attr in (("rel_tol", "quad_rel_tol"), ("angular_nodes", "angular_nodes"), ("radial_order", "radial_order")):
        val = getattr(args, attr)
        if val is not None:
            quad[key] = val
    renorm = {}
    if args.ladder_top is not None:
        renorm["ladder_top"] = args.ladder_top
        renorm["knot_ladder_top"] = args.ladder_top
    if args.ladder_levels is not None:
        renorm["ladder_levels"] = args.ladder_levels

    surface, params, ladder = {}, {}, None
    if cmd == "energy":
        surface = {"kind": "torus", "R": args.torus} if args.torus is not None else {"kind": "sphere", "r": args.sphere}
        params = {"method": args.method}
    elif cmd == "potential":
        surface = {"kind": "torus", "R": args.torus}
        params = {"alpha": list(args.alpha), "numeric": not args.no_numeric}
    elif cmd == "sweep":
        params = {"from": args.lo, "to": args.hi, "steps": args.steps, "numeric": args.numeric}
    elif cmd == "minimize":
        params = {"bracket": list(args.bracket)}
    elif cmd == "fit":
        if args.disk is not None:
            surface = {"kind": "disk", "r": args.disk}
        elif args.circle is not None:
            surface = {"kind": "circle", "r": args.circle}
        else:
            surface = {"kind": "torus", "R": args.torus}
        params = {"lambda": args.lam}
        ladder = args.eps
    elif cmd == "tube":
        params = {"eps": list(args.eps)}
    elif cmd == "clifford":
        surface = {"kind": "clifford"}
        params = {"pole": list(args.pole)}
    elif cmd == "verify":
        params = {"criteria": args.criteria}
    rc = RunConfig(cmd, surface, params, ladder, quad, renorm, fmt, threads, args.out)
    validate(rc)
    return rc


def validate(rc: RunConfig) -> None:
    """Reject inputs outside each operation's domain before any work starts."""
    s, p = rc.surface, rc.params
    if rc.format == "csv" and rc.command not in ("potential", "sweep", "tube"):
        raise UsageError(f"{rc.command} only emits json")
    if s.get("kind") == "torus" and not s["R"] > 1.0:
        raise UsageError(f"torus needs R > 1, got {s['R']}")
    if s.get("kind") in ("sphere", "disk", "circle") and not s["r"] > 0:
        raise UsageError("radius must be positive")
    if rc.command == "sweep":
        if not 1.0 < p["from"] < p["to"]:
            raise UsageError("sweep needs 1 < from < to")
    if rc.command == "minimize" and len(p["bracket"]) != 2:
        raise UsageError("--bracket takes two values")
    if rc.command == "fit":
        kind = s["kind"]
        if kind == "circle" and p["lambda"] != -2:
            raise UsageError("the circle expansion is defined for lambda = -2")
        if kind in ("disk", "torus") and p["lambda"] != -4:
            raise UsageError(f"the {kind} expansion is defined for lambda = -4")
        if rc.ladder is not None and (len(rc.ladder) < 3 or min(rc.ladder) <= 0):
            raise UsageError("--eps needs at least three positive values")
    if rc.command == "tube" and any(not 0 < e < 1 for e in p["eps"]):
        raise UsageError("tube radii must lie in (0, 1)")
    if rc.command == "clifford" and len(p["pole"]) != 4:
        raise UsageError("--pole takes four values")
    if rc.command == "verify" and p["criteria"] is not None:
        from .acceptance import CRITERIA

        bad = [c for c in p["criteria"] if c not in CRITERIA]
        if bad:
            raise UsageError(f"unknown criteria {bad}")
    try:
        rc.renorm_config()
    except (DomainError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


# -- commands ----------------------------------------------------------------------


def _energy_entry(rc: RunConfig, method: str) -> dict:
    s = rc.surface
    if s["kind"] == "torus":
        if method == "closed":
            return {"method": "closed-form", "value": cf.torus_energy_closed(s["R"]), "err_est": 0.0}
        rep = surface_energy(RevolutionTorus(s["R"]), rc.renorm_config())
    else:
        if method == "closed":
            # the round sphere is the zero of the energy
            return {"method": "closed-form", "value": 0.0, "err_est": 0.0}
        rep = surface_energy(Sphere(s["r"]), rc.renorm_config())
    return {"method": rep.method, "value": rep.value, "err_est": rep.err_est,
            "outer_nodes": rep.extra["outer_nodes"]}


def cmd_energy(rc: RunConfig) -> str:
    base = {"surface": rc.surface["kind"]}
    base.update({k: v for k, v in rc.surface.items() if k != "kind"})
    method = rc.params["method"]
    if method == "both":
        closed, numeric = _energy_entry(rc, "closed"), _energy_entry(rc, "numeric")
        base.update({"method": "both", "closed": closed, "numeric": numeric,
                     "difference": numeric["value"] - closed["value"]})
    else:
        base.update(_energy_entry(rc, method))
    base["config"] = rc.to_dict()
    return dumps(base)


def cmd_potential(rc: RunConfig) -> str:
    R = rc.surface["R"]
    T = RevolutionTorus(R)
    cfg = rc.renorm_config()
    rows = []
    for a in rc.params["alpha"]:
        closed = float(cf.torus_potential_closed(R, a))
        if rc.params["numeric"]:
            num = surface_potential(T, a, 0.0, cfg).value
            rows.append((a, closed, num, abs(num - closed)))
        else:
            rows.append((a, closed, math.nan, math.nan))
    if rc.format == "csv":
        return csv_text(("alpha", "closed", "numeric", "abs_diff"), rows)
    return dumps({"R": R, "rows": [dict(zip(("alpha", "closed", "numeric", "abs_diff"), r)) for r in rows],
                  "config": rc.to_dict()})


def cmd_sweep(rc: RunConfig) -> str:
    p = rc.params
    grid = np.linspace(p["from"], p["to"], p["steps"])
    curve = cf.energy_curve(grid)
    rows = [list(r) for r in curve.rows()]
    header = ["R", "E", "dE_dR"]
    if p["numeric"]:
        cfg = rc.renorm_config()
        header.append("E_numeric")
        for row in rows:
            row.append(surface_energy(RevolutionTorus(row[0]), cfg).value)
    if rc.format == "csv":
        return csv_text(header, rows)
    return dumps({"rows": [dict(zip(header, r)) for r in rows], "argmin": curve.argmin(), "config": rc.to_dict()})


def cmd_minimize(rc: RunConfig) -> str:
    R_star, E_star = cf.minimize_torus_energy(tuple(rc.params["bracket"]))
    return dumps({"Rstar": R_star, "Estar": E_star, "config": rc.to_dict()})


def cmd_fit(rc: RunConfig) -> str:
    s = rc.surface
    M = {"disk": lambda: PlanarDisk(s["r"]), "circle": lambda: Circle(s["r"]),
         "torus": lambda: RevolutionTorus(s["R"])}[s["kind"]]()
    chk = expansion_check(M, rc.params["lambda"], cfg=rc.renorm_config(), ladder=rc.ladder)
    out = chk.to_dict()
    out["surface"] = dict(s)
    out["config"] = rc.to_dict()
    return dumps(out)


def cmd_tube(rc: RunConfig) -> str:
    rows = tube_residual_ladder(rc.params["eps"])
    if rc.format == "csv":
        return csv_text(("eps", "energy", "series_residual"), rows)
    return dumps({"rows": [dict(zip(("eps", "energy", "series_residual"), r)) for r in rows],
                  "linear_coefficient": tube_linear_coefficient(),
                  "cubic_coefficient": tube_cubic_coefficient(),
                  "config": rc.to_dict()})


def cmd_clifford(rc: RunConfig) -> str:
    from .moebius import clifford_image

    rep = clifford_image(pole=rc.params["pole"])
    out = rep.to_dict()
    out["config"] = rc.to_dict()
    return dumps(out)


def cmd_verify(rc: RunConfig) -> str:
    from .acceptance import acceptance_report, run_acceptance

    def progress(res):
        print(res.line(), file=sys.stderr, flush=True)

    results = run_acceptance(rc.params["criteria"], workers=rc.threads, progress=progress)
    report = acceptance_report(results)
    report["config"] = rc.to_dict()
    return dumps(report)


COMMANDS = {
    "energy": cmd_energy, "potential": cmd_potential, "sweep": cmd_sweep, "minimize": cmd_minimize,
    "fit": cmd_fit, "tube": cmd_tube, "clifford": cmd_clifford, "verify": cmd_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        rc = run_config_from_args(args)
        text = COMMANDS[rc.command](rc)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonConvergence, ToleranceNotMet, IllConditionedFit) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RenormError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if rc.out:
        with open(rc.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if rc.command == "verify" and not loads(text)["passed"]:
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
