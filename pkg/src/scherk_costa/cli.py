"""Command-line front end: ``scherk-costa <command> ...``.

Exit status is 0 on success, 1 when a solve or a verification fails and 2 on
usage errors (bad flags, unreadable files, parameters out of range).

Angles are in radians.  The solver's guaranteed region is
sin(rho) in [-0.01, 0) with lambda >= 1 and lambda r < r0(rho); other values
run best effort and are flagged in the output.

Tolerance defaults can be overridden through the environment:
SCHERK_COSTA_REL_TOL and SCHERK_COSTA_ABS_TOL (quadrature),
SCHERK_COSTA_EPS_END and SCHERK_COSTA_GRID (mesh excision radius and
"radial x angular" grid, e.g. ``48x96``).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .param_algebra import CubicError, GeometricParams, r0, solve_end_cubic
from .quadrature import QuadratureConfig
from .solver import SolvedSurface, SolverConfig, SolverError, solve_periods, sweep
from .surface_mesh import (
    CostaError,
    FamilyError,
    MeshConfig,
    MeshError,
    costa,
    family_member,
    gauss_region_check,
    immerse,
    period_gap_vector,
    replicate,
    write_mesh,
)
from .verify import SUITES, run_suites

log = logging.getLogger("scherk_costa")

REGION = "supported region: sin(rho) in [-0.01, 0), lambda >= 1, lambda*r < r0(rho) ~ 0.38"


class UsageError(Exception):
    """Invalid parameters or paths; maps to exit status 2."""


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _rho_from(args) -> float:
    if getattr(args, "sin_rho", None) is not None:
        s = args.sin_rho
        if not -1.0 < s < 1.0:
            raise UsageError(f"--sin-rho must lie in (-1, 1), got {s}; {REGION}")
        return math.asin(s)
    rho = args.rho
    if not -math.pi / 2 < rho < math.pi / 2:
        raise UsageError(f"--rho must lie in (-pi/2, pi/2) radians, got {rho}; {REGION}")
    return rho


def _quad_cfg() -> QuadratureConfig:
    try:
        return QuadratureConfig.from_env()
    except ValueError as exc:
        raise UsageError(f"bad tolerance override: {exc}") from exc


def _mesh_cfg(args) -> MeshConfig:
    n_r, n_a = args.n_radial, args.n_angular
    eps = args.eps_end
    grid = os.environ.get("SCHERK_COSTA_GRID")
    if grid and n_r is None and n_a is None:
        try:
            n_r, n_a = (int(x) for x in grid.lower().split("x"))
        except ValueError as exc:
            raise UsageError(f"SCHERK_COSTA_GRID must look like 64x64, got {grid!r}") from exc
    if eps is None and os.environ.get("SCHERK_COSTA_EPS_END"):
        eps = float(os.environ["SCHERK_COSTA_EPS_END"])
    kw = {}
    if n_r is not None:
        kw["n_radial"] = n_r
    if n_a is not None:
        kw["n_angular"] = n_a
    if eps is not None:
        kw["eps_end"] = eps
    try:
        return MeshConfig(refine=args.refine, **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _load_or_solve(args, rho: float) -> SolvedSurface:
    cfg = SolverConfig(quad=_quad_cfg())
    path = getattr(args, "solved_file", None)
    if path:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read solution file {path}: {exc}") from exc
        if not math.isclose(float(doc["rho"]), rho, rel_tol=1e-12, abs_tol=1e-15):
            raise UsageError(f"solution file is for rho={doc['rho']}, not {rho}")
        return SolvedSurface.from_dict(doc, cfg)
    return solve_periods(rho, cfg)


# --- commands ----------------------------------------------------------------------------


def cmd_solve(args) -> int:
    rho = _rho_from(args)
    lam_bracket = tuple(args.lambda_bracket) if args.lambda_bracket else None
    cap_bracket = tuple(args.cap_r_bracket) if args.cap_r_bracket else None
    sol = solve_periods(rho, SolverConfig(quad=_quad_cfg()), lam_bracket, cap_bracket)
    _emit(sol.to_json() + "\n", args.out)
    ok = sol.residual < args.max_residual
    if not ok:
        log.error("residual %.3e exceeds %.1e", sol.residual, args.max_residual)
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    rho = _rho_from(args)
    if not 0 < args.r_min < args.r_max:
        raise UsageError(f"need 0 < --r-min < --r-max, got {args.r_min}, {args.r_max}")
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    if any(lam <= 0 for lam in args.lambdas):
        raise UsageError("lambda values must be positive")
    r_grid = np.linspace(args.r_min, args.r_max, args.steps)
    table = sweep(rho, args.lambdas, r_grid, _quad_cfg(), threads=args.threads)
    _emit(table.to_csv(), args.out)
    return 0


def _write(mesh, out: str) -> None:
    try:
        paths = write_mesh(mesh, out, args_format(out))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot write {out}: {exc}") from exc
    log.info("wrote %s and %s", *paths)


def args_format(out: str) -> str:
    fmt = Path(out).suffix.lstrip(".").lower()
    if fmt not in ("obj", "ply"):
        raise UsageError(f"--out must end in .obj or .ply, got {out}")
    return fmt


def cmd_mesh(args) -> int:
    rho = _rho_from(args)
    args_format(args.out)
    cfg = _mesh_cfg(args)
    sol = _load_or_solve(args, rho)
    mesh = immerse(sol.params, sol.end, sol.c, cfg)
    mesh.metadata["c_star"] = sol.c_star
    mesh.metadata["solver_residual"] = sol.residual
    if args.copies:
        mesh = replicate(mesh, args.copies)
    _write(mesh, args.out)
    return 0


def cmd_costa(args) -> int:
    args_format(args.out)
    if args.mu is not None and not args.mu > 0:
        raise UsageError("--mu must be positive")
    mesh = costa(args.mu, _mesh_cfg(args), _quad_cfg())
    _write(mesh, args.out)
    return 0


def cmd_family(args) -> int:
    rho = _rho_from(args)
    args_format(args.out)
    if not 0.0 <= args.s < 1.0:
        raise UsageError(f"--s must lie in [0, 1), got {args.s}")
    if not args.mu > 0:
        raise UsageError("--mu must be positive")
    sol = _load_or_solve(args, rho)
    member = family_member(sol, args.mu, args.s, _quad_cfg())
    mesh = immerse(member.params, member.end, member.c, _mesh_cfg(args))
    mesh.metadata["family"] = member.to_dict()
    if args.kappa is not None:
        report = gauss_region_check(member, args.kappa)
        mesh.metadata["gauss_region"] = report.to_dict()
        sys.stdout.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    _write(mesh, args.out)
    return 0


def cmd_verify(args) -> int:
    names = SUITES if args.suite == "all" else (args.suite,)
    report = run_suites(names, threads=args.threads)
    sys.stdout.write(report.to_table() + "\n")
    if args.json:
        _emit(report.to_json() + "\n", args.json)
    return 0 if report.passed else 1


def cmd_period_gap(args) -> int:
    rho = _rho_from(args)
    if not args.lam > 0 or not args.r >= 0 or not args.c > 0:
        raise UsageError("need --lambda > 0, --r >= 0 and --c > 0")
    params = GeometricParams(rho, args.lam, args.r)
    end = solve_end_cubic(params)
    vec = period_gap_vector(params, end, args.c, delta=args.delta, qcfg=_quad_cfg())
    doc = {
        "rho": rho, "lambda": args.lam, "r": args.r, "c": args.c, "delta": args.delta,
        "gap_vector": [float(vec[0]), float(vec[1])], "gap": float(np.hypot(vec[0], vec[1])),
        "in_supported_region": params.in_supported_region(),
    }
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


# --- parser ------------------------------------------------------------------------------


def _add_rho(p: argparse.ArgumentParser, default: float | None = None) -> None:
    g = p.add_mutually_exclusive_group(required=default is None)
    g.add_argument("--rho", type=float, default=default, help=f"torus angle rho in radians; {REGION}")
    g.add_argument("--sin-rho", type=float, help="give sin(rho) instead of rho")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-radial", type=int, help="radial nodes per chart (default 64)")
    p.add_argument("--n-angular", type=int, help="angular nodes per half disk (default 64)")
    p.add_argument("--refine", type=int, default=0, help="halve the grid step this many times")
    p.add_argument("--eps-end", type=float, help="end excision radius in z (default 1e-3)")


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the command name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads for sweeps and verification (default 1)")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS, help="log progress to stderr")
    p = argparse.ArgumentParser(
        prog="scherk-costa", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter, parents=[common]
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    s = add("solve", help="close the periods for one rho; prints a JSON solution document")
    _add_rho(s)
    s.add_argument("--lambda-bracket", type=_floats, help="lo,hi bracket for lambda (best-effort solves)")
    s.add_argument("--cap-r-bracket", type=_floats, help="lo,hi bracket for lambda*r")
    s.add_argument("--max-residual", type=float, default=1e-8, help="largest accepted relative spread of c1, c2, c3, c3~")
    s.add_argument("--out", help="write the solution document here (reusable via --solved-file)")
    s.set_defaults(func=cmd_solve)

    s = add("sweep", help="CSV of c1, c2, c3, c3~ and envelopes over a (lambda, r) grid")
    _add_rho(s)
    s.add_argument("--lambda", dest="lambdas", type=_floats, required=True, help="comma-separated lambda values (> 0)")
    s.add_argument("--r-min", type=float, required=True, help="smallest r (> 0)")
    s.add_argument("--r-max", type=float, required=True, help="largest r")
    s.add_argument("--steps", type=int, default=100, help="number of r samples")
    s.add_argument("--out", help="CSV path (stdout when omitted)")
    s.set_defaults(func=cmd_sweep)

    s = add("mesh", help="triangulated fundamental piece (optionally replicated)")
    _add_rho(s)
    s.add_argument("--solved-file", help="solution document from 'solve --out'")
    s.add_argument("--copies", type=int, default=0, help="translated copies on each side (0 = single piece)")
    s.add_argument("--out", required=True, help=".obj or .ply path; a .json sidecar is written next to it")
    _add_grid(s)
    s.set_defaults(func=cmd_mesh)

    s = add("costa", help="Costa surface, or the open half piece for mu != mu0")
    s.add_argument("--mu", type=float, help="Gauss map factor (> 0); solved for closure when omitted")
    s.add_argument("--out", required=True, help=".obj or .ply path")
    _add_grid(s)
    s.set_defaults(func=cmd_costa)

    s = add("family", help="member s of the deformation towards half-Costa")
    _add_rho(s, default=-0.005)
    s.add_argument("--s", type=float, required=True, help="family parameter in [0, 1)")
    s.add_argument("--mu", type=float, required=True, help="limit Costa factor (> 0)")
    s.add_argument("--kappa", type=float, help="also sample |g| against the near/far region bounds")
    s.add_argument("--solved-file", help="solution document from 'solve --out'")
    s.add_argument("--out", required=True, help=".obj or .ply path")
    _add_grid(s)
    s.set_defaults(func=cmd_family)

    s = add("verify", help="numerical bound checks; exit 1 if any check fails")
    s.add_argument("--suite", choices=SUITES + ("all",), default="all")
    s.add_argument("--json", help="also write the machine-readable report here")
    s.set_defaults(func=cmd_verify)

    s = add("period-gap", help="horizontal closing gap of the boundary cycle at given parameters")
    _add_rho(s)
    s.add_argument("--lambda", dest="lam", type=float, required=True, help="middle end position (> 0)")
    s.add_argument("--r", type=float, required=True, help="end parameter r (>= 0)")
    s.add_argument("--c", type=float, required=True, help="Lopez-Ros factor c (> 0), not c^2")
    s.add_argument("--delta", type=float, default=1e-3, help="indentation radius around the middle end")
    s.set_defaults(func=cmd_period_gap)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    # parents share action objects, so these defaults cannot live on the parser
    args.threads = getattr(args, "threads", 1)
    args.verbose = getattr(args, "verbose", False)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        sys.stderr.write("--threads must be at least 1\n")
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except (SolverError, CubicError, MeshError, CostaError, FamilyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
