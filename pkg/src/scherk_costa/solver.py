"""Period-closing solver and parameter sweeps.

For fixed rho the solver first traces the balance curve c1 = c3~ (one value of
the scaled variable cap_r = lam * r per lam), then marches lam geometrically until
c1 - c2 changes sign along that curve and bisects in lam.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .param_algebra import (
    CubicError,
    EndConfiguration,
    GeometricParams,
    r0,
    solve_end_cubic,
)
from .periods import (
    c1_inverse,
    c3_tilde_from,
    closure_mismatch,
    cycle_integral_scale,
    f,
    i1_integral,
    i2_integral,
    j1_integral,
    j2_integral,
    middle_term,
    period_diagnostics,
)
from .quadrature import QuadratureConfig

# end bounds used by the c1 and c3~ envelopes
A_MIN = 0.8464
A_MAX = 1.03
B_MIN = -0.0764

CSV_HEADER = [
    "lambda", "r", "cap_r", "c1", "c2", "c3", "c3_tilde",
    "c1_lo", "c1_hi", "c3t_lo", "c3t_hi", "flags",
]


class SolverError(RuntimeError):
    """A bracket required by the solve strategy was not found."""

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


@dataclass(frozen=True)
class SolverConfig:
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    lam_start: float = 1.0
    lam_max: float = 1e4
    cap_r_min: float = 1e-4
    cap_r_margin: float = 1e-6
    scan_points: int = 12
    cap_r_rel_tol: float = 1e-14
    lam_rel_tol: float = 1e-14
    max_bisections: int = 200


DEFAULT_SOLVER = SolverConfig()


def in_guaranteed_range(rho: float) -> bool:
    return -0.01 < rho < 0.0


# --- balance curve c1 = c3~ ------------------------------------------------------


@dataclass(frozen=True)
class BalancePoint:
    lam: float
    cap_r: float
    c1: float
    c3_tilde: float
    flags: tuple[str, ...] = ()

    @property
    def r(self) -> float:
        return self.cap_r / self.lam


def _balance_gap(rho: float, lam: float, cap_r: float, cfg: QuadratureConfig) -> tuple[float, float, float]:
    """(1/c1 - 1/c3~, c1, c3~); the reciprocals stay finite where c3~ has a pole."""
    params = GeometricParams.from_cap_r(rho, lam, cap_r)
    end = solve_end_cubic(params)
    j1 = j1_integral(params, end, cfg).value
    j2 = j2_integral(params, end, cfg).value
    inv1 = c1_inverse(params, end)
    r, a = params.r, end.a
    inv3 = r * (2.0 * a * j2 - math.pi * r) / (math.pi - 2.0 * a * j1 * r)
    v1 = math.inf if inv1 == 0 else 1.0 / inv1
    return inv1 - inv3, v1, c3_tilde_from(params, end, j1, j2)


def _bisect(fun, lo: float, hi: float, f_lo: float, rel_tol: float, max_iter: int, geometric: bool = False):
    """Plain bisection on a sign change; returns (root, f at root)."""
    f_mid = f_lo
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi) if geometric else 0.5 * (lo + hi)
        if not lo < mid < hi or hi - lo <= rel_tol * abs(mid):
            break
        f_mid = fun(mid)
        if f_mid == 0:
            return mid, f_mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    root = math.sqrt(lo * hi) if geometric else 0.5 * (lo + hi)
    return root, fun(root)


def trace_balance_curve(
    rho: float,
    lam: float,
    cfg: SolverConfig = DEFAULT_SOLVER,
    cap_r_bracket: tuple[float, float] | None = None,
) -> BalancePoint:
    """cap_r in the bracket where c1 = c3~ at this lam.

    The default bracket is (1e-4, r0 - 1e-6).  A coarse scan locates every sign
    change of 1/c1 - 1/c3~; the smallest-cap_r crossing is refined by bisection
    and a ``multiple_crossings`` flag is set if there are others.
    """
    lo, hi = cap_r_bracket or (cfg.cap_r_min, r0(rho) - cfg.cap_r_margin)
    grid = np.linspace(lo, hi, cfg.scan_points)
    gaps = [_balance_gap(rho, lam, x, cfg.quad)[0] for x in grid]
    changes = [i for i in range(len(grid) - 1) if np.sign(gaps[i]) != np.sign(gaps[i + 1])]
    if not changes:
        raise SolverError(
            f"no c1 = c3~ crossing for rho={rho}, lambda={lam} in cap_r bracket ({lo}, {hi})",
            {"cap_r": grid.tolist(), "gap": gaps},
        )
    i = changes[0]
    root, _ = _bisect(
        lambda x: _balance_gap(rho, lam, x, cfg.quad)[0],
        grid[i], grid[i + 1], gaps[i], cfg.cap_r_rel_tol, cfg.max_bisections,
    )
    _, v1, v3t = _balance_gap(rho, lam, root, cfg.quad)
    flags = ("multiple_crossings",) if len(changes) > 1 else ()
    return BalancePoint(lam, root, v1, v3t, flags)


def _c1_minus_c2(rho: float, lam: float, cfg: SolverConfig, cap_r_bracket) -> tuple[float, BalancePoint]:
    bp = trace_balance_curve(rho, lam, cfg, cap_r_bracket)
    params = GeometricParams.from_cap_r(rho, lam, bp.cap_r)
    end = solve_end_cubic(params)
    i1 = i1_integral(params, end, cfg.quad).value
    i2 = i2_integral(params, end, cfg.quad).value
    # compare reciprocals: 1/c1 - I2/I1, finite where c2 has a pole
    return c1_inverse(params, end) - i2 / i1, bp


# --- solved surface ------------------------------------------------------------------


@dataclass(frozen=True)
class SolvedSurface:
    params: GeometricParams
    c_star: float
    end: EndConfiguration
    c1: float
    c2: float
    c3: float
    c3_tilde: float
    certificates: dict
    crossings: tuple[float, ...] = ()
    flags: tuple[str, ...] = ()

    @property
    def c(self) -> float:
        """The Lopez-Ros factor itself, sqrt(c^2)."""
        return math.sqrt(self.c_star)

    @property
    def residual(self) -> float:
        return self.certificates["residual"]

    def to_dict(self) -> dict:
        p = self.params
        return {
            "rho": p.rho,
            "lambda": p.lam,
            "r": p.r,
            "cap_r": p.cap_r,
            "c_star": self.c_star,
            "c": self.c,
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "c3_tilde": self.c3_tilde,
            "end": {"a": self.end.a, "b": self.end.b, "y": self.end.y, "delta": self.end.delta},
            "certificates": self.certificates,
            "crossings": list(self.crossings),
            "flags": list(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict, cfg: SolverConfig = DEFAULT_SOLVER) -> "SolvedSurface":
        """Rebuild from a solution document; derived quantities are recomputed."""
        params = GeometricParams(float(doc["rho"]), float(doc["lambda"]), float(doc["r"]))
        return certify(params, cfg, crossings=tuple(doc.get("crossings", ())), flags=tuple(doc.get("flags", ())))


def certify(
    params: GeometricParams,
    cfg: SolverConfig = DEFAULT_SOLVER,
    crossings: tuple[float, ...] = (),
    flags: tuple[str, ...] = (),
) -> SolvedSurface:
    """Evaluate all balance values at a candidate solution and its certificates."""
    end = solve_end_cubic(params)
    d = period_diagnostics(params, end, cfg.quad, check_pv=True)
    c_star = d.c1
    values = [d.c1, d.c2, d.c3, d.c3_tilde]
    residual = max(abs(x - y) for x in values for y in values) / abs(c_star)
    scale = cycle_integral_scale(params, end, cfg.quad)
    cert = {
        "residual": residual,
        "lemma91": params.r**2 * c_star,
        "lemma91_ok": bool(0.0 < params.r**2 * c_star < 1.0),
        "cap_r_in_range": bool(0.0 < params.cap_r < r0(params.rho)),
        "lambda_gt_1": bool(params.lam > 1.0),
        "r_sqrt_c": params.r * math.sqrt(c_star) if c_star > 0 else math.nan,
        "closure_mismatch_rel": abs(d.closure_mismatch) / scale,
        "residue_gap_rel": abs(d.residue_middle[1] - d.residue_side[1]) / d.residue_side[1],
        "quad_error": d.quad_error,
    }
    return SolvedSurface(
        params, c_star, end, d.c1, d.c2, d.c3, d.c3_tilde, cert, crossings,
        tuple(flags) + tuple(d.flags),
    )


def solve_periods(
    rho: float,
    cfg: SolverConfig = DEFAULT_SOLVER,
    lam_bracket: tuple[float, float] | None = None,
    cap_r_bracket: tuple[float, float] | None = None,
) -> SolvedSurface:
    """(lam*, r*) with c1 = c2 = c3~ for the given rho.

    Without ``lam_bracket`` lam marches through 2^k from ``cfg.lam_start`` up to
    ``cfg.lam_max``.  Outside rho in (-0.01, 0) the call is best effort: the
    result carries a ``best_effort`` flag and bracket failures raise
    :class:`SolverError` with the scan attached.
    """
    flags: list[str] = []
    if not in_guaranteed_range(rho):
        flags.append("best_effort")

    def h(lam: float) -> float:
        return _c1_minus_c2(rho, lam, cfg, cap_r_bracket)[0]

    if lam_bracket is None:
        lams = [cfg.lam_start]
        while lams[-1] * 2.0 <= cfg.lam_max:
            lams.append(lams[-1] * 2.0)
    else:
        lams = list(lam_bracket)
    scan: list[float] = []
    crossings: list[float] = []
    for lam in lams:
        try:
            scan.append(h(lam))
        except (SolverError, CubicError) as exc:
            raise SolverError(f"balance curve failed at lambda={lam}: {exc}", {"lambda": lams[: len(scan)], "gap": scan}) from exc
        k = len(scan) - 1
        if k > 0 and np.sign(scan[k]) != np.sign(scan[k - 1]):
            crossings.append(lams[k - 1])
            if lam_bracket is None:
                break
    if not crossings:
        raise SolverError(
            f"c1 - c2 keeps one sign along the balance curve up to lambda={lams[-1]}",
            {"lambda": lams[: len(scan)], "gap": scan},
        )
    k = lams.index(crossings[0])
    lam_star, _ = _bisect(h, lams[k], lams[k + 1], scan[k], cfg.lam_rel_tol, cfg.max_bisections, geometric=True)
    bp = trace_balance_curve(rho, lam_star, cfg, cap_r_bracket)
    flags.extend(bp.flags)
    params = GeometricParams.from_cap_r(rho, lam_star, bp.cap_r)
    return certify(params, cfg, crossings=tuple(crossings), flags=tuple(flags))


# --- sweeps ----------------------------------------------------------------------


def envelope_c1(params: GeometricParams) -> tuple[float, float]:
    """Lower and upper envelopes of c1 from the end bounds (inf when the bound is nonpositive)."""
    r, lam = params.r, params.lam
    fl = float(f(lam, params.rho))
    inv_lo = 2.0 * A_MIN * fl / (lam * lam + A_MAX**2) - r
    inv_hi = 2.0 * A_MAX * fl / ((lam + B_MIN) ** 2 + A_MIN**2) - r
    c_lo = 1.0 / (r * inv_hi) if inv_hi > 0 else math.inf
    c_hi = 1.0 / (r * inv_lo) if inv_lo > 0 else math.inf
    return c_lo, c_hi


def j1_bounds(lam: float) -> tuple[float, float]:
    return 0.7669 + 1.6981 * lam, 0.9963 + 2.4499 * lam


def j2_bounds(lam: float) -> tuple[float, float]:
    sl = math.sqrt(lam)
    common = 1.0 - sl * math.atan(1.0 / sl)
    lo = -0.2 + (0.6002 * lam + 1.88) * common + (0.74 / lam + 2.0) / sl * math.atan(sl) - 0.74 / lam
    hi = -0.46 + (1.38 * lam + 3.08) * common + 2.006 / sl * math.atan(sl)
    return lo, hi


def envelope_c3_tilde(params: GeometricParams) -> tuple[float, float]:
    """Envelopes of c3~ from the end bounds and the J1, J2 bounds."""
    r, lam = params.r, params.lam
    j1lo, j1hi = j1_bounds(lam)
    j2lo, j2hi = j2_bounds(lam)
    inv_lo = (2.0 * A_MIN * j2lo - math.pi * r) / (math.pi - 2.0 * A_MIN * j1lo * r)
    inv_hi = (2.0 * A_MAX * j2hi - math.pi * r) / (math.pi - 2.0 * A_MAX * j1hi * r)
    c_lo = 1.0 / (r * inv_hi) if inv_hi > 0 else math.inf
    c_hi = 1.0 / (r * inv_lo) if inv_lo > 0 else math.inf
    return c_lo, c_hi


@dataclass
class SweepTable:
    rho: float
    lambdas: list[float]
    r_grid: list[float]
    rows: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in self.rows:
            w.writerow([
                *(repr(float(row[k])) for k in CSV_HEADER[:-1]),
                ";".join(row["flags"]),
            ])
        return buf.getvalue()

    def slice(self, lam: float) -> list[dict]:
        return [row for row in self.rows if row["lambda"] == lam]


def _sweep_row(rho: float, lam: float, r: float, cfg: QuadratureConfig) -> dict:
    params = GeometricParams(rho, lam, r)
    flags: list[str] = []
    try:
        end = solve_end_cubic(params)
    except CubicError:
        nan = math.nan
        return dict(zip(CSV_HEADER, [lam, r, lam * r, nan, nan, nan, nan, nan, nan, nan, nan, ["cubic_failure"]]))
    d = period_diagnostics(params, end, cfg, check_pv=False)
    flags.extend(d.flags)
    c1_lo, c1_hi = envelope_c1(params)
    c3_lo, c3_hi = envelope_c3_tilde(params)
    if not params.in_supported_region():
        flags.append("outside_supported_region")
    # pole markers: denominators of c2, c3 and c3~
    if abs(d.I2) < 1e-12:
        flags.append("c2_pole")
    if abs(middle_term(params, end) - d.J2) < 1e-12:
        flags.append("c3_pole")
    if abs(2.0 * end.a * d.J2 - math.pi * r) < 1e-12:
        flags.append("c3_tilde_pole")
    return {
        "lambda": lam, "r": r, "cap_r": params.cap_r,
        "c1": d.c1, "c2": d.c2, "c3": d.c3, "c3_tilde": d.c3_tilde,
        "c1_lo": c1_lo, "c1_hi": c1_hi, "c3t_lo": c3_lo, "c3t_hi": c3_hi,
        "flags": sorted(set(flags)),
    }


def _mark_sign_changes(rows: list[dict]) -> None:
    """Flag rows where c1 - c2, c1 - c3~ or a denominator changes sign against the previous row."""
    for prev, row in zip(rows, rows[1:]):
        if prev["lambda"] != row["lambda"]:
            continue
        for name, key in (("c1_c2_cross", "c2"), ("c1_c3t_cross", "c3_tilde"), ("c1_c3_cross", "c3")):
            a0, a1 = prev["c1"] - prev[key], row["c1"] - row[key]
            if np.isfinite(a0) and np.isfinite(a1) and np.sign(a0) != np.sign(a1):
                # a sign flip through a pole shows up as a reciprocal sign flip too
                inv0, inv1 = 1.0 / prev[key], 1.0 / row[key]
                tag = "pole" if np.sign(inv0) != np.sign(inv1) else name
                row["flags"] = sorted(set(row["flags"]) | {tag if tag != "pole" else f"{key}_pole"})


def sweep(
    rho: float,
    lambdas,
    r_grid,
    cfg: QuadratureConfig | None = None,
    threads: int = 1,
) -> SweepTable:
    """Evaluate c1, c2, c3, c3~ and the c1, c3~ envelopes on a (lambda, r) grid."""
    cfg = cfg or QuadratureConfig()
    lambdas = sorted(float(x) for x in lambdas)
    r_grid = sorted(float(x) for x in r_grid)
    table = SweepTable(rho, lambdas, r_grid)
    jobs = [(lam, r) for lam in lambdas for r in r_grid]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda job: _sweep_row(rho, job[0], job[1], cfg), jobs))
    else:
        rows = [_sweep_row(rho, lam, r, cfg) for lam, r in jobs]
    _mark_sign_changes(rows)
    table.rows = rows
    return table


def triple_spread(c1: float, c2: float, c3: float) -> float:
    """Largest pairwise relative gap among three balance values."""
    vals = (c1, c2, c3)
    if not all(np.isfinite(vals)):
        return math.inf
    return max(abs(x - y) for x in vals for y in vals) / max(abs(c1), 1e-300)


def closest_triple_point(table: SweepTable, lam: float) -> dict:
    """Row of one lambda slice where c1, c2, c3 come closest together."""
    rows = table.slice(lam)
    if not rows:
        raise ValueError(f"no rows at lambda={lam}")
    best = min(rows, key=lambda row: triple_spread(row["c1"], row["c2"], row["c3"]))
    return {**best, "spread": triple_spread(best["c1"], best["c2"], best["c3"])}
