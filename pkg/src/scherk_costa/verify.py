"""Numerical checks of the bounds behind the period solution.

Every check compares a computed value with a claimed bound and records the
quadrature (or rounding) error of the computation.  A check passes only when
its margin exceeds three times that error, so a bound is never confirmed by
noise.  Checks at points outside the supported parameter region are reported
but carry no verdict.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from .param_algebra import GeometricParams, r0, solve_end_cubic
from .periods import (
    c1_inverse,
    f,
    i1_integral,
    i2_integral,
    j1_integral,
    j2_integral,
)
from .quadrature import QuadratureConfig, integrate_adaptive
from .solver import A_MAX, A_MIN, B_MIN, j1_bounds, j2_bounds

ROUNDING = 1e-14
SAFETY = 3.0
SUITES = ("lemma83", "bounds", "asymptotics")


@dataclass(frozen=True)
class Check:
    """One bound: ``value <relation> bound`` with its error budget.

    ``passed`` is None for informational entries (outside the supported region).
    """

    name: str
    relation: str
    bound: float
    value: float
    quad_error: float
    margin: float
    passed: bool | None
    note: str = ""

    def row(self) -> str:
        verdict = {True: "PASS", False: "FAIL", None: "info"}[self.passed]
        return (
            f"{verdict:4s}  {self.name:44s} {self.value:+.10g} {self.relation} {self.bound:+.10g}"
            f"  margin={self.margin:.3e} err={self.quad_error:.1e}"
            + (f"  [{self.note}]" if self.note else "")
        )


def make_check(
    name: str, value: float, relation: str, bound: float, error: float, note: str = "", assert_: bool = True
) -> Check:
    """Build a check for ``value > bound``, ``value < bound`` or ``value >= bound`` (a limit)."""
    value, bound, error = float(value), float(bound), float(abs(error))
    if relation in (">", ">="):
        margin = value - bound
    elif relation in ("<", "<="):
        margin = bound - value
    else:
        raise ValueError(f"unknown relation {relation!r}")
    if not assert_:
        passed = None
    elif not math.isfinite(margin):
        passed = False
    elif relation in (">=", "<="):
        # limits of strict inequalities at the ends of an open interval
        passed = margin >= -SAFETY * error
    else:
        passed = margin > SAFETY * error
    return Check(name, relation, bound, value, error, margin, passed, note)


@dataclass
class VerificationReport:
    """Ordered checks of one or more suites; ``elapsed`` is kept out of the serialised forms."""

    suite: str
    checks: list[Check] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.passed is not None)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.passed is False]

    def extend(self, checks: Iterable[Check]) -> None:
        self.checks.extend(checks)

    def __add__(self, other: "VerificationReport") -> "VerificationReport":
        return VerificationReport(
            f"{self.suite}+{other.suite}", self.checks + other.checks, self.elapsed + other.elapsed
        )

    def to_table(self) -> str:
        lines = [f"suite {self.suite}: {len(self.checks)} checks, {len(self.failures)} failed"]
        lines += [c.row() for c in self.checks]
        lines.append("OVERALL " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        def num(x):
            return x if math.isfinite(x) else str(x)

        return {
            "suite": self.suite,
            "passed": self.passed,
            "checks": [
                {k: (num(v) if isinstance(v, float) else v) for k, v in asdict(c).items()}
                for c in self.checks
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# --- fixed-constant inequalities on (0, 1) -------------------------------------------------


def _sq(x):
    return np.sqrt(x)


def _quad(fun: Callable, cfg: QuadratureConfig):
    res = integrate_adaptive(fun, 0.0, 1.0, cfg)
    return float(res.value), float(res.error_estimate)


def _integral_checks(cfg: QuadratureConfig) -> list[Check]:
    def j1_lower_const(t):
        t2, t4 = t * t, t**4
        return 2 * t2 / (_sq(t4 + 0.1 * t2 + 1) * (t4 + 0.15 * t2 + 1.06)) + _sq(t) / (
            _sq(t2 + 0.1 * t + 1) * (1 + 0.15 * t + 1.06 * t2)
        )

    def j1_lower_slope(t):
        t2, t4 = t * t, t**4
        return 2 / (_sq(t4 + 0.1 * t2 + 1) * (t4 + 0.15 * t2 + 1.06)) + t**1.5 / (
            _sq(t2 + 0.1 * t + 1) * (1 + 0.15 * t + 1.06 * t2)
        )

    def j1_upper_const(t):
        t2, t4 = t * t, t**4
        return 2 * t2 / (_sq(t4 + 1) * (t4 + 0.7164)) + _sq(t) / (_sq(t2 + 1) * (1 + 0.7164 * t2))

    def j1_upper_slope(t):
        t2, t4 = t * t, t**4
        return 2 / (_sq(t4 + 1) * (t4 + 0.7164)) + t**1.5 / (_sq(t2 + 1) * (1 + 0.7164 * t2))

    def i1_upper(t):
        t2, t4 = t * t, t**4
        return (
            1 / (_sq(t4 - 0.1 * t2 + 1) * ((t2 - 0.1) ** 2 + 0.7164)) - t2 / (_sq(t4 + 1) * (1 + 1.06 * t4))
        ) * (1 - t2)

    def i2_lower(t):
        t2, t4 = t * t, t**4
        return (-0.15 - t2 + 0.7222 * (1 + t2 + t4)) * _sq(t4 - 0.1 * t2 + 1) / ((1 + 1.06 * t4) * (t4 + 1.06))

    def i1_lower(t):
        t2, t4 = t * t, t**4
        first = (1 / (t4 + 1.06) + t4 / (1 + 1.06 * t4)) / _sq(t4 + 1)
        second = (t2 / ((t2 - 0.0764) ** 2 + 0.7164) + t2 / ((1 - 0.0764 * t2) ** 2 + 0.7164 * t4)) / _sq(
            t4 - 0.1 * t2 + 1
        )
        return first - second

    specs = [
        ("j1_lower_constant_integral", j1_lower_const, ">", 0.7669),
        ("j1_lower_slope_integral", j1_lower_slope, "<", 1.6981),
        ("j1_upper_constant_integral", j1_upper_const, ">", 0.9963),
        ("j1_upper_slope_integral", j1_upper_slope, "<", 2.4499),
        ("i1_upper_integral_at_lambda_1", i1_upper, "<", 0.764),
        ("i2_lower_integral_at_lambda_1", i2_lower, ">", 0.443),
        ("i1_lower_integral_at_lambda_1", i1_lower, ">", 0.3294),
    ]
    out = []
    for name, fun, rel, bound in specs:
        v, e = _quad(fun, cfg)
        out.append(make_check(name, v, rel, bound, e))
    return out


# (name, lhs, relation, rhs); the claim is strict on the open interval (0, 1)
POINTWISE = [
    ("pointwise_j2_lower_first", lambda t: _sq(t * t + 1) / (t * t + 0.15 * t + 1.06), ">", lambda t: -0.3001 * t + 0.94),
    ("pointwise_j2_lower_second", lambda t: _sq(t**4 + 1) / (1 + 0.15 * t * t + 1.06 * t**4), ">", lambda t: -0.37 * t * t + 1),
    ("pointwise_j2_upper_first", lambda t: _sq(t * t + 0.1 * t + 1) / (t * t + 0.7164), "<", lambda t: -0.69 * t + 1.54),
    ("pointwise_j2_upper_second", lambda t: _sq(t**4 + 0.1 * t * t + 1) / (1 + 0.7164 * t**4), "<", lambda t: 1.003 + 0 * t),
    ("pointwise_sqrt_quadratic", lambda t: _sq(1 - 0.1 * t + t * t), ">", lambda t: 1 - 0.0946 * t + 0.473 * t * t),
]


def _pointwise_checks(n: int) -> list[Check]:
    t = np.arange(1, n + 1) / (n + 1.0)
    out = []
    for name, lhs, rel, rhs in POINTWISE:
        diff = lhs(t) - rhs(t) if rel == ">" else rhs(t) - lhs(t)
        k = int(np.argmin(diff))
        out.append(
            make_check(name, lhs(t[k]), rel, rhs(t[k]), ROUNDING, note=f"worst t={t[k]:.6f} on {n} interior points")
        )
        for end in (0.0, 1.0):
            te = np.array([end])
            out.append(
                make_check(
                    f"{name}@t={end:g}", lhs(te)[0], rel + "=", rhs(te)[0], ROUNDING, note="endpoint limit"
                )
            )
    return out


def lemma83_suite(cfg: QuadratureConfig | None = None, n_points: int = 10_000) -> VerificationReport:
    """Fixed-constant integral bounds and pointwise inequalities on (0, 1)."""
    t0 = time.perf_counter()
    cfg = cfg or QuadratureConfig(rel_tol=1e-13, abs_tol=1e-14)
    report = VerificationReport("lemma83")
    report.extend(_integral_checks(cfg))
    report.extend(_pointwise_checks(n_points))
    report.elapsed = time.perf_counter() - t0
    return report


# --- parameter-grid bounds ------------------------------------------------------------------


@dataclass(frozen=True)
class BoundsGrid:
    """(sin rho, lambda, lam r / r0) sample points."""

    sin_rho: tuple[float, ...] = (-0.01, -0.0075, -0.005, -0.0025, -0.0005)
    lam: tuple[float, ...] = tuple(float(x) for x in np.geomspace(1.0, 100.0, 5))
    cap_r_frac: tuple[float, ...] = (0.05, 0.25, 0.5, 0.75, 1.0)

    def points(self) -> list[tuple[float, float, float]]:
        return [(s, lam, q) for s in self.sin_rho for lam in self.lam for q in self.cap_r_frac]


def _in_region(s: float, lam: float) -> bool:
    return -0.01 <= s < 0.0 and lam >= 1.0


def _point_checks(s: float, lam: float, frac: float, cfg: QuadratureConfig) -> list[Check]:
    rho = math.asin(s)
    r = frac * r0(rho) / lam
    params = GeometricParams(rho, lam, r)
    end = solve_end_cubic(params)
    a, b = end.a, end.b
    tag = f"[s={s:g},lam={lam:.4g},R/r0={frac:g}]"
    ok = _in_region(s, lam)
    note = "" if ok else "outside supported region"

    def chk(name, value, rel, bound, err):
        return make_check(f"{name}{tag}", value, rel, bound, err, note, assert_=ok)

    out = [
        chk("a_min", a, ">", A_MIN, ROUNDING),
        chk("a_max", a, "<", A_MAX, ROUNDING),
        chk("b_min", b, ">", B_MIN, ROUNDING),
        chk("b_max", b, "<=", s, ROUNDING),
    ]
    rj1, rj2 = j1_integral(params, end, cfg), j2_integral(params, end, cfg)
    ri1, ri2 = i1_integral(params, end, cfg), i2_integral(params, end, cfg)
    j1, j2, i1 = rj1.value, rj2.value, ri1.value
    j1lo, j1hi = j1_bounds(lam)
    j2lo, j2hi = j2_bounds(lam)
    out += [
        chk("j1_lower", j1, ">", j1lo, rj1.error_estimate),
        chk("j1_upper", j1, "<", j1hi, rj1.error_estimate),
        chk("j2_lower", j2, ">", j2lo, rj2.error_estimate),
        chk("j2_upper", j2, "<", j2hi, rj2.error_estimate),
        chk("i1_positive", i1, ">", 0.0, ri1.error_estimate),
    ]
    # c1 sandwich, written for c1^{-1} / r
    fl = float(f(lam, rho))
    inv1 = c1_inverse(params, end)
    q1 = inv1 / r
    out += [
        chk("c1_inverse_lower", q1, ">", 2 * A_MIN * fl / (lam * lam + A_MAX**2) - r, ROUNDING * abs(q1)),
        chk("c1_inverse_upper", q1, "<", 2 * A_MAX * fl / ((lam + B_MIN) ** 2 + A_MIN**2) - r, ROUNDING * abs(q1)),
    ]
    # c3~ sandwich, also for c3~^{-1} / r
    den3 = math.pi - 2 * a * j1 * r
    q3 = (2 * a * j2 - math.pi * r) / den3
    e3 = (2 * a * rj2.error_estimate + abs(q3) * 2 * a * r * rj1.error_estimate) / abs(den3)
    lo3 = (2 * A_MIN * j2lo - math.pi * r) / (math.pi - 2 * A_MIN * j1lo * r)
    hi3 = (2 * A_MAX * j2hi - math.pi * r) / (math.pi - 2 * A_MAX * j1hi * r)
    out += [
        chk("c3t_inverse_lower", q3, ">", lo3, e3),
        chk("c3t_inverse_upper", q3, "<", hi3, e3),
        chk("c3t_inverse_finite", den3, ">", 0.0, 2 * a * r * rj1.error_estimate),
    ]
    # 0 < r^2 c1 < 1
    r2c1 = r * r / inv1
    out += [
        chk("r2c1_positive", r2c1, ">", 0.0, ROUNDING),
        chk("r2c1_below_one", r2c1, "<", 1.0, ROUNDING),
    ]
    if lam == 1.0:
        i2 = ri2.value
        ratio = i2 / i1
        e_ratio = abs(ratio) * (ri2.error_estimate / abs(i2) + ri1.error_estimate / abs(i1))
        out += [
            chk("i2_at_lambda_1", i2, ">", 0.886, ri2.error_estimate),
            chk("i1_at_lambda_1_lower", i1, ">", 0.6588, ri1.error_estimate),
            chk("i1_at_lambda_1_upper", i1, "<", 1.528, ri1.error_estimate),
            chk("i2_over_i1_at_lambda_1", ratio, ">", 0.5798, e_ratio),
        ]
        if frac == 1.0:
            out.append(chk("a_min_sharp_corner", a, ">=", 0.849, ROUNDING))
    if frac == 1.0:
        # at R = r0 the c1 curve lies above c3~: compare reciprocals
        out.append(chk("c1_above_c3t_at_r0", q3 * r - inv1, ">", 0.0, e3 * r))
    return out


def _line_checks(s: float, lam: float, cfg: QuadratureConfig) -> list[Check]:
    """Checks that depend on (sin rho, lambda) only."""
    rho = math.asin(s)
    ok = _in_region(s, lam)
    note = "" if ok else "outside supported region"
    tag = f"[s={s:g},lam={lam:.4g}]"
    # at R = 0 the c1 curve lies below c3~
    lhs = 0.5 * math.pi * float(f(lam, rho)) / (lam * lam + math.cos(rho) ** 2)

    def integrand(t):
        t2 = t * t
        return (t2 / (t2 + lam) + 1.0 / (1.0 + lam * t2)) / np.sqrt(t2 * t2 - 2.0 * t2 * s + 1.0)

    res = integrate_adaptive(integrand, 0.0, 1.0, cfg)
    out = [make_check(f"c1_below_c3t_at_0{tag}", lhs, ">", res.value, res.error_estimate, note, ok)]
    # threshold keeping c3~^{-1} finite, and its comparison with r0
    j1hi = j1_bounds(lam)[1]
    thr = lam * math.pi / (2 * A_MAX * j1hi)
    out.append(make_check(f"c3t_finite_threshold{tag}", thr, ">", 0.4425, ROUNDING, note, ok))
    return out


def _s_checks(s: float) -> list[Check]:
    rho = math.asin(s)
    ok = _in_region(s, 1.0)
    note = "" if ok else "outside supported region"
    tag = f"[s={s:g}]"
    rt = 2 * A_MIN * float(f(1.0, rho)) / (1 + A_MAX**2)
    return [
        make_check(f"c1_slope_envelope_at_lambda_1{tag}", rt, ">=", 1.132, ROUNDING, note, ok),
        make_check(f"r0_below_finite_threshold{tag}", r0(rho), "<", 0.4425, ROUNDING, note, ok),
    ]


def bounds_suite(
    grid: BoundsGrid | Iterable[tuple[float, float, float]] | None = None,
    cfg: QuadratureConfig | None = None,
    threads: int = 1,
) -> VerificationReport:
    """End bounds, J/I envelopes, balance sandwiches and endpoint signs on a grid.

    ``grid`` is a :class:`BoundsGrid` or an iterable of (sin rho, lambda,
    lam r / r0) triples.  Points outside sin rho in [-0.01, 0), lambda >= 1
    produce informational entries only.
    """
    t0 = time.perf_counter()
    cfg = cfg or QuadratureConfig()
    pts = (grid or BoundsGrid()).points() if grid is None or isinstance(grid, BoundsGrid) else list(grid)
    lines = sorted({(s, lam) for s, lam, _ in pts}, key=lambda x: (x[0], x[1]))
    svals = sorted({s for s, _, _ in pts})
    jobs: list[Callable[[], list[Check]]] = [lambda s=s: _s_checks(s) for s in svals]
    jobs += [lambda s=s, lam=lam: _line_checks(s, lam, cfg) for s, lam in lines]
    jobs += [lambda p=p: _point_checks(*p, cfg) for p in pts]
    report = VerificationReport("bounds")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(lambda job: job(), jobs):
                report.extend(part)
    else:
        for job in jobs:
            report.extend(job())
    report.elapsed = time.perf_counter() - t0
    return report


# --- large-lambda surrogates ----------------------------------------------------------------


def _one_minus_sqrt_atan(lam: float) -> float:
    """1 - sqrt(lam) arctan(lam^{-1/2}) without cancellation for large lam."""
    if lam < 100.0:
        sl = math.sqrt(lam)
        return 1.0 - sl * math.atan(1.0 / sl)
    x = 1.0 / lam
    return math.fsum((-1) ** (k + 1) * x**k / (2 * k + 1) for k in range(1, 12))


def j2_envelope_scaled(lam: float) -> tuple[float, float]:
    """sqrt(lam) times the lower and upper J2 envelopes."""
    sl = math.sqrt(lam)
    common = _one_minus_sqrt_atan(lam)
    lo = -0.2 + (0.6002 * lam + 1.88) * common + (0.74 / lam + 2.0) / sl * math.atan(sl) - 0.74 / lam
    hi = -0.46 + (1.38 * lam + 3.08) * common + 2.006 / sl * math.atan(sl)
    return sl * lo, sl * hi


def asymptotics_suite(
    lambda_large: float = 1e6,
    sin_rho: float = -0.005,
    cap_r: float = 0.1,
    cfg: QuadratureConfig | None = None,
    rel_tol: float = 1e-3,
) -> VerificationReport:
    """Finite-lambda surrogates for the large-lambda limits.

    Limits are checked as ``|value - limit| < rel_tol * limit`` at
    ``lambda_large``; the sandwich claims are checked directly there.
    """
    t0 = time.perf_counter()
    cfg = cfg or QuadratureConfig()
    lam = float(lambda_large)
    report = VerificationReport("asymptotics")
    lo, hi = j2_envelope_scaled(lam)
    eps = 1e-12
    for name, val, target in (
        ("sqrt_lambda_j2_min_limit", lo, math.pi),
        ("sqrt_lambda_j2_max_limit", hi, 1.003 * math.pi),
    ):
        report.checks.append(
            make_check(name, abs(val - target) / target, "<", rel_tol, eps, note=f"value={val:.8f} target={target:.8f}")
        )
    rho = math.asin(sin_rho)
    params = GeometricParams.from_cap_r(rho, lam, cap_r)
    end = solve_end_cubic(params)
    r, a = params.r, end.a
    sl = math.sqrt(lam)
    q1 = sl * c1_inverse(params, end) / r
    report.checks += [
        make_check("sqrt_lambda_c1_inverse_lower", q1, ">", 1.6928, ROUNDING * abs(q1)),
        make_check("sqrt_lambda_c1_inverse_upper", q1, "<", 2.06, ROUNDING * abs(q1)),
    ]
    rj1, rj2 = j1_integral(params, end, cfg), j2_integral(params, end, cfg)
    den = math.pi - 2 * a * rj1.value * r
    q3 = sl * (2 * a * rj2.value - math.pi * r) / den
    e3 = sl * (2 * a * rj2.error_estimate + abs(q3 / sl) * 2 * a * r * rj1.error_estimate) / abs(den)
    report.checks += [
        make_check("sqrt_lambda_c3t_inverse_lower", q3, ">", 1.6928 * math.pi / (math.pi - 2.874 * cap_r), e3),
        make_check("sqrt_lambda_c3t_inverse_upper", q3, "<", 2.07 * math.pi / (math.pi - 5.05 * cap_r), e3),
    ]
    ri1, ri2 = i1_integral(params, end, cfg), i2_integral(params, end, cfg)
    scaled_i2 = lam**1.5 * ri2.value
    report.checks.append(
        make_check("lambda_three_halves_i2_divergence", scaled_i2, "<", -1e3, lam**1.5 * ri2.error_estimate)
    )
    ratio = lam**2.5 * ri2.value / ri1.value
    e_ratio = abs(ratio) * (ri2.error_estimate / abs(ri2.value) + ri1.error_estimate / abs(ri1.value))
    report.checks.append(make_check("lambda_five_halves_i2_over_i1_negative", ratio, "<", 0.0, e_ratio))
    report.elapsed = time.perf_counter() - t0
    return report


def run_suites(names: Iterable[str] = SUITES, threads: int = 1) -> VerificationReport:
    """Run the named suites in order and merge their reports."""
    runners = {
        "lemma83": lambda: lemma83_suite(),
        "bounds": lambda: bounds_suite(threads=threads),
        "asymptotics": lambda: asymptotics_suite(),
    }
    reports = [runners[n]() for n in names]
    total = reports[0]
    for rep in reports[1:]:
        total = total + rep
    return total
