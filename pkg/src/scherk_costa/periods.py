"""Residues, period integrals and the three balance values c1, c2, c3 (and c3~).

Every balance value is a candidate for c^2, where c is the Lopez-Ros factor in
g = c w.  With Q+(t) = (t + b)^2 + a^2 and Q-(t) = (t - b)^2 + a^2:

    J1 = int_0^inf (t + lam) / (f~(t) Q-(t)) dt
    J2 = int_0^inf f~(t) / ((t + lam) Q-(t)) dt
    I1 = int_0^inf (lam - t) / (f(t) Q+(t)) dt
    I2 = PV int_0^inf f(t) / ((t - lam) Q+(t)) dt

All four are evaluated in unit-interval forms obtained from t -> t^2 on (0, 1]
and t -> t^-2 on [1, inf) (I1 and I2 additionally rescaled by lam).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .param_algebra import EndConfiguration, GeometricParams, solve_end_cubic
from .quadrature import (
    QuadratureConfig,
    QuadratureResult,
    integrate_adaptive,
    integrate_principal_value,
    integrate_tail,
)

# removable point of the I2 integrand: values inside this window are replaced
REMOVABLE_WINDOW = 1e-4
_PV_AGREEMENT = 1e-8


class PeriodConsistencyWarning(UserWarning):
    """The principal-value and combined-form evaluations of I2 disagree."""


def f(t, rho: float):
    """f(t) = sqrt(t (t^2 + 1 + 2 t sin(rho)))."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(t * (t * t + 1.0 + 2.0 * t * math.sin(rho)))


def f_tilde(t, rho: float):
    """f~(t) = f(t) with sin(rho) replaced by -sin(rho)."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(t * (t * t + 1.0 - 2.0 * t * math.sin(rho)))


def _end(params: GeometricParams, end: EndConfiguration | None) -> EndConfiguration:
    return end if end is not None else solve_end_cubic(params)


def middle_denominator(params: GeometricParams, end: EndConfiguration) -> float:
    """(lam + b)^2 + a^2 = |x - (-i lam)|^2 up to the rotation z -> -iz."""
    return (params.lam + end.b) ** 2 + end.a**2


def residue_middle_end(params: GeometricParams, end: EndConfiguration | None, c: float) -> np.ndarray:
    """Translation period around the middle end z = -i lam."""
    end = _end(params, end)
    k = c * math.pi * float(f(params.lam, params.rho)) / middle_denominator(params, end)
    return np.array([0.0, k, 0.0])


def residue_side_end(params: GeometricParams, end: EndConfiguration | None, c: float) -> np.ndarray:
    """Translation period around the side end z = x (and, in magnitude, -conj(x))."""
    end = _end(params, end)
    if end.a <= 0:
        raise ValueError("side end must have positive real part")
    cr = c * params.r
    if cr == 0:
        return np.array([0.0, math.inf, 0.0])
    return np.array([0.0, math.pi / (2.0 * end.a) * (cr + 1.0 / cr), 0.0])


def c1_inverse(params: GeometricParams, end: EndConfiguration | None = None) -> float:
    """1/c1 = 2 a f(lam) r / ((lam + b)^2 + a^2) - r^2."""
    end = _end(params, end)
    r = params.r
    return 2.0 * end.a * float(f(params.lam, params.rho)) * r / middle_denominator(params, end) - r * r


def c1(params: GeometricParams, end: EndConfiguration | None = None) -> float:
    """c^2 equalising the middle- and side-end residues (may be negative)."""
    inv = c1_inverse(params, end)
    return math.inf if inv == 0 else 1.0 / inv


# --- the four period integrals -------------------------------------------------


def j1_integral(params: GeometricParams, end: EndConfiguration, cfg: QuadratureConfig | None = None) -> QuadratureResult:
    s, lam, a, b = params.sin_rho, params.lam, end.a, end.b

    def integrand(t):
        t2 = t * t
        first = 2.0 * (t2 + lam) / (np.sqrt(t2 * t2 - 2.0 * t2 * s + 1.0) * ((t2 - b) ** 2 + a * a))
        second = np.sqrt(t) * (1.0 + lam * t) / (
            np.sqrt(t2 - 2.0 * t * s + 1.0) * ((1.0 - b * t) ** 2 + a * a * t2)
        )
        return first + second

    return integrate_adaptive(integrand, 0.0, 1.0, cfg)


def j2_integral(params: GeometricParams, end: EndConfiguration, cfg: QuadratureConfig | None = None) -> QuadratureResult:
    s, lam, a, b = params.sin_rho, params.lam, end.a, end.b

    def integrand(t):
        t2 = t * t
        first = np.sqrt(t * (t2 - 2.0 * t * s + 1.0)) / ((t + lam) * ((t - b) ** 2 + a * a))
        second = 2.0 * np.sqrt(t2 * t2 - 2.0 * t2 * s + 1.0) / (
            (1.0 + lam * t2) * ((1.0 - b * t2) ** 2 + a * a * t2 * t2)
        )
        return first + second

    return integrate_adaptive(integrand, 0.0, 1.0, cfg)


def i1_integral(params: GeometricParams, end: EndConfiguration, cfg: QuadratureConfig | None = None) -> QuadratureResult:
    s, lam, a, b = params.sin_rho, params.lam, end.a, end.b

    def integrand(t):
        t2 = t * t
        t4 = t2 * t2
        first = 1.0 / (np.sqrt(lam * lam * t4 + 2.0 * lam * t2 * s + 1.0) * ((lam * t2 + b) ** 2 + a * a))
        second = t2 / (np.sqrt(t4 + 2.0 * lam * t2 * s + lam * lam) * ((lam + b * t2) ** 2 + a * a * t4))
        return (first - second) * (1.0 - t2)

    return integrate_adaptive(integrand, 0.0, 1.0, cfg).scaled(2.0 * lam**1.5)


def _i2_bracket(t, s, lam, a, b):
    t2 = t * t
    t4 = t2 * t2
    first = np.sqrt(t4 + 2.0 * lam * t2 * s + lam * lam) / ((lam + b * t2) ** 2 + a * a * t4)
    second = t2 * np.sqrt(lam * lam * t4 + 2.0 * lam * t2 * s + 1.0) / ((lam * t2 + b) ** 2 + a * a)
    return (first - second) / (1.0 - t2)


def i2_integral(params: GeometricParams, end: EndConfiguration, cfg: QuadratureConfig | None = None) -> QuadratureResult:
    """I2 from its pole-free unit-interval form.

    The bracket vanishes at t = 1, so the integrand has a removable point there;
    inside ``|t - 1| < REMOVABLE_WINDOW`` it is replaced by the quadratic through
    three samples just outside the window.
    """
    s, lam, a, b = params.sin_rho, params.lam, end.a, end.b
    h = REMOVABLE_WINDOW
    anchors = 1.0 - np.array([2.0, 3.0, 4.0]) * h
    anchor_vals = _i2_bracket(anchors, s, lam, a, b)

    def integrand(t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        near = np.abs(1.0 - t) < h
        far = ~near
        out[far] = _i2_bracket(t[far], s, lam, a, b)
        if near.any():
            d = 1.0 - t[near]
            # Lagrange quadratic in d through d = 2h, 3h, 4h
            x0, x1, x2 = 2.0 * h, 3.0 * h, 4.0 * h
            l0 = (d - x1) * (d - x2) / ((x0 - x1) * (x0 - x2))
            l1 = (d - x0) * (d - x2) / ((x1 - x0) * (x1 - x2))
            l2 = (d - x0) * (d - x1) / ((x2 - x0) * (x2 - x1))
            out[near] = l0 * anchor_vals[0] + l1 * anchor_vals[1] + l2 * anchor_vals[2]
        return out

    return integrate_adaptive(integrand, 0.0, 1.0, cfg).scaled(2.0 * math.sqrt(lam))


def i2_principal_value(params: GeometricParams, end: EndConfiguration, cfg: QuadratureConfig | None = None) -> QuadratureResult:
    """I2 straight from its half-line definition through the pole at t = lam."""
    s, lam, a, b = params.sin_rho, params.lam, end.a, end.b

    def integrand(t):
        t = np.asarray(t, dtype=float)
        return np.sqrt(t * (t * t + 1.0 + 2.0 * t * s)) / ((t - lam) * ((t + b) ** 2 + a * a))

    head = integrate_principal_value(integrand, 0.0, 2.0 * lam, lam, cfg)
    tail = integrate_tail(integrand, 2.0 * lam, cfg)
    return head + tail


# --- balance values --------------------------------------------------------------


def _ratio(num: float, den: float) -> float:
    if den == 0:
        return math.copysign(math.inf, num) if num else math.nan
    return num / den


def c2(
    params: GeometricParams,
    end: EndConfiguration | None = None,
    cfg: QuadratureConfig | None = None,
    check_pv: bool = True,
) -> float:
    """c^2 closing the x1-component of the cycle period: I1 / I2."""
    end = _end(params, end)
    i1 = i1_integral(params, end, cfg).value
    i2 = i2_integral(params, end, cfg).value
    if check_pv:
        i2_pv = i2_principal_value(params, end, cfg).value
        if abs(i2_pv - i2) > _PV_AGREEMENT * max(abs(i2), 1e-300):
            warnings.warn(
                f"I2 principal value {i2_pv!r} disagrees with the combined form {i2!r}",
                PeriodConsistencyWarning,
                stacklevel=2,
            )
    return _ratio(i1, i2)


def middle_term(params: GeometricParams, end: EndConfiguration) -> float:
    """pi f(lam) / ((lam + b)^2 + a^2), the half-residue of the indentation."""
    return math.pi * float(f(params.lam, params.rho)) / middle_denominator(params, end)


def c3(params: GeometricParams, end: EndConfiguration | None = None, cfg: QuadratureConfig | None = None) -> float:
    """c^2 closing the x2-component of the cycle period: J1 / (pi f(lam)/K - J2)."""
    end = _end(params, end)
    j1 = j1_integral(params, end, cfg).value
    j2 = j2_integral(params, end, cfg).value
    return _ratio(j1, middle_term(params, end) - j2)


def c3_tilde_from(params: GeometricParams, end: EndConfiguration, j1: float, j2: float) -> float:
    r, a = params.r, end.a
    return _ratio(math.pi - 2.0 * a * j1 * r, r * (2.0 * a * j2 - math.pi * r))


def c3_tilde(params: GeometricParams, end: EndConfiguration | None = None, cfg: QuadratureConfig | None = None) -> float:
    """c^2 balancing the side-end residue against the segment AB."""
    end = _end(params, end)
    j1 = j1_integral(params, end, cfg).value
    j2 = j2_integral(params, end, cfg).value
    return c3_tilde_from(params, end, j1, j2)


def closure_mismatch(
    params: GeometricParams,
    c: float,
    end: EndConfiguration | None = None,
    cfg: QuadratureConfig | None = None,
) -> complex:
    """c^2 * conj(int w dh) - int w^-1 dh along the boundary cycle.

    Written with the real integrals, conj(int w dh) ~ -I2 + i(pi f(lam)/K - J2)
    and int w^-1 dh ~ -I1 + i J1, so the real part vanishes exactly when
    c^2 = c2 and the imaginary part when c^2 = c3.
    """
    end = _end(params, end)
    c_sq = c * c
    i1 = i1_integral(params, end, cfg).value
    i2 = i2_integral(params, end, cfg).value
    j1 = j1_integral(params, end, cfg).value
    j2 = j2_integral(params, end, cfg).value
    return complex(i1 - c_sq * i2, c_sq * (middle_term(params, end) - j2) - j1)


def cycle_integral_scale(params: GeometricParams, end: EndConfiguration | None = None, cfg: QuadratureConfig | None = None) -> float:
    """|conj(int w dh)| in the same normalisation as :func:`closure_mismatch`."""
    end = _end(params, end)
    i2 = i2_integral(params, end, cfg).value
    j2 = j2_integral(params, end, cfg).value
    return abs(complex(-i2, middle_term(params, end) - j2))


@dataclass(frozen=True)
class PeriodDiagnostics:
    """All period quantities at one parameter point."""

    c1: float
    c2: float
    c3: float
    c3_tilde: float
    residue_middle: np.ndarray
    residue_side: np.ndarray
    J1: float
    J2: float
    I1: float
    I2: float
    I2_pv: float | None
    closure_mismatch: complex
    quad_error: float
    flags: tuple[str, ...] = field(default_factory=tuple)


def period_diagnostics(
    params: GeometricParams,
    end: EndConfiguration | None = None,
    cfg: QuadratureConfig | None = None,
    c: float | None = None,
    check_pv: bool = True,
) -> PeriodDiagnostics:
    """Evaluate every period quantity once.

    Residues and the closure mismatch use ``c`` when given, otherwise
    c = sqrt(c1) when c1 > 0.
    """
    end = _end(params, end)
    flags = list(end.flags)
    rj1 = j1_integral(params, end, cfg)
    rj2 = j2_integral(params, end, cfg)
    ri1 = i1_integral(params, end, cfg)
    ri2 = i2_integral(params, end, cfg)
    err = rj1.error_estimate + rj2.error_estimate + ri1.error_estimate + ri2.error_estimate
    if not all(r.converged for r in (rj1, rj2, ri1, ri2)):
        flags.append("quadrature_unconverged")
    i2_pv = None
    if check_pv:
        rpv = i2_principal_value(params, end, cfg)
        i2_pv = rpv.value
        if abs(i2_pv - ri2.value) > _PV_AGREEMENT * max(abs(ri2.value), 1e-300):
            flags.append("i2_pv_mismatch")
    v1 = c1(params, end)
    if not v1 > 0:
        flags.append("c1_nonpositive")
    v2 = _ratio(ri1.value, ri2.value)
    den3 = middle_term(params, end) - rj2.value
    v3 = _ratio(rj1.value, den3)
    v3t = c3_tilde_from(params, end, rj1.value, rj2.value)
    if abs(2.0 * end.a * rj2.value - math.pi * params.r) < 1e-12:
        flags.append("c3_tilde_pole")
    if c is None:
        c = math.sqrt(v1) if v1 > 0 and math.isfinite(v1) else 1.0
    c_sq = c * c
    mismatch = complex(ri1.value - c_sq * ri2.value, c_sq * den3 - rj1.value)
    return PeriodDiagnostics(
        c1=v1,
        c2=v2,
        c3=v3,
        c3_tilde=v3t,
        residue_middle=residue_middle_end(params, end, c),
        residue_side=residue_side_end(params, end, c),
        J1=rj1.value,
        J2=rj2.value,
        I1=ri1.value,
        I2=ri2.value,
        I2_pv=i2_pv,
        closure_mismatch=mismatch,
        quad_error=err,
        flags=tuple(flags),
    )
