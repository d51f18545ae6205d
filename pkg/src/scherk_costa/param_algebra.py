"""End placement for the Scherk-Costa torus family.

The torus is ``z'^2 = -i z (z - e^{i rho}) (z + e^{-i rho})`` and the Gauss map is
``g = c z' / (z + i lambda)``.  The side Scherk ends sit at the roots of

    -i z (z - e^{i rho})(z + e^{-i rho}) - r^2 (z + i lambda)^2 = 0,

which has one purely imaginary root ``i y`` and the symmetric pair ``x, -conj(x)``.
With ``w = -i z`` the cubic becomes monic with real coefficients,

    w^3 + R w^2 + sigma w + tau = 0,
    R = -2 sin(rho) - r^2,  sigma = 1 - 2 lambda r^2,  tau = -lambda^2 r^2,

so ``w = y`` is the real root and ``w = b -/+ i a`` the complex pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

Y0 = 0.2
SUPPORTED_SIN_RHO = (-0.01, 0.0)


class CubicError(ValueError):
    """Raised when the end-placement cubic cannot be resolved into {x, -conj(x), iy}."""


@dataclass(frozen=True)
class GeometricParams:
    """Free parameters (rho, lambda, r) of one candidate surface.

    ``lam`` is the position of the middle end ``z = -i lam``; ``cap_r`` is the
    scaled variable ``lam * r`` used throughout the period analysis.
    """

    rho: float
    lam: float
    r: float

    def __post_init__(self) -> None:
        if not (-math.pi / 2 < self.rho < math.pi / 2):
            raise ValueError(f"rho must lie in (-pi/2, pi/2), got {self.rho}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.r >= 0:
            raise ValueError(f"r must be nonnegative, got {self.r}")

    @property
    def cap_r(self) -> float:
        return self.lam * self.r

    @property
    def sin_rho(self) -> float:
        return math.sin(self.rho)

    @classmethod
    def from_cap_r(cls, rho: float, lam: float, cap_r: float) -> "GeometricParams":
        return cls(rho, lam, cap_r / lam)

    def in_supported_region(self) -> bool:
        """True inside sin(rho) in [-0.01, 0), lambda >= 1, r <= r0/lambda."""
        s = self.sin_rho
        return (
            SUPPORTED_SIN_RHO[0] <= s < SUPPORTED_SIN_RHO[1]
            and self.lam >= 1.0
            and self.r <= r0(self.rho) / self.lam
        )


@dataclass(frozen=True)
class EndConfiguration:
    """Roots of the end cubic plus the Cardano intermediates.

    ``x = a + i b`` is the side end with positive real part, ``-conj(x)`` its
    mirror and ``i y`` the purely imaginary root.
    """

    a: float
    b: float
    y: float
    delta: float
    R: float
    sigma: float
    tau: float
    p: float
    q: float
    u: float
    v: float
    method: str = "cardano"
    flags: tuple[str, ...] = field(default_factory=tuple)

    @property
    def x(self) -> complex:
        return complex(self.a, self.b)

    @property
    def roots(self) -> tuple[complex, complex, complex]:
        """The three z-roots in the order (x, -conj(x), iy)."""
        x = self.x
        return (x, -x.conjugate(), complex(0.0, self.y))

    @property
    def abs_x_sq(self) -> float:
        return self.a * self.a + self.b * self.b


def r0(rho: float) -> float:
    """Upper limit of the scaled variable lambda*r used by the end bounds."""
    s = abs(math.sin(rho))
    return math.sqrt(Y0 * (Y0 * Y0 + 2.0 * s * Y0 + 1.0)) / (Y0 + 1.0)


def cubic_coefficients(params: GeometricParams) -> tuple[float, float, float]:
    """(R, sigma, tau) of the monic cubic in w = -i z."""
    r2 = params.r * params.r
    return (
        -2.0 * params.sin_rho - r2,
        1.0 - 2.0 * params.lam * r2,
        -params.lam * params.lam * r2,
    )


def cubic_residual(params: GeometricParams, z: complex) -> complex:
    """Left side of the cleared end equation at z (zero at the three ends)."""
    e = complex(math.cos(params.rho), math.sin(params.rho))
    return -1j * z * (z - e) * (z + e.conjugate()) - params.r**2 * (z + 1j * params.lam) ** 2


def _y_map(y: float, s: float, lam: float) -> float:
    return y * (y * y - 2.0 * s * y + 1.0) / (y + lam) ** 2


def imaginary_root_y(params: GeometricParams) -> float:
    """The height y > 0 of the purely imaginary end root iy.

    Solves ``y (y^2 - 2 y sin(rho) + 1) / (y + lambda)^2 = r^2`` by bisection;
    for negative rho the map is increasing in y so the root is unique.
    """
    r2 = params.r * params.r
    if r2 == 0.0:
        return 0.0
    s, lam = params.sin_rho, params.lam
    lo, hi = 0.0, 1.0
    for _ in range(2100):
        if _y_map(hi, s, lam) >= r2:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise CubicError("no bracket for the imaginary root")
    for _ in range(2100):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _y_map(mid, s, lam) < r2:
            lo = mid
        else:
            hi = mid
    else:
        raise CubicError("bisection for the imaginary root did not converge")
    # pick the endpoint with the smaller residual
    return lo if abs(_y_map(lo, s, lam) - r2) <= abs(_y_map(hi, s, lam) - r2) else hi


def _newton_polish(coeffs: tuple[float, float, float], w: complex, steps: int = 2) -> complex:
    R, sg, tau = coeffs
    for _ in range(steps):
        fw = ((w + R) * w + sg) * w + tau
        dfw = (3.0 * w + 2.0 * R) * w + sg
        if dfw == 0:
            break
        step = fw / dfw
        w_new = w - step
        if abs(((w_new + R) * w_new + sg) * w_new + tau) > abs(fw):
            break
        w = w_new
    return w


def _fallback_roots(coeffs: tuple[float, float, float]) -> tuple[complex, float]:
    """Generic cubic solve; returns (w-root of the complex pair with Im<0, real root)."""
    R, sg, tau = coeffs
    roots = np.roots([1.0, R, sg, tau])
    mags = np.maximum(np.abs(roots), 1e-300)
    # z = i w is purely imaginary exactly when w is real
    real_mask = np.abs(roots.imag) < 1e-9 * mags
    cplx = roots[~real_mask]
    if real_mask.sum() != 1 or len(cplx) != 2:
        raise CubicError(
            "root classification failed: expected one purely imaginary end and a "
            f"symmetric pair, got w-roots {roots.tolist()}"
        )
    w_pair = complex(cplx[np.argmin(cplx.imag)])
    return w_pair, float(roots[real_mask][0].real)


def solve_end_cubic(params: GeometricParams) -> EndConfiguration:
    """Resolve the end cubic into x = a + ib, -conj(x) and iy.

    Uses the Cardano formulas with real cube roots when the discriminant is
    positive, and a companion-matrix solve plus classification otherwise.
    ``y`` always comes from :func:`imaginary_root_y`.
    """
    coeffs = cubic_coefficients(params)
    R, sg, tau = coeffs
    if params.r == 0.0:
        a, b = math.cos(params.rho), math.sin(params.rho)
        p = sg - R * R / 3.0
        q = 2.0 * R**3 / 27.0 - R * sg / 3.0 + tau
        delta = (q / 2.0) ** 2 + (p / 3.0) ** 3
        return EndConfiguration(a, b, 0.0, delta, R, sg, tau, p, q, math.nan, math.nan, "limit")

    p = sg - R * R / 3.0
    q = 2.0 * R**3 / 27.0 - R * sg / 3.0 + tau
    delta = (q / 2.0) ** 2 + (p / 3.0) ** 3
    flags: list[str] = []
    supported = params.in_supported_region()
    if delta > 0.0:
        sq = math.sqrt(delta)
        u = float(np.cbrt(-q / 2.0 + sq))
        v = float(np.cbrt(-q / 2.0 - sq))
        w_pair = complex(-(u + v) / 2.0 - R / 3.0, -math.sqrt(3.0) * abs(u - v) / 2.0)
        w_pair = _newton_polish(coeffs, w_pair)
        method = "cardano"
        # cross-check the formula against the generic solver
        try:
            w_fb, _ = _fallback_roots(coeffs)
            if abs(w_fb - w_pair) > 1e-7 * max(1.0, abs(w_pair)):
                flags.append("cardano_fallback_disagree")
        except CubicError:
            flags.append("cardano_fallback_disagree")
    else:
        if supported:
            raise CubicError(
                f"discriminant {delta:.3e} <= 0 inside the supported region at {params}"
            )
        u = v = math.nan
        w_pair, _ = _fallback_roots(coeffs)
        w_pair = _newton_polish(coeffs, w_pair)
        method = "fallback"
    if not supported:
        flags.append("outside_supported_region")
    a = -w_pair.imag
    b = w_pair.real
    if not a > 0:
        raise CubicError(f"side end has nonpositive real part a={a}")
    y = imaginary_root_y(params)
    return EndConfiguration(a, b, y, delta, R, sg, tau, p, q, u, v, method, tuple(flags))
