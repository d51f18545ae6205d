"""One-parameter deformation from a solved Scherk-Costa piece towards half-Costa.

For s in [0, 1):

    r(s) = r* (1 - s),  rho(s) = rho* (1 - s),
    lam(s) = lam* (1 - s) + s (2 r(s) mu)^(-2/3),

and c(s)^2 = min(c1(s), c2(s)) when c2(s) > 0, else c1(s).  The member at s
feeds :func:`immerse` directly; its Gauss map is sampled here near the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..param_algebra import EndConfiguration, GeometricParams, solve_end_cubic
from ..periods import c1 as balance_c1
from ..periods import c2 as balance_c2
from ..quadrature import QuadratureConfig
from ..solver import SolvedSurface


class FamilyError(ValueError):
    """c(s)^2 is not positive, so the member has no real Lopez-Ros factor."""


@dataclass(frozen=True)
class FamilyMember:
    s: float
    mu: float
    params: GeometricParams
    end: EndConfiguration
    c: float
    c1: float
    c2: float
    branch: str

    def as_tuple(self) -> tuple[GeometricParams, EndConfiguration, float]:
        return self.params, self.end, self.c

    @property
    def c_sq_over_lam_sq(self) -> float:
        return self.c * self.c / (self.params.lam * self.params.lam)

    def to_dict(self) -> dict:
        p = self.params
        return {
            "s": self.s, "mu": self.mu, "rho": p.rho, "lambda": p.lam, "r": p.r,
            "c": self.c, "c1": self.c1, "c2": self.c2, "branch": self.branch,
        }


def family_parameters(solved: SolvedSurface, mu: float, s: float) -> GeometricParams:
    if not 0.0 <= s < 1.0:
        raise ValueError(f"s must lie in [0, 1), got {s}")
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    p = solved.params
    if s == 0.0:
        return p
    r = p.r * (1.0 - s)
    lam = p.lam * (1.0 - s) + s * (2.0 * r * mu) ** (-2.0 / 3.0)
    return GeometricParams(p.rho * (1.0 - s), lam, r)


def family_member(
    solved: SolvedSurface, mu: float, s: float, qcfg: QuadratureConfig | None = None
) -> FamilyMember:
    """Member s of the family; s = 0 returns the solved surface unchanged."""
    params = family_parameters(solved, mu, s)
    if s == 0.0:
        return FamilyMember(0.0, mu, params, solved.end, solved.c, solved.c1, solved.c2, "solved")
    end = solve_end_cubic(params)
    v1 = balance_c1(params, end)
    v2 = balance_c2(params, end, qcfg, check_pv=False)
    if v2 > 0:
        c_sq, branch = (v1, "c1") if v1 <= v2 else (v2, "c2")
    else:
        c_sq, branch = v1, "c1"
    if not c_sq > 0 or not math.isfinite(c_sq):
        raise FamilyError(f"c(s)^2 = {c_sq} at s={s}, mu={mu}: the family needs c(s)^2 > 0")
    return FamilyMember(float(s), float(mu), params, end, math.sqrt(c_sq), v1, v2, branch)


def deformation_family(
    solved: SolvedSurface, mu: float, s: float, qcfg: QuadratureConfig | None = None
) -> tuple[GeometricParams, EndConfiguration, float]:
    """(params, end, c) of the member at s."""
    return family_member(solved, mu, s, qcfg).as_tuple()


def gauss_abs(member: FamilyMember, z) -> np.ndarray:
    """|g_s(z)|, which does not depend on the sheet."""
    z = np.asarray(z, dtype=complex)
    rho, lam = member.params.rho, member.params.lam
    e = complex(math.cos(rho), math.sin(rho))
    poly = -1j * z * (z - e) * (z + e.conjugate())
    with np.errstate(divide="ignore", invalid="ignore"):
        return member.c * np.sqrt(np.abs(poly)) / np.abs(z + 1j * lam)


@dataclass(frozen=True)
class RegionStats:
    samples: int
    min_abs_g: float
    max_abs_g: float
    violations: int


@dataclass(frozen=True)
class GaussRegionReport:
    s: float
    kappa: float
    n: int
    disk: RegionStats
    lower: RegionStats

    @property
    def ok(self) -> bool:
        return self.disk.violations == 0 and self.lower.violations == 0

    def to_dict(self) -> dict:
        return {
            "s": self.s, "kappa": self.kappa, "n": self.n, "ok": self.ok,
            "disk": vars(self.disk), "lower": vars(self.lower),
        }


def _stats(values: np.ndarray, bad: np.ndarray) -> RegionStats:
    return RegionStats(int(values.size), float(values.min()), float(values.max()), int(bad.sum()))


def gauss_region_check(member: FamilyMember, kappa: float, n: int = 200, extent: float | None = None) -> GaussRegionReport:
    """Sample |g_s| against |g_s| < 1 on D(1, 1/kappa) and |g_s| > 1 on {Re >= 0, Im < -kappa}.

    The disk is sampled on an n x n polar grid.  The unbounded lower region is
    sampled on an n x n grid with geometric spacing in Re z and in -kappa - Im z,
    reaching ``extent`` (default 10 max(kappa, lam)) so that the pole at
    -i lam and the far field are both covered.  Points at the pole are skipped.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    rad = np.linspace(0.0, 1.0 / kappa, n + 1)[1:]
    ang = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    disk = (1.0 + rad[:, None] * np.exp(1j * ang[None, :])).ravel()
    disk = np.concatenate([[1.0 + 0j], disk])
    g_disk = gauss_abs(member, disk)
    ext = extent if extent is not None else 10.0 * max(kappa, member.params.lam)
    re = np.concatenate([[0.0], np.geomspace(1e-6 * kappa, ext, n - 1)])
    depth = np.geomspace(1e-9 * kappa, ext, n)
    lower = (re[:, None] - 1j * (kappa + depth[None, :])).ravel()
    g_low = gauss_abs(member, lower)
    g_low = g_low[np.isfinite(g_low)]
    return GaussRegionReport(
        member.s, float(kappa), n,
        _stats(g_disk, ~(g_disk < 1.0)),
        _stats(g_low, ~(g_low > 1.0)),
    )


def limit_defect(member: FamilyMember, radius: float = 2.0, n: int = 200, coefficient: float | None = None) -> float:
    """sup over |z| <= radius of |g_s^2 - k i z (z^2 - 1)| with k = 2 mu^2 by default."""
    k = 2.0 * member.mu**2 if coefficient is None else coefficient
    rad = np.linspace(0.0, radius, n)
    ang = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    z = (rad[:, None] * np.exp(1j * ang[None, :])).ravel()
    rho, lam = member.params.rho, member.params.lam
    e = complex(math.cos(rho), math.sin(rho))
    g_sq = member.c**2 * (-1j * z * (z - e) * (z + e.conjugate())) / (z + 1j * lam) ** 2
    return float(np.max(np.abs(g_sq - k * 1j * z * (z * z - 1.0))))
