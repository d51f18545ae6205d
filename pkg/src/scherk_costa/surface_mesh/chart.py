"""Disk charts for the two-sheeted half-plane pieces.

Both surfaces live on a torus that double covers the z-sphere.  The closed
right half-plane {Re z >= 0} lifts to a disk, and we use the coordinate

    omega^2 = (z - e^{i rho}) / (z + e^{-i rho}),   |omega| <= 1,

in which z' is single valued.  The branch point e^{i rho} sits at omega = 0,
z = 0 at omega = +-i e^{i rho}, z = infinity at omega = +-1, and the boundary
circle covers the imaginary axis twice.  Opposite points omega, -omega share z
and carry opposite values of z'.

A chart exposes the Weierstrass one-form phi = (phi1, phi2, phi3) as
coefficients of d omega, together with the geometric landmarks the mesher
needs: corners (integrable algebraic endpoint singularities), removed points
(ends) and the basepoint A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..param_algebra import EndConfiguration, GeometricParams

_SQRT_MINUS_I = complex(math.cos(-math.pi / 4), math.sin(-math.pi / 4))
_SQRT_PLUS_I = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))


@dataclass(frozen=True)
class DomainPoint:
    """A point of the torus: z, the branch of z' relative to the principal root, and w."""

    z: complex
    sheet: int
    w: complex


def _weierstrass(g_dh, dh_over_g, dh):
    """(phi1, phi2, phi3) from g dh, dh / g and dh (all per d omega)."""
    return np.stack([0.5 * (g_dh - dh_over_g), 0.5j * (g_dh + dh_over_g), dh])


def _sheet_of(zp: np.ndarray, poly: np.ndarray) -> np.ndarray:
    root = np.sqrt(poly)
    with np.errstate(invalid="ignore"):
        same = np.abs(zp - root) <= np.abs(zp + root)
    return np.where(same | ~np.isfinite(zp), 1, -1).astype(np.int8)


class DiskChart:
    """Common interface; subclasses fill in the landmarks and the data."""

    #: rotation alpha of the frame nu = omega e^{-i alpha} whose diameter holds the slit
    alpha: float = 0.0
    #: radius (in the frame) up to which diameter vertices are duplicated
    slit_radius: float = 0.0
    #: inner radius of the annulus; 0 means the centre is a vertex
    r_min: float = 0.0
    basepoint: complex
    corners: tuple[complex, ...] = ()
    removed: tuple[complex, ...] = ()
    #: singular points that edges must keep away from (ends and corners)
    singular: tuple[complex, ...] = ()
    #: extra radial breakpoints in the frame
    radial_breaks: tuple[float, ...] = ()
    #: angular breakpoints in the frame, within (0, pi); mirrored by +pi
    angular_breaks: tuple[float, ...] = ()

    def z(self, om):
        raise NotImplementedError

    def zprime(self, om):
        raise NotImplementedError

    def gauss(self, om):
        raise NotImplementedError

    def phi(self, om):
        raise NotImplementedError

    def torus_poly(self, z):
        raise NotImplementedError

    def w(self, om):
        """The continuity-tracked quantity used for sheet audits."""
        return self.zprime(om)

    def boundary_tag(self, om) -> np.ndarray:
        raise NotImplementedError

    def sheet(self, om) -> np.ndarray:
        om = np.asarray(om, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _sheet_of(self.zprime(om), self.torus_poly(self.z(om)))

    def point(self, om: complex) -> DomainPoint:
        om_a = np.array([om], dtype=complex)
        return DomainPoint(complex(self.z(om_a)[0]), int(self.sheet(om_a)[0]), complex(self.w(om_a)[0]))


def _frame_angle(om: complex, alpha: float) -> float:
    return float(np.mod(np.angle(om) - alpha, 2 * math.pi))


class ScherkCostaChart(DiskChart):
    """Weierstrass data g = c z'/(z + i lam), dh = dz/((z - x)(z + conj x)) on the disk."""

    def __init__(self, params: GeometricParams, end: EndConfiguration, c: float):
        if not c > 0:
            raise ValueError(f"c must be positive, got {c}")
        self.params, self.end, self.c = params, end, float(c)
        rho, lam = params.rho, params.lam
        self.e = complex(math.cos(rho), math.sin(rho))
        self.cos_rho = math.cos(rho)
        x = end.x
        self.x = x
        om_x = complex(np.sqrt(self._m(x)))
        om_lam = complex(np.sqrt(self._m(-1j * lam)))
        om_a = 1j * self.e
        self.omega_x, self.omega_lam, self.omega_a = om_x, om_lam, om_a
        # -conj(x) lies in Re z < 0, i.e. outside the unit disk
        self.omega_mirror = complex(np.sqrt(self._m(-x.conjugate())))
        ec = self.e.conjugate()
        self.k_x = ec + x
        self.k_m = ec - x.conjugate()
        self.k_lam = ec - 1j * lam
        self.alpha = float(np.angle(om_x))
        self.slit_radius = abs(om_x)
        self.r_min = 0.0
        # the basepoint lift sits in the upper half of the frame
        self.basepoint = om_a if _frame_angle(om_a, self.alpha) < math.pi else -om_a
        self.corners = (om_a, -om_a, 1.0 + 0j, -1.0 + 0j)
        self.removed = (om_x, -om_x, om_lam, -om_lam)
        self.singular = self.removed + self.corners
        self.radial_breaks = (abs(om_x),)
        self.angular_breaks = tuple(
            sorted({_frame_angle(p, self.alpha) % math.pi for p in (om_a, 1.0 + 0j, om_lam)} - {0.0})
        )

    def _m(self, z):
        return (z - self.e) / (z + self.e.conjugate())

    def omega_of(self, z):
        """Both lifts share omega^2; returns the principal root."""
        return np.sqrt(self._m(np.asarray(z, dtype=complex)))

    def z(self, om):
        om = np.asarray(om, dtype=complex)
        q = om * om
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.e + self.e.conjugate() * q) / (1.0 - q)

    def torus_poly(self, z):
        e = self.e
        return -1j * z * (z - e) * (z + e.conjugate())

    def _root_factor(self, om):
        """S = e^{-i pi/4} sqrt(z) (principal sqrt; analytic on Re z >= 0)."""
        return _SQRT_MINUS_I * np.sqrt(self.z(om))

    def zprime(self, om):
        om = np.asarray(om, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return 2.0 * self.cos_rho * om * self._root_factor(om) / (1.0 - om * om)

    def _sq_factors(self, om):
        """omega^2 - omega_e^2 as products of linear factors (free of cancellation)."""
        ox, ol, on = self.omega_x, self.omega_lam, self.omega_mirror
        return (om - ox) * (om + ox), (om - ol) * (om + ol), (om - on) * (om + on)

    def w(self, om):
        # z'/(z + i lam) = 2 cos(rho) omega S / ((conj(e) - i lam)(omega^2 - omega_lam^2))
        om = np.asarray(om, dtype=complex)
        _, fl, _ = self._sq_factors(om)
        with np.errstate(divide="ignore", invalid="ignore"):
            return 2.0 * self.cos_rho * om * self._root_factor(om) / (self.k_lam * fl)

    def gauss(self, om):
        return self.c * self.w(om)

    def phi(self, om):
        """Weierstrass form per d omega.

        With z - x, z + conj(x) and z + i lam written as
        k (omega^2 - omega_e^2) / (1 - omega^2), the height differential becomes
        dh = 4 cos(rho) omega d omega / (k_x k_m (omega^2 - omega_x^2)(omega^2 - omega_m^2)),
        regular at omega = +-1, and every pole appears as an explicit factor.
        """
        om = np.asarray(om, dtype=complex)
        fx, fl, fm = self._sq_factors(om)
        s = self._root_factor(om)
        base = 4.0 * self.cos_rho / (self.k_x * self.k_m * fx * fm)
        dh = base * om
        g_dh = self.c * 2.0 * self.cos_rho * om * s / (self.k_lam * fl) * dh
        dh_over_g = self.k_lam * fl / (2.0 * self.c * self.cos_rho * s) * base
        return _weierstrass(g_dh, dh_over_g, dh)

    def boundary_tag(self, om) -> np.ndarray:
        """Tags for points of the unit circle, from t = Im z."""
        om = np.asarray(om, dtype=complex)
        tags = np.full(om.shape, "segment_l2", dtype="<U16")
        near_b = np.minimum(np.abs(om - 1), np.abs(om + 1)) < 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            t = self.z(om).imag
        neg = (t < 0) & ~near_b
        tags[neg & (-t < self.params.lam)] = "line_l1"
        tags[neg & (-t > self.params.lam)] = "line_l1_prime"
        return tags


class CostaChart(DiskChart):
    """Costa data g = mu z', dh = dz/(z^2 - 1) on z'^2 = i z (z^2 - 1).

    ``side = +1`` covers Re z >= 0 with z = (1 + omega^2)/(1 - omega^2);
    ``side = -1`` covers Re z <= 0 with z = -(1 + omega^2)/(1 - omega^2).
    The catenoid end z = side sits at omega = 0 and the planar end at omega = +-1.
    """

    def __init__(self, mu: float, side: int = 1, r_min: float = 0.02):
        if not mu > 0:
            raise ValueError(f"mu must be positive, got {mu}")
        if side not in (1, -1):
            raise ValueError("side must be +1 or -1")
        self.mu, self.side = float(mu), side
        # z' = F * 2 omega sqrt(zeta) / (1 - omega^2)
        self.factor = _SQRT_PLUS_I if side == 1 else 1j * _SQRT_PLUS_I
        self.alpha = 0.0
        self.slit_radius = 0.0
        self.r_min = float(r_min)
        self.basepoint = 1j
        self.corners = (1j, -1j)
        self.removed = (1.0 + 0j, -1.0 + 0j)
        self.singular = self.removed + self.corners + (0j,)
        self.radial_breaks = ()
        self.angular_breaks = (math.pi / 2,)

    def zeta(self, om):
        om = np.asarray(om, dtype=complex)
        q = om * om
        with np.errstate(divide="ignore", invalid="ignore"):
            return (1.0 + q) / (1.0 - q)

    def z(self, om):
        return self.side * self.zeta(om)

    def torus_poly(self, z):
        return 1j * z * (z * z - 1.0)

    def zprime(self, om):
        om = np.asarray(om, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.factor * 2.0 * om * np.sqrt(self.zeta(om)) / (1.0 - om * om)

    def gauss(self, om):
        return self.mu * self.zprime(om)

    def phi(self, om):
        om = np.asarray(om, dtype=complex)
        q = 1.0 - om * om
        sq = np.sqrt(self.zeta(om))
        dh = self.side / om
        g_dh = self.side * self.mu * self.factor * 2.0 * sq / q
        dh_over_g = self.side * q / (self.mu * self.factor * 2.0 * sq * om * om)
        return _weierstrass(g_dh, dh_over_g, dh)

    def boundary_tag(self, om) -> np.ndarray:
        """x1-parallel lines come from Im z < 0 (right chart) and x2-parallel from Im z > 0."""
        om = np.asarray(om, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = self.z(om).imag
        near_end = np.minimum(np.abs(om - 1), np.abs(om + 1)) < 1e-12
        zp = self.zprime(om)
        # on the axis g is real on x2-lines and imaginary on x1-lines
        real_g = np.abs(zp.imag) <= np.abs(zp.real)
        tags = np.where(real_g, "line_x2", "line_x1").astype("<U16")
        tags[near_end] = "end_cut"
        tags[np.abs(t) < 1e-14] = "line_x1"
        return tags
