"""Independent high-precision reference values (mpmath), used only by the tests."""

from __future__ import annotations

import mpmath as mp


def _setup(s, lam, a, b, dps):
    mp.mp.dps = dps
    return mp.mpf(s), mp.mpf(lam), mp.mpf(a), mp.mpf(b)


def ends(s, lam, r, dps=40):
    """Roots of the w-cubic by mpmath polyroots: returns (a, b, y)."""
    mp.mp.dps = dps
    s, lam, r = mp.mpf(s), mp.mpf(lam), mp.mpf(r)
    R = -2 * s - r * r
    sig = 1 - 2 * lam * r * r
    tau = -lam * lam * r * r
    roots = mp.polyroots([1, R, sig, tau], maxsteps=200, extraprec=200)
    real = [x for x in roots if abs(mp.im(x)) < mp.mpf(10) ** (-dps // 2)]
    cplx = [x for x in roots if abs(mp.im(x)) >= mp.mpf(10) ** (-dps // 2)]
    y = mp.re(real[0])
    w = cplx[0]
    return abs(mp.im(w)), mp.re(w), y


def y_bisection(s, lam, r, steps=200, dps=60):
    mp.mp.dps = dps
    s, lam, r = mp.mpf(s), mp.mpf(lam), mp.mpf(r)
    g = lambda y: y * (y * y - 2 * y * s + 1) / (y + lam) ** 2 - r * r
    lo, hi = mp.mpf(0), mp.mpf(1)
    while g(hi) < 0:
        hi *= 2
    for _ in range(steps):
        mid = (lo + hi) / 2
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def J1(s, lam, a, b, dps=30):
    s, lam, a, b = _setup(s, lam, a, b, dps)
    ft = lambda t: mp.sqrt(t * (t * t + 1 - 2 * t * s))
    return mp.quad(lambda t: (t + lam) / (ft(t) * ((t - b) ** 2 + a * a)), [0, 1, lam, mp.inf])


def J2(s, lam, a, b, dps=30):
    s, lam, a, b = _setup(s, lam, a, b, dps)
    ft = lambda t: mp.sqrt(t * (t * t + 1 - 2 * t * s))
    return mp.quad(lambda t: ft(t) / ((t + lam) * ((t - b) ** 2 + a * a)), [0, 1, lam, mp.inf])


def I1(s, lam, a, b, dps=30):
    s, lam, a, b = _setup(s, lam, a, b, dps)
    fv = lambda t: mp.sqrt(t * (t * t + 1 + 2 * t * s))
    return mp.quad(lambda t: (lam - t) / (fv(t) * ((t + b) ** 2 + a * a)), [0, 1, lam, mp.inf])


def I2(s, lam, a, b, dps=30):
    """Principal value by subtracting the pole on [0, 2 lam]."""
    s, lam, a, b = _setup(s, lam, a, b, dps)
    F = lambda t: mp.sqrt(t * (t * t + 1 + 2 * t * s)) / ((t + b) ** 2 + a * a)
    Fl = F(lam)
    head = mp.quad(lambda t: (F(t) - Fl) / (t - lam), [0, min(1, lam), lam, 2 * lam])
    tail = mp.quad(lambda t: F(t) / (t - lam), [2 * lam, mp.inf])
    return head + tail


def balance_values(s, lam, r, dps=30):
    """(c1, c2, c3, c3~) at high precision."""
    a, b, _ = ends(s, lam, r, dps + 10)
    mp.mp.dps = dps
    s_, lam_, r_ = mp.mpf(s), mp.mpf(lam), mp.mpf(r)
    fl = mp.sqrt(lam_ * (lam_ ** 2 + 1 + 2 * lam_ * s_))
    K = (lam_ + b) ** 2 + a * a
    c1 = 1 / (2 * a * fl * r_ / K - r_ * r_)
    j1, j2 = J1(s, lam, a, b, dps), J2(s, lam, a, b, dps)
    i1, i2 = I1(s, lam, a, b, dps), I2(s, lam, a, b, dps)
    c3 = j1 / (mp.pi * fl / K - j2)
    c3t = (mp.pi - 2 * a * j1 * r_) / (r_ * (2 * a * j2 - mp.pi * r_))
    return c1, i1 / i2, c3, c3t


def loop_period(rho, lam, x, c, centre, delta=1e-3, n=10_000):
    """Re of the integral of the Weierstrass form around a small circle, by trapezoid.

    Works directly in z with g = c z'/(z + i lam) and dh = dz/((z - x)(z + conj x)).
    The branch of z' is fixed by continuity from its value at the centre.
    """
    import numpy as np

    e = np.exp(1j * rho)
    th = 2 * np.pi * np.arange(n) / n
    z = centre + delta * np.exp(1j * th)
    dz = 1j * delta * np.exp(1j * th) * (2 * np.pi / n)
    poly = lambda w: -1j * w * (w - e) * (w + np.conj(e))
    p0 = poly(centre)
    zp = np.sqrt(p0) * np.sqrt(poly(z) / p0)
    g = c * zp / (z + 1j * lam)
    dh = dz / ((z - x) * (z + np.conj(x)))
    phi = np.array([0.5 * (1 / g - g), 0.5j * (1 / g + g), np.ones_like(g)]) * dh
    return phi.sum(axis=1).real
