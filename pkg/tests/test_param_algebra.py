import math

import numpy as np
import pytest

from conftest import ENDS_S005_L2_R015, params_at
from scherk_costa.param_algebra import (
    CubicError,
    GeometricParams,
    cubic_coefficients,
    cubic_residual,
    imaginary_root_y,
    r0,
    solve_end_cubic,
)


def test_params_validation():
    with pytest.raises(ValueError):
        GeometricParams(2.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        GeometricParams(-0.1, 0.0, 0.1)
    with pytest.raises(ValueError):
        GeometricParams(-0.1, 1.0, -0.1)
    p = GeometricParams.from_cap_r(-0.005, 4.0, 0.2)
    assert p.cap_r == pytest.approx(0.2, rel=1e-15)


def test_supported_region_flags():
    assert params_at(-0.005, 2.0, 0.1).in_supported_region()
    assert not params_at(-0.5, 2.0, 0.1).in_supported_region()
    assert not params_at(-0.005, 0.9, 0.1).in_supported_region()
    assert not params_at(-0.005, 2.0, 0.3).in_supported_region()


def test_r0_values():
    assert r0(0.0) == pytest.approx(math.sqrt(0.2 * 1.04) / 1.2, rel=1e-15)
    assert 0.38 < r0(math.asin(-0.01)) < 0.3808
    assert r0(math.asin(-0.005)) == pytest.approx(0.380423740350444246862, rel=1e-14)


def test_y_oracle_value():
    y = imaginary_root_y(params_at(-0.005, 1.3, 0.1))
    assert y == pytest.approx(0.0173457711269528336548, rel=1e-12)


def test_y_at_r0_is_y0():
    rho = math.asin(-0.01)
    assert imaginary_root_y(GeometricParams(rho, 1.0, r0(rho))) == pytest.approx(0.2, rel=1e-12)


def test_y_small_r():
    assert imaginary_root_y(params_at(-0.005, 3.0, 1e-9)) < 1e-15
    assert imaginary_root_y(params_at(-0.005, 3.0, 0.0)) == 0.0


def test_roots_against_companion_oracle():
    end = solve_end_cubic(params_at(-0.005, 2.0, 0.15))
    a, b, y = ENDS_S005_L2_R015
    assert end.a == pytest.approx(a, rel=1e-12)
    assert end.b == pytest.approx(b, rel=1e-11)
    assert end.y == pytest.approx(y, rel=1e-12)
    assert end.method == "cardano"


def test_r_zero_limit():
    rho = -0.3
    end = solve_end_cubic(GeometricParams(rho, 5.0, 0.0))
    assert (end.a, end.b, end.y) == (math.cos(rho), math.sin(rho), 0.0)


def test_corner_box():
    rho = math.asin(-0.01)
    end = solve_end_cubic(GeometricParams(rho, 1.0, r0(rho)))
    assert end.b >= -0.0375
    assert 0.849 <= end.a <= 1.03


@pytest.mark.parametrize("s,lam,r", [(-0.005, 2.0, 0.15), (-0.01, 1.0, 0.3), (-0.001, 50.0, 0.007), (-0.3, 0.9, 0.7)])
def test_roots_satisfy_cubic_and_symmetry(s, lam, r):
    p = params_at(s, lam, r)
    end = solve_end_cubic(p)
    scale = max(1.0, *map(abs, cubic_coefficients(p)), p.r**2 * p.lam**2)
    for z in end.roots:
        assert abs(cubic_residual(p, z)) <= 1e-12 * scale
    x, mirror, iy = end.roots
    assert mirror == -x.conjugate()
    assert iy.real == 0.0 and end.a > 0


def test_closed_form_relations():
    rng = np.random.default_rng(3)
    for _ in range(40):
        s = -rng.uniform(1e-4, 0.01)
        lam = rng.uniform(1.0, 100.0)
        p = params_at(s, lam, rng.uniform(1e-3, 1.0) * r0(math.asin(s)) / lam)
        e = solve_end_cubic(p)
        assert -2 * e.b == pytest.approx(e.y - p.r**2 - 2 * p.sin_rho, rel=1e-10)
        assert e.a**2 + e.b**2 == pytest.approx(p.lam**2 * p.r**2 / e.y, rel=1e-10)


@pytest.mark.parametrize("s", [-0.01, -0.005, -0.0005])
@pytest.mark.parametrize("lam", [1.0, 7.0, 100.0])
def test_y_and_b_monotone(s, lam):
    rho = math.asin(s)
    rs = np.arange(1e-4, r0(rho) / lam, 1e-4) if lam < 10 else np.linspace(1e-5, r0(rho) / lam, 300)
    ends = [solve_end_cubic(GeometricParams(rho, lam, r)) for r in rs]
    y = np.array([e.y for e in ends])
    b = np.array([e.b for e in ends])
    assert np.all(np.diff(y) > 0)
    assert np.all(y > rs**2 + 2 * s)
    assert np.all(np.diff(y) / np.diff(rs) > 2 * rs[:-1])
    assert np.all(np.diff(b) < 0)


def test_b_limits():
    rho = math.asin(-0.005)
    assert solve_end_cubic(GeometricParams(rho, 3.0, 0.0)).b == pytest.approx(-0.005, rel=1e-15)
    assert solve_end_cubic(GeometricParams(rho, 3.0, 1e3)).b == pytest.approx(-3.0, abs=1e-2)


def test_box_on_grid():
    for s in np.linspace(-0.01, -0.0005, 5):
        rho = math.asin(s)
        for lam in np.geomspace(1, 100, 5):
            for frac in (0.05, 0.3, 0.6, 0.9):
                e = solve_end_cubic(GeometricParams(rho, lam, frac * r0(rho) / lam))
                assert 0.8464 <= e.a <= 1.03
                assert e.b <= s


def test_outside_region_is_flagged_not_rejected():
    e = solve_end_cubic(params_at(-0.23, 0.92, 0.7))
    assert "outside_supported_region" in e.flags
    assert e.a > 0


def test_cubic_error_is_value_error():
    assert issubclass(CubicError, ValueError)
