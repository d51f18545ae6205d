"""Shared fixtures and frozen reference values.

Every literal below was produced by the mpmath routines in ``oracles.py`` (or
by a 50-digit direct evaluation) and is independent of the package code.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from scherk_costa.param_algebra import GeometricParams, solve_end_cubic
from scherk_costa.solver import solve_periods
from scherk_costa.surface_mesh import MeshConfig, immerse

# rho (radians) -> (lambda*, lambda* r*, c*) from a 30-digit two-dimensional
# Newton solve of c1 = c2 = c3~ seeded by a coarse grid scan.
SOLUTIONS = {
    -0.002: (255.600238667539586900, 0.0286071700396322925, 71486.8309200081203),
    -0.005: (102.155848309332244377, 0.0453123890845674556, 11418.9077740169029),
    -0.009: (56.6900297034582261459, 0.0609397775231674343, 3516.38964385337214),
}

# 50-digit companion-matrix roots of the end cubic at sin(rho) = -0.005, lambda = 2, r = 0.15
ENDS_S005_L2_R015 = (0.957366839743477257133, -0.0427493901928854847618, 0.0979987803857709676501)

# (c1, c2, c3, c3~) at 30 digits
BALANCE_S05_L13_R02 = (4.06212645054347471084, 1.22474860876100941512, 5.19825600200447858476, 3.53842619431660827251)
BALANCE_S005_L10_R002 = (81.9581049795629554905, 104.133933306105434585, 116.559624460985137647, 74.7878893344549360292)

# closed-form Costa factor: mu0^2 = [Gamma(1/4) Gamma(-1/2) / Gamma(-1/4)] / B(3/4, 1/2)
MU0 = 1.04604962005310164895


def params_at(sin_rho: float, lam: float, r: float) -> GeometricParams:
    return GeometricParams(math.asin(sin_rho), lam, r)


def solved_params(rho: float) -> tuple[GeometricParams, float]:
    lam, cap_r, c_star = SOLUTIONS[rho]
    return GeometricParams.from_cap_r(rho, lam, cap_r), c_star


@pytest.fixture(scope="session")
def solved():
    """Solver output at rho = -0.005."""
    return solve_periods(-0.005)


@pytest.fixture(scope="session")
def sc_frozen():
    """(params, end, c) at the frozen rho = -0.005 solution."""
    p, c_star = solved_params(-0.005)
    return p, solve_end_cubic(p), math.sqrt(c_star)


@pytest.fixture(scope="session")
def sc_mesh(sc_frozen):
    p, end, c = sc_frozen
    return immerse(p, end, c, MeshConfig(n_radial=32, n_angular=32))


def core_mask(mesh, chart, clearance: float = 0.05, radius: float = 0.98) -> np.ndarray:
    """Vertices of a fixed compact part of the chart disk, away from ends and corners."""
    om = mesh.omega
    keep = np.abs(om) <= radius
    for p in chart.singular:
        keep &= np.abs(om - p) > clearance
    return keep


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
