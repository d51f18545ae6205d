import math

import numpy as np
import pytest
from scipy.special import beta, gamma

from conftest import MU0
from scherk_costa.surface_mesh import (
    CostaError,
    CostaParams,
    MeshConfig,
    costa,
    costa_gap_vector,
    solve_mu0,
    symmetry_report,
)
from scherk_costa.surface_mesh.costa import SIGMA1, SIGMA2, SIGMA3, SIGMA4

GRID = MeshConfig(n_radial=24, n_angular=24)


@pytest.fixture(scope="module")
def closed():
    return costa(cfg=GRID)


def test_mu0_closed_form():
    closed_form = math.sqrt((0.5 * gamma(0.25) * gamma(-0.5) / gamma(-0.25)) / (0.5 * beta(0.75, 0.5)))
    assert closed_form == pytest.approx(MU0, rel=1e-14)
    assert solve_mu0() == pytest.approx(MU0, rel=1e-12)


def test_gap_vanishes_only_at_mu0():
    gap0 = np.linalg.norm(costa_gap_vector(MU0))
    assert gap0 < 1e-12
    for mu in (0.5, 0.9 * MU0, 1.5 * MU0, 3.0):
        assert np.linalg.norm(costa_gap_vector(mu)) > 1e-3
    assert costa_gap_vector(1.5 * MU0)[2] == 0.0


def test_closed_mesh(closed):
    meta = closed.metadata
    assert meta["piece"] == "closed"
    assert meta["closure_gap_rel"] < 1e-8
    assert meta["welded"] > 0
    assert CostaParams(meta["mu"], meta["mu0"]).closed


def test_symmetries(closed):
    report = symmetry_report(closed)
    assert set(report) == {"sigma1", "sigma2", "sigma3", "sigma4"}
    assert max(report.values()) < 1e-6


def test_symmetry_group_relations():
    assert np.array_equal(SIGMA2, SIGMA3 @ SIGMA1 @ SIGMA3)
    p = np.array([0.3, -1.7, 2.2])
    assert np.allclose(SIGMA1 @ p, [1.7, -0.3, 2.2])
    for s in (SIGMA1, SIGMA2, SIGMA3, SIGMA4):
        assert np.allclose(s @ s, np.eye(3))


def test_triangles_nondegenerate(closed):
    assert closed.triangle_areas().min() > 1e-14 * closed.scale**2


def test_open_half_costa():
    mesh = costa(1.5 * MU0, cfg=GRID)
    assert mesh.metadata["piece"] == "open_half_costa"
    assert mesh.metadata["closure_gap_rel"] > 1e-3
    assert not CostaParams(1.5 * MU0, MU0).closed
    rep = symmetry_report(mesh, ("sigma1", "sigma2"))
    assert max(rep.values()) < 1e-6


def test_half_piece_below_mu0():
    mesh = costa(0.8 * MU0, cfg=GRID)
    assert mesh.metadata["piece"] == "half_piece"


def test_invalid_mu():
    with pytest.raises(ValueError):
        costa(-1.0, cfg=GRID)


def test_costa_error_type():
    assert issubclass(CostaError, RuntimeError)
