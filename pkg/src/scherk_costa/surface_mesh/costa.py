"""Costa surface and open half-Costa pieces.

Costa's data on the torus z'^2 = i z (z^2 - 1) are g = mu z' and
dh = dz / (z^2 - 1).  The right half-plane piece is meshed in the chart
z = (1 + omega^2)/(1 - omega^2), where dh = d omega / omega; the catenoid end
z = 1 is the centre and the planar end z = infinity sits at omega = +-1.  The
imaginary z-axis maps onto the two horizontal lines through A = X(z = 0).

The torus closes exactly when both lifts omega = +-i of A meet in space; the
defining integral runs from i to -i around the centre, and mu0 is its unique
positive root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from ..quadrature import QuadratureConfig, integrate_adaptive
from .chart import CostaChart
from .mesh import (
    MeshConfig,
    MeshError,
    SurfaceMesh,
    build_polar_grid,
    compact,
    integrate_immersion,
    vertex_set_distance,
)
from .scherk import _merge_pairs

SIGMA1 = np.array([[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
SIGMA3 = np.diag([-1.0, 1.0, -1.0])
SIGMA4 = np.diag([1.0, -1.0, -1.0])
SIGMA2 = SIGMA3 @ SIGMA1 @ SIGMA3
SYMMETRIES = {"sigma1": SIGMA1, "sigma2": SIGMA2, "sigma3": SIGMA3, "sigma4": SIGMA4}

MU_SCAN = (1e-3, 1e3, 61)


class CostaError(RuntimeError):
    """Raised when the Costa period condition cannot be bracketed."""


@dataclass(frozen=True)
class CostaParams:
    mu: float
    mu0: float

    @property
    def closed(self) -> bool:
        return abs(self.mu - self.mu0) <= 1e-12 * self.mu0


def _path_integrals(qcfg: QuadratureConfig) -> tuple[complex, complex]:
    """(int g dh / mu, int mu dh / g) from omega = i to omega = -i around the centre."""
    chart = CostaChart(1.0)

    def split(om):
        ph = chart.phi(om)
        # phi1 - i phi2 = g dh and -(phi1 + i phi2) = dh / g when mu = 1
        return ph[0] - 1j * ph[1], -(ph[0] + 1j * ph[1])

    pieces = [
        (lambda t: 1j * (1.0 - 0.5 * t), lambda t: -0.5j, 0.0, 1.0),
        (lambda t: 0.5 * np.exp(1j * t), lambda t: 0.5j * np.exp(1j * t), math.pi / 2, -math.pi / 2),
        (lambda t: -1j * (0.5 + 0.5 * t), lambda t: -0.5j, 0.0, 1.0),
    ]
    G = H = 0j
    for path, deriv, a, b in pieces:
        for k in range(2):
            def fk(t, path=path, deriv=deriv, k=k):
                return split(path(t))[k] * deriv(t)

            val = integrate_adaptive(fk, a, b, qcfg).value
            if k == 0:
                G += val
            else:
                H += val
    return G, H


def costa_gap_vector(mu: float, qcfg: QuadratureConfig | None = None) -> np.ndarray:
    """X(-i) - X(i) in the right chart (the vertical part vanishes identically)."""
    G, H = _path_integrals(qcfg or QuadratureConfig())
    return _gap_from(mu, G, H)


def _gap_from(mu: float, G: complex, H: complex) -> np.ndarray:
    a = mu * G
    b = H / mu
    return np.array([0.5 * (a - b).real, (0.5j * (a + b)).real, 0.0])


def solve_mu0(qcfg: QuadratureConfig | None = None) -> float:
    """The unique positive mu closing the Costa periods.

    Scans mu geometrically for a sign change of a horizontal gap component and
    refines it with Brent's method.
    """
    G, H = _path_integrals(qcfg or QuadratureConfig())
    mus = np.geomspace(*MU_SCAN)
    for k in range(2):
        vals = np.array([_gap_from(m, G, H)[k] for m in mus])
        idx = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
        if len(idx):
            i = int(idx[0])
            mu0 = brentq(lambda m: _gap_from(m, G, H)[k], mus[i], mus[i + 1], xtol=1e-15, rtol=1e-15)
            other = _gap_from(mu0, G, H)
            if np.linalg.norm(other) > 1e-8 * (abs(mu0 * G) + abs(H / mu0)):
                raise CostaError(f"component {k} vanishes at mu={mu0} but the gap is {other}")
            return float(mu0)
    raise CostaError(f"no sign change of the Costa period on mu in [{MU_SCAN[0]}, {MU_SCAN[1]}]")


def _chart_piece(chart: CostaChart, cfg: MeshConfig):
    grid = build_polar_grid(chart, cfg)
    om = grid.omega
    with np.errstate(divide="ignore", invalid="ignore"):
        z = chart.z(om)
    removed = np.zeros(len(om), bool)
    for p in chart.removed:
        removed |= np.abs(om - p) < 1e-13
    removed |= ~(np.abs(z) < 1.0 / cfg.eps_end)
    touch = removed[grid.triangles].any(axis=1)
    cut = np.zeros(len(om), bool)
    cut[np.unique(grid.triangles[touch])] = True
    cut[grid.inner_ring] = True
    new_index, tri, used = compact(om, grid.triangles, ~removed)
    omega = om[used]
    base = int(new_index[int(np.argmin(np.abs(om - chart.basepoint)))])
    imm = integrate_immersion(chart, omega, tri, cfg, base)
    if not imm.closure_residual <= cfg.closure_tol * imm.scale:
        raise MeshError(f"cycle-closure residual {imm.closure_residual:.3e} too large")
    tags = np.full(len(omega), "interior", dtype="<U16")
    tags[cut[used]] = "end_cut"
    circ = np.abs(np.abs(omega) - 1.0) < 1e-13
    tags[circ] = chart.boundary_tag(omega[circ])
    with np.errstate(divide="ignore", invalid="ignore"):
        gauss = chart.gauss(omega)
        zz = chart.z(omega)
    return imm, omega, tri, tags, gauss, chart.sheet(omega), zz


def costa(mu: float | None = None, cfg: MeshConfig | None = None, qcfg: QuadratureConfig | None = None) -> SurfaceMesh:
    """Costa mesh at mu0 (solved when ``mu`` is None), else the right half-plane piece.

    For mu != mu0 the periods stay open and only the piece over Re z >= 0 is
    returned; for mu > mu0 this is the open half-Costa surface.  The open piece
    is translated along n = (1, 1, 0)/sqrt(2) until its vertex centroid is
    orthogonal to n; this keeps it invariant under sigma1 and sigma2 even though
    the horizontal period gap is nonzero.
    """
    cfg = cfg or MeshConfig()
    mu0 = solve_mu0(qcfg)
    mu = mu0 if mu is None else float(mu)
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    params = CostaParams(mu, mu0)
    r_min = math.sqrt(cfg.eps_end / 2.0)
    right = CostaChart(mu, 1, r_min)
    imm, om, tri, tags, gauss, sheet, z = _chart_piece(right, cfg)
    X = imm.X
    a_lifts = [int(np.argmin(np.abs(om - p))) for p in (1j, -1j)]
    gap = float(np.linalg.norm(X[a_lifts[1]] - X[a_lifts[0]]))
    meta = {
        "kind": "costa",
        "mu": mu,
        "mu0": mu0,
        "grid": cfg.to_dict(),
        "closure_gap": gap,
        "closure_gap_rel": gap / imm.scale,
        "closure_residual": imm.closure_residual,
    }
    if not params.closed:
        # slide along the sigma2 mirror until sigma1 is a symmetry as well
        n1 = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
        shift = -float(X.mean(axis=0) @ n1) * n1
        meta["piece"] = "open_half_costa" if mu > mu0 else "half_piece"
        meta["offset"] = shift.tolist()
        return SurfaceMesh(X + shift, tri, gauss, sheet, tags, np.zeros(3), om, z, meta)

    left = CostaChart(mu, -1, r_min)
    imm_l, om_l, tri_l, tags_l, gauss_l, sheet_l, z_l = _chart_piece(left, cfg)
    V = np.concatenate([X, imm_l.X])
    T = np.concatenate([tri, tri_l + len(X)])
    block = np.concatenate([np.zeros(len(X), int), np.ones(len(imm_l.X), int)])
    scale = float(np.linalg.norm(V.max(axis=0) - V.min(axis=0)))
    tol = 1e-9 * scale
    tree = cKDTree(V)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    pairs = pairs[block[pairs[:, 0]] != block[pairs[:, 1]]] if len(pairs) else pairs
    line_mask = np.isin(np.concatenate([tags, tags_l]), ("line_x1", "line_x2"))
    matched = np.zeros(len(V), bool)
    matched[pairs.ravel()] = True
    unmatched = np.flatnonzero(line_mask & ~matched)
    if len(unmatched):
        d, _ = cKDTree(V[block != block[unmatched[0]]]).query(V[unmatched[0]])
        raise MeshError(f"Costa halves do not meet along the lines: {len(unmatched)} unmatched vertices (nearest {d:.3e})")
    Vw, Tw, inverse, merged = _merge_pairs(V, T, pairs)
    n = len(Vw)
    tw = np.full(n, "interior", dtype="<U16")
    all_tags = np.concatenate([tags, tags_l])
    tw[inverse] = all_tags
    counts = np.bincount(inverse, minlength=n)
    tw[(counts > 1) & ~np.isin(tw, ("end_cut",))] = "interior"
    gw = np.empty(n, dtype=complex)
    gw[inverse] = np.concatenate([gauss, gauss_l])
    sw = np.ones(n, dtype=np.int8)
    sw[inverse] = np.concatenate([sheet, sheet_l])
    zw = np.empty(n, dtype=complex)
    zw[inverse] = np.concatenate([z, z_l])
    meta.update({"piece": "closed", "welded": merged, "closure_residual_left": imm_l.closure_residual})
    return SurfaceMesh(Vw, Tw, gw, sw, tw, np.zeros(3), None, zw, meta)


def symmetry_report(mesh: SurfaceMesh, names=("sigma1", "sigma2", "sigma3", "sigma4")) -> dict[str, float]:
    """Hausdorff-type distance between sigma(V) and V, relative to the mesh scale."""
    V = mesh.vertices
    scale = mesh.scale
    return {k: vertex_set_distance(V @ SYMMETRIES[k].T, V) / scale for k in names}
