"""Polar grids on disk charts and edge-wise integration of the immersion.

The grid lives in the rotated frame nu = omega e^{-i alpha}.  Radii and angles
are Chebyshev-clustered between breakpoints, so the nodes pile up at ends,
corners and the slit tips; counts are scaled by 2**refine, which keeps every
coarse vertex present in the finer grids.  The upper (0 <= theta <= pi) and
lower (pi <= theta <= 2 pi) half disks are glued along the diameter outside
the slit; on the slit the diameter vertices are duplicated so the two lifts of
the cut can carry different immersion values.

The immersion is accumulated along a breadth-first spanning tree rooted at the
basepoint.  Each tree edge is integrated with composite Gauss-Legendre rules;
edges ending at a corner use t = 1 - (1 - u)^2 to absorb the inverse square
root, and edges passing close to a singular point are subdivided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components
from scipy.spatial import cKDTree

from .chart import DiskChart

BOUNDARY_TAGS = ("interior", "line_l1", "line_l1_prime", "segment_l2", "end_cut", "line_x1", "line_x2")
_MAX_SUBDIVISION = 256


class MeshError(RuntimeError):
    """Raised when integration or assembly of a mesh is inconsistent."""


@dataclass(frozen=True)
class MeshConfig:
    """Grid density and integration settings.

    ``n_radial`` and ``n_angular`` are the node counts across the radius and
    across each half disk before refinement.  ``eps_end`` is the excision radius
    around ends measured in z.
    """

    n_radial: int = 64
    n_angular: int = 64
    refine: int = 0
    eps_end: float = 1e-3
    gauss_points: int = 16
    closure_tol: float = 1e-8

    def __post_init__(self) -> None:
        if self.n_radial < 2 or self.n_angular < 4:
            raise ValueError("grid needs at least 2 radial and 4 angular nodes")
        if self.refine < 0:
            raise ValueError("refine must be nonnegative")
        if not self.eps_end > 0:
            raise ValueError("eps_end must be positive")

    def to_dict(self) -> dict:
        return {
            "n_radial": self.n_radial,
            "n_angular": self.n_angular,
            "refine": self.refine,
            "eps_end": self.eps_end,
            "gauss_points": self.gauss_points,
        }


@dataclass
class SurfaceMesh:
    """A triangulated immersed piece.

    ``omega`` keeps the chart coordinate of each vertex and ``z`` its image on
    the sphere; ``gauss`` is the stereographic Gauss map and ``sheet`` the
    branch of z' relative to the principal square root.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    gauss: np.ndarray
    sheet: np.ndarray
    boundary_tag: np.ndarray
    period: np.ndarray
    omega: np.ndarray | None = None
    z: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def scale(self) -> float:
        """Bounding-box diagonal."""
        if len(self.vertices) == 0:
            return 0.0
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    def edges(self) -> np.ndarray:
        return unique_edges(self.triangles)

    def triangle_areas(self) -> np.ndarray:
        P = self.vertices
        T = self.triangles
        return 0.5 * np.linalg.norm(np.cross(P[T[:, 1]] - P[T[:, 0]], P[T[:, 2]] - P[T[:, 0]]), axis=1)

    def tagged(self, tag: str) -> np.ndarray:
        return np.flatnonzero(self.boundary_tag == tag)


def unique_edges(triangles: np.ndarray) -> np.ndarray:
    T = np.asarray(triangles)
    if len(T) == 0:
        return np.zeros((0, 2), dtype=int)
    E = np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]])
    return np.unique(np.sort(E, axis=1), axis=0)


def chebyshev_nodes(a: float, b: float, n: int) -> np.ndarray:
    k = np.arange(n + 1)
    return a + (b - a) * (1.0 - np.cos(np.pi * k / n)) / 2.0


def graded_nodes(breaks, base: int, factor: int) -> np.ndarray:
    """Chebyshev nodes on each sub-interval; counts proportional to length."""
    breaks = list(breaks)
    total = breaks[-1] - breaks[0]
    out = [breaks[0]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = max(2, int(round(base * (b - a) / total))) * factor
        out.extend(chebyshev_nodes(a, b, n)[1:])
    return np.array(out)


@dataclass
class PolarGrid:
    """Vertices (in omega), triangles and slit bookkeeping of one chart grid."""

    omega: np.ndarray
    triangles: np.ndarray
    slit_pairs: np.ndarray  # (k, 2) upper/lower copies of duplicated diameter vertices
    inner_ring: np.ndarray  # vertices on the inner circle of an annulus grid


def build_polar_grid(chart: DiskChart, cfg: MeshConfig) -> PolarGrid:
    factor = 2**cfg.refine
    rad_breaks = sorted({chart.r_min, 1.0, *[b for b in chart.radial_breaks if chart.r_min < b < 1.0]})
    radii = graded_nodes(rad_breaks, cfg.n_radial, factor)
    ang = sorted({0.0, math.pi, *[t for t in chart.angular_breaks if 0.0 < t < math.pi]})
    upper = graded_nodes(ang, cfg.n_angular, factor)
    rot = complex(math.cos(chart.alpha), math.sin(chart.alpha))
    slit = chart.slit_radius

    verts: list[complex] = []
    index: dict = {}

    def vid(key, nu):
        if key not in index:
            index[key] = len(verts)
            verts.append(nu * rot)
        return index[key]

    tris = []
    n_t = len(upper)
    for half, thetas in (("u", upper), ("l", upper + math.pi)):
        grid = np.empty((len(radii), n_t), dtype=int)
        for i, r in enumerate(radii):
            for j, t in enumerate(thetas):
                nu = r * complex(math.cos(t), math.sin(t))
                on_diam = j == 0 or j == n_t - 1
                # diameter end: +1 at theta = 0 (or 2 pi), -1 at theta = pi
                side = 1 if (half == "u" and j == 0) or (half == "l" and j == n_t - 1) else -1
                if r == 0.0:
                    key = ("c", half) if slit > 0 else ("c",)
                elif on_diam and slit > 0 and r <= slit * (1 + 1e-12):
                    key = ("s", half, i, side)
                elif on_diam:
                    key = ("d", i, side)
                else:
                    key = (half, i, j)
                grid[i, j] = vid(key, nu)
        for i in range(len(radii) - 1):
            for j in range(n_t - 1):
                a, b, c, d = grid[i, j], grid[i + 1, j], grid[i + 1, j + 1], grid[i, j + 1]
                if radii[i] == 0.0:
                    tris.append((a, b, c))
                else:
                    tris.append((a, b, c))
                    tris.append((a, c, d))
    pairs = []
    for key, v in index.items():
        if key[0] == "s" and key[1] == "u":
            pairs.append((v, index[("s", "l", key[2], key[3])]))
        if key[0] == "c" and len(key) == 2 and key[1] == "u":
            pairs.append((v, index[("c", "l")]))
    omega = np.array(verts, dtype=complex)
    inner = np.flatnonzero(np.abs(np.abs(omega) - chart.r_min) < 1e-14) if chart.r_min > 0 else np.zeros(0, int)
    return PolarGrid(omega, np.array(tris, dtype=int), np.array(pairs, dtype=int).reshape(-1, 2), inner)


def _segment_distance(a: np.ndarray, b: np.ndarray, p: complex) -> np.ndarray:
    d = b - a
    L2 = np.maximum((d * d.conjugate()).real, 1e-300)
    t = np.clip(((p - a) * d.conjugate()).real / L2, 0.0, 1.0)
    return np.abs(a + t * d - p)


class EdgeIntegrator:
    """Integrates phi along straight omega-segments."""

    def __init__(self, chart: DiskChart, n_gauss: int = 16):
        self.chart = chart
        x, w = np.polynomial.legendre.leggauss(n_gauss)
        self.u = (x + 1.0) / 2.0
        self.wu = w / 2.0

    def _subdivisions(self, a, b, skip_a, skip_b) -> np.ndarray:
        length = np.abs(b - a)
        dmin = np.full(len(a), np.inf)
        for p in self.chart.singular:
            d = _segment_distance(a, b, p)
            touching = (np.abs(a - p) < 1e-13) & skip_a | (np.abs(b - p) < 1e-13) & skip_b
            dmin = np.where(touching, dmin, np.minimum(dmin, d))
        if np.any(dmin < 1e-13):
            k = int(np.argmin(dmin))
            raise MeshError(f"edge {k} from {a[k]:.6g} to {b[k]:.6g} passes through an excised end")
        n = np.ceil(2.0 * length / dmin)
        return np.clip(n, 1, _MAX_SUBDIVISION).astype(int)

    def integrate(self, a: np.ndarray, b: np.ndarray, corner_b: np.ndarray, check_sheet: bool = False) -> np.ndarray:
        """Re-part-free integrals of phi from a to b, shape (3, n) complex.

        ``corner_b`` marks edges whose end point b is a corner.
        """
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        out = np.zeros((3, len(a)), dtype=complex)
        if len(a) == 0:
            return out
        nsub = self._subdivisions(a, b, np.zeros(len(a), bool), corner_b)
        for n in np.unique(nsub):
            sel = np.flatnonzero(nsub == n)
            # composite nodes on [0, 1] in the substitution variable
            u = ((np.arange(n)[:, None] + self.u[None, :]) / n).ravel()
            wu = np.tile(self.wu, n) / n
            cb = corner_b[sel][:, None]
            t = np.where(cb, 1.0 - (1.0 - u) ** 2, u)
            jac = np.where(cb, 2.0 * (1.0 - u), 1.0)
            d = (b[sel] - a[sel])[:, None]
            om = a[sel][:, None] + d * t
            vals = self.chart.phi(om.ravel()).reshape(3, len(sel), -1)
            out[:, sel] = (vals * (wu * jac * d)[None]).sum(axis=2)
            if check_sheet:
                self._audit_sheet(om, sel)
        return out

    def _audit_sheet(self, om: np.ndarray, sel: np.ndarray) -> None:
        w = self.chart.w(om.ravel()).reshape(om.shape)
        w0, w1 = w[:, :-1], w[:, 1:]
        with np.errstate(invalid="ignore"):
            jump = np.abs(w1 - w0)
            bad = (jump > 0.5 * np.maximum(np.abs(w0), np.abs(w1))) & (np.abs(w1 + w0) < jump)
        if np.any(bad):
            k = int(np.flatnonzero(bad.any(axis=1))[0])
            raise MeshError(
                f"sheet-tracking inconsistency on edge {int(sel[k])}: w changes sign between "
                f"omega={om[k, 0]:.6g} and omega={om[k, -1]:.6g}"
            )


@dataclass
class Immersion:
    """Integrated vertex positions plus audit data."""

    X: np.ndarray
    closure_residual: float
    scale: float
    tree_edges: int
    edges: int


def _is_corner(chart: DiskChart, om: np.ndarray) -> np.ndarray:
    mask = np.zeros(len(om), bool)
    for p in chart.corners:
        mask |= np.abs(om - p) < 1e-13
    return mask


def _oriented_integrals(integ: EdgeIntegrator, om: np.ndarray, corner: np.ndarray, i: np.ndarray, j: np.ndarray, check_sheet: bool) -> np.ndarray:
    """Real parts of the integrals from vertex i to vertex j, shape (n, 3)."""
    flip = corner[i] & ~corner[j]
    both = corner[i] & corner[j]
    if np.any(both):
        raise MeshError("an edge joins two corners; refine the grid")
    start = np.where(flip, j, i)
    stop = np.where(flip, i, j)
    vals = integ.integrate(om[start], om[stop], corner[stop], check_sheet=check_sheet).real.T
    return np.where(flip[:, None], -vals, vals)


def integrate_immersion(chart: DiskChart, omega: np.ndarray, triangles: np.ndarray, cfg: MeshConfig, base: int) -> Immersion:
    """Accumulate X = Re int phi over a spanning tree and audit every cycle."""
    n = len(omega)
    E = unique_edges(triangles)
    G = coo_matrix((np.ones(len(E)), (E[:, 0], E[:, 1])), shape=(n, n)).tocsr()
    G = G + G.T
    ncomp, labels = connected_components(G, directed=False)
    used = np.zeros(n, bool)
    used[np.unique(triangles)] = True
    if len(np.unique(labels[used])) > 1:
        raise MeshError(f"mesh graph has {ncomp} components")
    order, pred = breadth_first_order(G, base, directed=False)
    integ = EdgeIntegrator(chart, cfg.gauss_points)
    corner = _is_corner(chart, omega)
    child = order[1:]
    parent = pred[child]
    d = _oriented_integrals(integ, omega, corner, parent, child, check_sheet=True)
    X = np.full((n, 3), np.nan)
    X[base] = 0.0
    pos = np.empty(n, dtype=int)
    pos[child] = np.arange(len(child))
    for v in child:
        X[v] = X[pred[v]] + d[pos[v]]
    # cycle audit on the remaining edges
    in_tree = set(zip(np.minimum(parent, child).tolist(), np.maximum(parent, child).tolist()))
    rest = np.array([e for e in map(tuple, E.tolist()) if e not in in_tree], dtype=int).reshape(-1, 2)
    scale = float(np.linalg.norm(np.nanmax(X, axis=0) - np.nanmin(X, axis=0)))
    residual = 0.0
    if len(rest):
        dr = _oriented_integrals(integ, omega, corner, rest[:, 0], rest[:, 1], check_sheet=False)
        residual = float(np.max(np.linalg.norm(X[rest[:, 1]] - X[rest[:, 0]] - dr, axis=1)))
    return Immersion(X, residual, scale, len(child), len(E))


def compact(omega: np.ndarray, triangles: np.ndarray, keep: np.ndarray):
    """Drop removed vertices and the triangles touching them; return the index map."""
    tri = triangles[keep[triangles].all(axis=1)]
    used = np.zeros(len(omega), bool)
    used[np.unique(tri)] = True
    new_index = np.full(len(omega), -1)
    new_index[used] = np.arange(used.sum())
    return new_index, new_index[tri], used


def mean_curvature(mesh: SurfaceMesh) -> np.ndarray:
    """Cotangent-Laplacian mean curvature |H| per vertex (nan on boundary vertices)."""
    P = mesh.vertices
    T = mesh.triangles
    n = len(P)
    lap = np.zeros((n, 3))
    area = np.zeros(n)
    for k in range(3):
        i, j, l = T[:, k], T[:, (k + 1) % 3], T[:, (k + 2) % 3]
        u = P[j] - P[i]
        v = P[l] - P[i]
        cr = np.linalg.norm(np.cross(u, v), axis=1)
        cot = (u * v).sum(axis=1) / cr
        np.add.at(lap, j, 0.5 * cot[:, None] * (P[l] - P[j]))
        np.add.at(lap, l, 0.5 * cot[:, None] * (P[j] - P[l]))
        np.add.at(area, i, cr / 6.0)
    H = np.linalg.norm(lap, axis=1) / (2.0 * np.maximum(area, 1e-300))
    H[mesh.boundary_tag != "interior"] = np.nan
    H[_boundary_vertices(T, n)] = np.nan
    return H


def _boundary_vertices(T: np.ndarray, n: int) -> np.ndarray:
    E = np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]])
    E = np.sort(E, axis=1)
    uniq, counts = np.unique(E, axis=0, return_counts=True)
    mask = np.zeros(n, bool)
    mask[uniq[counts == 1].ravel()] = True
    return mask


def metric_check(
    mesh: SurfaceMesh, chart: DiskChart, max_edges: int = 2000, n_gauss: int = 16, clearance: float = 5.0
) -> dict:
    """Compare chord lengths with the arc length of ds = (|g| + 1/|g|)|dh|/2 on sampled edges.

    Sampled edges are interior and stay ``clearance`` edge lengths away from
    ends and corners, where the metric itself blows up or vanishes.  The chord
    never exceeds the arc, so the relative difference measures the
    discretisation error.
    """
    if mesh.omega is None:
        raise ValueError("mesh carries no chart coordinates")
    E = mesh.edges()
    interior = mesh.boundary_tag == "interior"
    E = E[interior[E].all(axis=1)]
    a0, b0 = mesh.omega[E[:, 0]], mesh.omega[E[:, 1]]
    far = np.ones(len(E), bool)
    for p in chart.singular:
        far &= _segment_distance(a0, b0, p) > clearance * np.abs(b0 - a0)
    E = E[far]
    if len(E) == 0:
        return {"edges": 0, "max_rel_diff": math.nan, "median_rel_diff": math.nan}
    step = max(1, len(E) // max_edges)
    E = E[::step]
    x, w = np.polynomial.legendre.leggauss(n_gauss)
    u, wu = (x + 1) / 2, w / 2
    a = mesh.omega[E[:, 0]][:, None]
    b = mesh.omega[E[:, 1]][:, None]
    om = (a + (b - a) * u[None]).ravel()
    phi3 = chart.phi(om)[2].reshape(len(E), -1)
    g = np.abs(chart.gauss(om)).reshape(len(E), -1)
    ds = 0.5 * (g + 1.0 / g) * np.abs(phi3)
    arc = (ds * wu[None]).sum(axis=1) * np.abs(b - a).ravel()
    chord = np.linalg.norm(mesh.vertices[E[:, 1]] - mesh.vertices[E[:, 0]], axis=1)
    rel = np.abs(arc - chord) / arc
    return {"edges": int(len(E)), "max_rel_diff": float(rel.max()), "median_rel_diff": float(np.median(rel))}


def weld(vertices: np.ndarray, triangles: np.ndarray, tol: float):
    """Merge vertices closer than tol; returns (vertices, triangles, index map, merged count)."""
    if len(vertices) == 0:
        return vertices, triangles, np.zeros(0, int), 0
    tree = cKDTree(vertices)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    parent = np.arange(len(vertices))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(vertices))])
    uniq, inverse = np.unique(roots, return_inverse=True)
    new_tri = inverse[triangles]
    keep = (new_tri[:, 0] != new_tri[:, 1]) & (new_tri[:, 1] != new_tri[:, 2]) & (new_tri[:, 0] != new_tri[:, 2])
    return vertices[uniq], new_tri[keep], inverse, int(len(vertices) - len(uniq))


def vertex_set_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Largest distance from a point of A to the nearest point of B."""
    if len(A) == 0:
        return 0.0
    d, _ = cKDTree(B).query(A)
    return float(d.max())
