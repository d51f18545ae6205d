"""Immersion, boundary-cycle gap and periodic replication of the Scherk-Costa piece."""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import cKDTree

from ..param_algebra import EndConfiguration, GeometricParams, solve_end_cubic
from ..quadrature import QuadratureConfig, integrate_adaptive
from .chart import ScherkCostaChart
from .mesh import (
    MeshConfig,
    MeshError,
    SurfaceMesh,
    build_polar_grid,
    compact,
    integrate_immersion,
)

ROT_X1 = np.diag([1.0, -1.0, -1.0])
LINE_TAGS = ("line_l1", "line_l1_prime", "segment_l2")


def _removal_mask(chart: ScherkCostaChart, omega: np.ndarray, cfg: MeshConfig) -> np.ndarray:
    removed = np.zeros(len(omega), bool)
    for p in chart.removed:
        removed |= np.abs(omega - p) < 1e-13
    with np.errstate(divide="ignore", invalid="ignore"):
        z = chart.z(omega)
    lam = chart.params.lam
    removed |= np.abs(z + 1j * lam) < cfg.eps_end
    # the side end sits next to the branch point e^{i rho}; never swallow it
    eps_x = min(cfg.eps_end, 0.25 * abs(chart.x - chart.e))
    removed |= np.abs(z - chart.x) < eps_x
    return removed


def _neighbours_of(mask: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    touch = mask[triangles].any(axis=1)
    out = np.zeros(len(mask), bool)
    out[np.unique(triangles[touch])] = True
    return out & ~mask


def immerse(
    params: GeometricParams,
    end: EndConfiguration | None,
    c: float,
    cfg: MeshConfig | None = None,
) -> SurfaceMesh:
    """Mesh of the two-sheeted half-plane piece with X(A) = 0 at z = 0.

    ``c`` is the Lopez-Ros factor itself (g = c w), not c^2.
    """
    cfg = cfg or MeshConfig()
    end = end if end is not None else solve_end_cubic(params)
    chart = ScherkCostaChart(params, end, c)
    grid = build_polar_grid(chart, cfg)
    removed = _removal_mask(chart, grid.omega, cfg)
    cut = _neighbours_of(removed, grid.triangles)
    new_index, tri, used = compact(grid.omega, grid.triangles, ~removed)
    omega = grid.omega[used]
    base = int(new_index[int(np.argmin(np.abs(grid.omega - chart.basepoint)))])
    if base < 0:
        raise MeshError("basepoint was excised")
    imm = integrate_immersion(chart, omega, tri, cfg, base)
    if not imm.closure_residual <= cfg.closure_tol * imm.scale:
        raise MeshError(
            f"cycle-closure residual {imm.closure_residual:.3e} exceeds "
            f"{cfg.closure_tol:.0e} x scale {imm.scale:.3e}"
        )

    on_circle = np.abs(np.abs(omega) - 1.0) < 1e-13
    tags = np.full(len(omega), "interior", dtype="<U16")
    tags[cut[used]] = "end_cut"
    tags[on_circle] = chart.boundary_tag(omega[on_circle])

    pairs = new_index[grid.slit_pairs]
    pairs = pairs[(pairs >= 0).all(axis=1)]
    X = imm.X
    jumps = X[pairs[:, 0]] - X[pairs[:, 1]] if len(pairs) else np.zeros((0, 3))
    period = jumps.mean(axis=0) if len(pairs) else np.zeros(3)
    spread = float(np.max(np.linalg.norm(jumps - period, axis=1))) if len(pairs) else 0.0

    with np.errstate(divide="ignore", invalid="ignore"):
        gauss = chart.gauss(omega)
        z = chart.z(omega)
    meta = {
        "kind": "scherk_costa",
        "rho": params.rho,
        "lambda": params.lam,
        "r": params.r,
        "c": float(c),
        "grid": cfg.to_dict(),
        "closure_residual": imm.closure_residual,
        "closure_residual_rel": imm.closure_residual / imm.scale,
        "period_spread": spread,
        "slit_pairs": pairs.tolist(),
        "basepoint": base,
    }
    return SurfaceMesh(X, tri, gauss, chart.sheet(omega), tags, period, omega, z, meta)


# --- boundary-cycle gap --------------------------------------------------------


def _arc_integral(chart: ScherkCostaChart, th0: float, th1: float, qcfg: QuadratureConfig) -> np.ndarray:
    out = np.zeros(3)
    for k in range(3):
        def fk(th, k=k):
            om = np.exp(1j * th)
            return chart.phi(om)[k] * (1j * om)

        out[k] = integrate_adaptive(fk, th0, th1, qcfg).value.real
    return out


def _indent_integral(chart: ScherkCostaChart, centre: complex, radius: float, psi0: float, psi1: float, qcfg: QuadratureConfig) -> np.ndarray:
    out = np.zeros(3)
    for k in range(3):
        def fk(psi, k=k):
            e = np.exp(1j * psi)
            return chart.phi(centre + radius * e)[k] * (1j * radius * e)

        out[k] = integrate_adaptive(fk, psi0, psi1, qcfg).value.real
    return out


def period_gap_vector(
    params: GeometricParams,
    end: EndConfiguration | None,
    c: float,
    delta: float = 1e-3,
    qcfg: QuadratureConfig | None = None,
    indentation: str = "inside",
) -> np.ndarray:
    """Re of the integral of phi along the boundary cycle through A, B and the middle end.

    The path runs along the unit circle of the disk chart from A = i e^{i rho}
    through B (omega = 1) to the other lift of A, bypassing the middle end on a
    circle whose radius corresponds to ``delta`` in z.  With the chart's branch
    of z' the cycle closes when the detour stays inside the disk (Re z > 0);
    ``indentation="outside"`` adds the full middle-end residue instead.
    """
    qcfg = qcfg or QuadratureConfig()
    end = end if end is not None else solve_end_cubic(params)
    chart = ScherkCostaChart(params, end, c)
    th_a = params.rho + math.pi / 2
    om_l = chart.omega_lam
    th_l = float(np.angle(om_l))
    q = 1.0 - om_l * om_l
    z_om = abs(4.0 * chart.cos_rho * om_l / (q * q))
    rad = delta / z_om
    half = 2.0 * math.asin(min(1.0, rad / 2.0))
    d_in = float(np.angle((om_l * np.exp(1j * half) - om_l) / om_l))
    d_out = float(np.angle((om_l * np.exp(-1j * half) - om_l) / om_l))
    if indentation == "inside":
        psi0, psi1 = th_l + d_in, th_l + d_out + 2 * math.pi
    elif indentation == "outside":
        psi0, psi1 = th_l + d_in, th_l + d_out
    else:
        raise ValueError("indentation must be 'inside' or 'outside'")
    total = _arc_integral(chart, th_a, 0.0, qcfg)
    total += _arc_integral(chart, 0.0, th_l + half, qcfg)
    total += _indent_integral(chart, om_l, rad, psi0, psi1, qcfg)
    total += _arc_integral(chart, th_l - half, th_a - math.pi, qcfg)
    return total


def period_gap(
    params: GeometricParams,
    end: EndConfiguration | None,
    c: float,
    delta: float = 1e-3,
    qcfg: QuadratureConfig | None = None,
    indentation: str = "inside",
) -> float:
    """Euclidean norm of the horizontal part of :func:`period_gap_vector`."""
    v = period_gap_vector(params, end, c, delta, qcfg, indentation)
    return float(math.hypot(v[0], v[1]))


# --- replication -----------------------------------------------------------------


def rotate_about_x1_line(points: np.ndarray, through: np.ndarray) -> np.ndarray:
    """180 degree rotation about the line through ``through`` parallel to x1."""
    through = np.asarray(through, dtype=float)
    return (np.asarray(points) - through) @ ROT_X1.T + through


def _lift_mask(mesh: SurfaceMesh, lift: int) -> np.ndarray:
    """Vertices closer to omega = +1 (lift +1) or to omega = -1 (lift -1)."""
    if mesh.omega is None:
        raise MeshError("mesh carries no chart coordinates")
    om = mesh.omega
    near_plus = np.abs(om - 1.0) < np.abs(om + 1.0)
    return near_plus if lift == 1 else ~near_plus


def line_through(mesh: SurfaceMesh, tag: str, lift: int = 1) -> np.ndarray:
    """A point on an x1-parallel boundary line (median of its tagged vertices on one lift)."""
    idx = np.flatnonzero((mesh.boundary_tag == tag) & _lift_mask(mesh, lift))
    if len(idx) == 0:
        raise MeshError(f"no vertices tagged {tag}")
    P = mesh.vertices[idx]
    return np.array([0.0, np.median(P[:, 1]), np.median(P[:, 2])])


def half_line_separation(mesh: SurfaceMesh, lift: int = 1) -> float:
    """Distance between the two x1-parallel half-lines at one lift of the middle end."""
    a = line_through(mesh, "line_l1", lift)
    b = line_through(mesh, "line_l1_prime", lift)
    return float(np.linalg.norm(a - b))


def replicate(mesh: SurfaceMesh, copies: int, weld_tol: float = 1e-9) -> SurfaceMesh:
    """The piece, its rotation about the x1-axis, and their translates by n p, |n| <= copies.

    Vertices from different blocks closer than ``weld_tol * scale`` are merged.
    Every line and slit vertex of the two central blocks must find a partner;
    otherwise the period is not closed and :class:`MeshError` is raised.
    """
    if copies < 0:
        raise ValueError("copies must be nonnegative")
    if copies == 0:
        return mesh
    p = np.asarray(mesh.period, dtype=float)
    scale = mesh.scale
    tol = weld_tol * scale
    nv = mesh.n_vertices
    blocks_v, blocks_t, blocks_g, block_id, tags = [], [], [], [], []
    for b, n in enumerate((n, rot) for n in range(-copies, copies + 1) for rot in (False, True)):
        shift, rot = n
        V = mesh.vertices @ ROT_X1.T if rot else mesh.vertices
        blocks_v.append(V + shift * p)
        blocks_t.append(mesh.triangles + b * nv)
        with np.errstate(divide="ignore", invalid="ignore"):
            blocks_g.append(1.0 / mesh.gauss if rot else mesh.gauss)
        block_id.append(np.full(nv, b))
        tags.append(mesh.boundary_tag)
    V = np.concatenate(blocks_v)
    T = np.concatenate(blocks_t)
    G = np.concatenate(blocks_g)
    B = np.concatenate(block_id)
    tags = np.concatenate(tags)

    # audit: boundary lines and slit lifts of the central pair must meet a partner
    slit = np.zeros(nv, bool)
    pairs = np.asarray(mesh.metadata.get("slit_pairs", []), dtype=int).reshape(-1, 2)
    slit[pairs.ravel()] = True
    need_local = np.isin(mesh.boundary_tag, LINE_TAGS) | slit
    central = [2 * copies, 2 * copies + 1]
    tree = cKDTree(V)
    for b in central:
        idx = np.flatnonzero(need_local) + b * nv
        nb = tree.query_ball_point(V[idx], r=max(tol, 1e-300))
        for k, cand in zip(idx, nb):
            others = [j for j in cand if B[j] != b]
            if not others:
                d, _ = _nearest_other(V, B, k)
                raise MeshError(
                    f"weld mismatch: vertex {k % nv} of block {b} has no partner within "
                    f"{tol:.3e} (nearest {d:.3e}); the period is not closed"
                )
    # merge only across blocks
    pairs_all = tree.query_pairs(tol, output_type="ndarray")
    pairs_all = pairs_all[B[pairs_all[:, 0]] != B[pairs_all[:, 1]]] if len(pairs_all) else pairs_all
    Vw, Tw, inverse, merged = _merge_pairs(V, T, pairs_all)
    Gw = np.empty(len(Vw), dtype=complex)
    Gw[inverse] = G
    tw = np.full(len(Vw), "interior", dtype="<U16")
    counts = np.bincount(inverse, minlength=len(Vw))
    tw[inverse] = tags
    tw[counts > 1] = "interior"
    tw[(counts > 1) & (np.bincount(inverse, weights=(tags == "end_cut"), minlength=len(Vw)) > 0)] = "end_cut"
    sheet = np.ones(len(Vw), dtype=np.int8)
    sheet[inverse] = np.concatenate([mesh.sheet] * (2 * (2 * copies + 1)))
    meta = dict(mesh.metadata)
    meta.pop("slit_pairs", None)
    meta.update({"copies": copies, "welded": merged, "weld_tol": tol})
    return SurfaceMesh(Vw, Tw, Gw, sheet, tw, p.copy(), None, None, meta)


def _nearest_other(V, B, k):
    d = np.linalg.norm(V - V[k], axis=1)
    d[B == B[k]] = np.inf
    j = int(np.argmin(d))
    return float(d[j]), j


def _merge_pairs(V: np.ndarray, T: np.ndarray, pairs: np.ndarray):
    parent = np.arange(len(V))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(V))])
    uniq, inverse = np.unique(roots, return_inverse=True)
    Tn = inverse[T]
    ok = (Tn[:, 0] != Tn[:, 1]) & (Tn[:, 1] != Tn[:, 2]) & (Tn[:, 0] != Tn[:, 2])
    return V[uniq], Tn[ok], inverse, int(len(V) - len(uniq))
