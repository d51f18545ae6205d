"""ASCII OBJ / PLY export and re-import, plus the JSON metadata sidecar."""

from __future__ import annotations

import io
import json
import math
from pathlib import Path

import numpy as np

from .mesh import SurfaceMesh

FORMATS = ("obj", "ply")


def _fmt(x: float) -> str:
    return repr(float(x))


def export(mesh: SurfaceMesh, fmt: str = "obj") -> bytes:
    """Serialise vertices and triangles; PLY also carries |g| per vertex."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    V = np.asarray(mesh.vertices, dtype=float).reshape(-1, 3)
    T = np.asarray(mesh.triangles, dtype=np.int64).reshape(-1, 3)
    out = io.StringIO()
    if fmt == "obj":
        out.write(f"# scherk-costa mesh: {len(V)} vertices, {len(T)} triangles\n")
        for x, y, z in V:
            out.write(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}\n")
        for a, b, c in T + 1:
            out.write(f"f {a} {b} {c}\n")
    else:
        g = np.abs(np.asarray(mesh.gauss)) if len(mesh.gauss) == len(V) else np.full(len(V), math.nan)
        out.write("ply\nformat ascii 1.0\ncomment scherk-costa mesh\n")
        out.write(f"element vertex {len(V)}\n")
        out.write("property double x\nproperty double y\nproperty double z\nproperty double abs_g\n")
        out.write(f"element face {len(T)}\nproperty list uchar int vertex_indices\nend_header\n")
        for (x, y, z), gv in zip(V, g):
            out.write(f"{_fmt(x)} {_fmt(y)} {_fmt(z)} {_fmt(gv)}\n")
        for a, b, c in T:
            out.write(f"3 {a} {b} {c}\n")
    return out.getvalue().encode("ascii")


def read_obj(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    verts, faces = [], []
    for line in data.decode("ascii").splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(t) for t in parts[1:4]])
        elif parts[0] == "f":
            idx = [int(t.split("/")[0]) for t in parts[1:]]
            # fan-triangulate polygons
            for k in range(1, len(idx) - 1):
                faces.append([idx[0] - 1, idx[k] - 1, idx[k + 1] - 1])
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)


def read_ply(data: bytes) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(vertices, triangles, |g|) from an ASCII PLY written by :func:`export`."""
    lines = data.decode("ascii").splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ValueError("not a PLY stream")
    n_v = n_f = 0
    props: list[str] = []
    k = 1
    while lines[k].strip() != "end_header":
        parts = lines[k].split()
        if parts[:2] == ["element", "vertex"]:
            n_v = int(parts[2])
        elif parts[:2] == ["element", "face"]:
            n_f = int(parts[2])
        elif parts[0] == "property" and parts[1] != "list" and n_f == 0:
            props.append(parts[-1])
        k += 1
    body = lines[k + 1 :]
    rows = np.array([[float(t) for t in body[i].split()] for i in range(n_v)], dtype=float).reshape(n_v, len(props))
    V = rows[:, [props.index(c) for c in "xyz"]]
    g = rows[:, props.index("abs_g")] if "abs_g" in props else np.full(n_v, math.nan)
    faces = []
    for line in body[n_v : n_v + n_f]:
        idx = [int(t) for t in line.split()]
        faces.append(idx[1 : 1 + idx[0]])
    return V, np.array(faces, dtype=np.int64).reshape(-1, 3), g


def sidecar(mesh: SurfaceMesh) -> dict:
    """Metadata document: parameters, period, grid configuration and residuals."""

    def clean(v):
        if isinstance(v, dict):
            return {str(k): clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple, np.ndarray)):
            return [clean(x) for x in v]
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, (float, np.floating)):
            return float(v) if math.isfinite(v) else str(float(v))
        return v

    doc = clean(dict(mesh.metadata))
    doc["period"] = [float(x) for x in mesh.period]
    doc["n_vertices"] = int(len(mesh.vertices))
    doc["n_triangles"] = int(len(mesh.triangles))
    return doc


def write_mesh(mesh: SurfaceMesh, path: str | Path, fmt: str | None = None) -> tuple[Path, Path]:
    """Write the mesh (format from the suffix unless given) and ``<path>.json``."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    data = export(mesh, fmt)
    path.write_bytes(data)
    meta_path = path.with_suffix(path.suffix + ".json")
    meta_path.write_text(json.dumps(sidecar(mesh), indent=2, sort_keys=True) + "\n")
    return path, meta_path
