import json

import numpy as np
import pytest

from scherk_costa.surface_mesh import SurfaceMesh, export, read_obj, read_ply, replicate, sidecar, write_mesh
from scherk_costa.surface_mesh.mesh import weld


def _mesh(V, T, g=None):
    V = np.asarray(V, dtype=float).reshape(-1, 3)
    T = np.asarray(T, dtype=int).reshape(-1, 3)
    g = np.ones(len(V), complex) if g is None else g
    return SurfaceMesh(V, T, g, np.ones(len(V), np.int8), np.full(len(V), "interior"), np.zeros(3))


def test_empty_mesh():
    m = _mesh([], [])
    for fmt in ("obj", "ply"):
        data = export(m, fmt)
        V, T = (read_obj(data) if fmt == "obj" else read_ply(data)[:2])
        assert V.shape == (0, 3) and T.shape == (0, 3)


def test_single_triangle_obj():
    m = _mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    lines = export(m, "obj").decode().splitlines()
    assert sum(line.startswith("v ") for line in lines) == 3
    assert [line for line in lines if line.startswith("f ")] == ["f 1 2 3"]


def test_unknown_format():
    with pytest.raises(ValueError):
        export(_mesh([], []), "stl")


def test_obj_polygon_fan():
    V, T = read_obj(b"v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    assert T.tolist() == [[0, 1, 2], [0, 2, 3]]


def test_round_trip(sc_mesh, tmp_path):
    for fmt in ("obj", "ply"):
        path, meta = write_mesh(sc_mesh, tmp_path / f"m.{fmt}")
        data = path.read_bytes()
        if fmt == "obj":
            V, T = read_obj(data)
        else:
            V, T, g = read_ply(data)
            assert np.allclose(g, np.abs(sc_mesh.gauss), rtol=1e-12, equal_nan=True)
        assert np.abs(V - sc_mesh.vertices).max() <= 1e-9
        assert np.array_equal(T, sc_mesh.triangles)
        doc = json.loads(meta.read_text())
        assert doc["n_vertices"] == sc_mesh.n_vertices
        assert doc["period"] == pytest.approx(list(sc_mesh.period))


def test_export_deterministic(sc_mesh):
    assert export(sc_mesh, "ply") == export(sc_mesh, "ply")


def test_sidecar_contents(sc_mesh):
    doc = sidecar(sc_mesh)
    for key in ("rho", "lambda", "r", "c", "grid", "closure_residual", "period"):
        assert key in doc
    json.dumps(doc)


def test_replicated_watertight_after_reimport(sc_mesh):
    full = replicate(sc_mesh, 1)
    V, T = read_obj(export(full, "obj"))
    # nothing left to weld: coincident vertices were merged on export
    _, _, _, merged = weld(V, T, 1e-9 * full.scale)
    assert merged == 0
    # every edge is shared by at most two triangles
    E = np.sort(np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]]), axis=1)
    _, counts = np.unique(E, axis=0, return_counts=True)
    assert counts.max() <= 2
