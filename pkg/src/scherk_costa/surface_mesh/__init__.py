"""Triangulated pieces of the Scherk-Costa and Costa surfaces."""

from .chart import CostaChart, DiskChart, DomainPoint, ScherkCostaChart
from .costa import CostaError, CostaParams, costa, costa_gap_vector, solve_mu0, symmetry_report
from .family import (
    FamilyError,
    FamilyMember,
    deformation_family,
    family_member,
    gauss_region_check,
    limit_defect,
)
from .io import export, read_obj, read_ply, sidecar, write_mesh
from .mesh import MeshConfig, MeshError, SurfaceMesh, mean_curvature, metric_check, vertex_set_distance
from .scherk import (
    half_line_separation,
    immerse,
    line_through,
    period_gap,
    period_gap_vector,
    replicate,
    rotate_about_x1_line,
)

__all__ = [
    "CostaChart",
    "CostaError",
    "CostaParams",
    "DiskChart",
    "DomainPoint",
    "FamilyError",
    "FamilyMember",
    "MeshConfig",
    "MeshError",
    "ScherkCostaChart",
    "SurfaceMesh",
    "costa",
    "costa_gap_vector",
    "deformation_family",
    "export",
    "family_member",
    "gauss_region_check",
    "half_line_separation",
    "immerse",
    "limit_defect",
    "line_through",
    "mean_curvature",
    "metric_check",
    "period_gap",
    "period_gap_vector",
    "read_obj",
    "read_ply",
    "replicate",
    "rotate_about_x1_line",
    "sidecar",
    "symmetry_report",
    "vertex_set_distance",
    "write_mesh",
]
