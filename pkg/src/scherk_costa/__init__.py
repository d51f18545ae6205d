"""Numerical construction kit for singly periodic Scherk-Costa minimal surfaces.

Modules: ``param_algebra`` (end placement), ``quadrature``, ``periods``
(balance values c1, c2, c3), ``solver`` (period closing and sweeps),
``surface_mesh`` (immersion, Costa, deformation family, export), ``verify``
(bound checks) and ``cli``.
"""

from .param_algebra import EndConfiguration, GeometricParams, r0, solve_end_cubic
from .periods import period_diagnostics
from .quadrature import QuadratureConfig
from .solver import SolvedSurface, SolverConfig, SolverError, solve_periods, sweep

__version__ = "0.1.0"

__all__ = [
    "EndConfiguration",
    "GeometricParams",
    "QuadratureConfig",
    "SolvedSurface",
    "SolverConfig",
    "SolverError",
    "period_diagnostics",
    "r0",
    "solve_end_cubic",
    "solve_periods",
    "sweep",
]
