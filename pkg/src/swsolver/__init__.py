"""High-order continuous/discontinuous Galerkin shallow water solver
with residual-based dynamic sub-grid viscosity and positivity-preserving
wetting/drying.
"""
from .basis import BasisSet, lgl_nodes, make_basis
from .cases import CaseConfig, default_config, setup_case
from .driver import RunResult, run_case
from .galerkin import SemiDiscreteOp, rusanov
from .mesh import Mesh, build_mesh
from .swe import Bathymetry, GRAVITY, State
from .timeint import SolverConfig, compute_dt, esdirk_step, rk4_step
from .wetdry import WetDryConfig, limit_all

__all__ = [
    "BasisSet", "Bathymetry", "CaseConfig", "GRAVITY", "Mesh", "RunResult",
    "SemiDiscreteOp", "SolverConfig", "State", "WetDryConfig", "build_mesh",
    "compute_dt", "default_config", "esdirk_step", "lgl_nodes", "limit_all",
    "make_basis", "rk4_step", "run_case", "rusanov", "setup_case",
]

__version__ = "0.1.0"
