"""
carreau-stokes - finite element solver for the non-isothermal Carreau Stokes problem

This package provides Taylor-Hood discretizations on the unit square, a
Picard decoupling of the velocity/pressure and temperature subproblems,
manufactured solutions with closed-form forcings, and a convergence harness
that writes CSV, SVG and YAML artifacts.
"""

__version__ = "1.0.0"

from .constitutive import CarreauParams, ViscosityModel, check_constitutive
from .core import CarreauStokesModule
from .harness import StudySpec, run_study
from .interface import CarreauStokesInterface
from .manufactured import make_case, validate_forcing
from .mesh import Mesh, refine_uniform, unit_square_mesh
from .solver import SolverConfig, picard_solve
from .stokes_types import (
    CarreauStokesError,
    ConfigurationError,
    ConvergenceReport,
    CoupledState,
    DivergenceError,
    ErrorReport,
    IterationLog,
    ModuleStatus,
    NonConvergenceError,
    OperationResult,
    SingularSystemError,
    StudyReport,
)

# Public API
__all__ = [
    "CarreauStokesModule",
    "CarreauStokesInterface",
    "CarreauParams",
    "ViscosityModel",
    "check_constitutive",
    "StudySpec",
    "run_study",
    "SolverConfig",
    "picard_solve",
    "make_case",
    "validate_forcing",
    "Mesh",
    "unit_square_mesh",
    "refine_uniform",
    "CoupledState",
    "IterationLog",
    "ErrorReport",
    "ConvergenceReport",
    "StudyReport",
    "CarreauStokesError",
    "ConfigurationError",
    "NonConvergenceError",
    "DivergenceError",
    "SingularSystemError",
    "OperationResult",
    "ModuleStatus",
]
