"""
Type definitions for carreau-stokes

This module defines the shared records of the solver: the coupled discrete
state, the Picard iteration log, error and convergence reports, the
exception hierarchy and the generic operation result used by the facade.
"""

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum, IntEnum
from typing import Any, Dict, Generic, List, Optional, Tuple, TypeVar

import numpy as np

T = TypeVar("T")


class CaseId(str, Enum):
    """Registered manufactured cases"""
    TEST1 = "test1"
    TEST2 = "test2"
    STOKES_LINEAR = "stokes_linear"
    HEAT_ONLY = "heat_only"


class RunStatus(IntEnum):
    """Outcome of a single Picard solve, emitted as the CSV status column"""
    OK = 0
    NON_CONVERGENCE = 1
    DIVERGENCE = 2
    SINGULAR = 3


class ConvectionVelocity(str, Enum):
    """Velocity iterate that feeds the convection form of the temperature step"""
    CURRENT = "current"
    PREVIOUS = "previous"


# Exceptions


class CarreauStokesError(Exception):
    """Root of all solver errors"""


class ConfigurationError(CarreauStokesError, ValueError):
    """Raised for invalid configuration values or files"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MeshError(CarreauStokesError, ValueError):
    """Raised for invalid mesh construction input"""


class BasisError(CarreauStokesError, ValueError):
    """Raised for unsupported basis degrees, quadrature orders or bad points"""


class ConstitutiveError(CarreauStokesError, ValueError):
    """Raised for invalid constitutive parameters or arguments"""


class MeshMismatchError(CarreauStokesError, ValueError):
    """Raised when finite element spaces live on different meshes or rules"""


class SingularSystemError(CarreauStokesError):
    """Raised when a sparse factorization fails or its residual is too large"""

    def __init__(self, message: str, stats: Optional[Dict[str, Any]] = None):
        self.stats = stats or {}
        if self.stats:
            details = ", ".join(f"{k}={v}" for k, v in self.stats.items())
            message = f"{message} ({details})"
        super().__init__(message)


class NonConvergenceError(CarreauStokesError):
    """Raised when the Picard iteration exhausts max_iter

    The last iterate and the full log are attached for inspection.
    """

    def __init__(self, message: str, state: "CoupledState", log: "IterationLog"):
        self.state = state
        self.log = log
        super().__init__(message)


class DivergenceError(NonConvergenceError):
    """Raised when the Picard increments keep growing"""


class ReportError(CarreauStokesError, ValueError):
    """Raised when a report cannot be rendered"""


# Discrete state and iteration log


@dataclass
class CoupledState:
    """Coefficient vectors of (u_h, pi_h, theta_h)

    The velocity vector is component-blocked: all x-components first.
    """
    u: np.ndarray
    pi: np.ndarray
    theta: np.ndarray

    def copy(self) -> "CoupledState":
        return CoupledState(self.u.copy(), self.pi.copy(), self.theta.copy())


@dataclass
class IterationRecord:
    """Diagnostics of one Picard iteration"""
    iteration: int
    du: float
    dpi: float
    dtheta: float
    eps_norm_diag: float
    grad_theta_diag: float
    theta_min: float = math.nan
    theta_max: float = math.nan
    div_residual: float = math.nan

    @property
    def increment(self) -> float:
        return self.du + self.dpi + self.dtheta


ITERATION_CSV_HEADER = "iter,du,dpi,dtheta,eps_norm_diag,grad_theta_diag"


@dataclass
class IterationLog:
    """Per-iteration increments and diagnostic norms of a Picard solve"""
    s: float
    s_dual: float
    diag_exponent: float
    records: List[IterationRecord] = field(default_factory=list)
    converged: bool = False

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def increments(self) -> List[float]:
        return [r.increment for r in self.records]

    def to_csv(self) -> str:
        lines = [ITERATION_CSV_HEADER]
        for r in self.records:
            values = [r.du, r.dpi, r.dtheta, r.eps_norm_diag, r.grad_theta_diag]
            lines.append(",".join([str(r.iteration)] + [format_number(v) for v in values]))
        return "\n".join(lines) + "\n"


# Reports


@dataclass
class ErrorReport:
    """Errors of a discrete state against the exact manufactured solution"""
    err_u_l2: float
    err_u_w1s: float
    err_pi: float
    err_theta_h1: float
    err_u_h1: float
    err_u_grad_ls: float
    s: float
    quadrature_exactness: int

    def as_dict(self) -> Dict[str, float]:
        return {
            "err_u_l2": self.err_u_l2,
            "err_u_w1s": self.err_u_w1s,
            "err_pi": self.err_pi,
            "err_t_h1": self.err_theta_h1,
            "err_u_h1": self.err_u_h1,
            "err_u_grad_ls": self.err_u_grad_ls,
        }


ERROR_FAMILIES = ("err_u_l2", "err_u_w1s", "err_pi", "err_t_h1")


@dataclass
class SolveOutcome:
    """Converged state of one mesh level with its log and errors"""
    case: str
    p: float
    sigma: float
    n: int
    h: float
    ndofs: Tuple[int, int, int]
    state: CoupledState
    log: IterationLog
    errors: ErrorReport


@dataclass
class ConvergenceRow:
    """One mesh level of a convergence series"""
    level: int
    h: float
    ndof_u: int
    ndof_p: int
    ndof_t: int
    iters: int
    err_u_l2: float = math.nan
    err_u_w1s: float = math.nan
    err_pi: float = math.nan
    err_t_h1: float = math.nan
    status: RunStatus = RunStatus.OK
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == RunStatus.OK

    def error(self, family: str) -> float:
        return float(getattr(self, family))


@dataclass
class ConvergenceReport:
    """Errors and orders of one (p, sigma) series over the mesh levels"""
    case: str
    p: float
    sigma: float
    degree: int
    rows: List[ConvergenceRow] = field(default_factory=list)
    eocs: Dict[str, List[float]] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def label(self) -> str:
        return f"{self.case}_P{self.degree}_p{self.p:g}_sigma{self.sigma:g}"

    def successful_rows(self) -> List[ConvergenceRow]:
        return [r for r in self.rows if r.ok]


@dataclass
class StudyReport:
    """All series of a study in (p, sigma) order"""
    reports: List[ConvergenceReport] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)

    @property
    def failed_rows(self) -> int:
        return sum(1 for rep in self.reports for row in rep.rows if not row.ok)

    def find(self, p: float, sigma: float) -> Optional[ConvergenceReport]:
        for rep in self.reports:
            if rep.p == p and rep.sigma == sigma:
                return rep
        return None


def format_number(value: float) -> str:
    """Locale-independent 17-significant-digit rendering, NaN as 'NaN'"""
    value = float(value)
    if math.isnan(value):
        return "NaN"
    return format(value, ".17g")


class OperationResult(Generic[T]):
    """Standard result wrapper for all facade operations"""

    def __init__(self, success: bool, data: T = None, error: str = None, error_code: str = None):
        self.success = success
        self.data = data
        self.error = error
        self.error_code = error_code
        self.timestamp = datetime.now(timezone.utc)

    @classmethod
    def ok(cls, data: T = None) -> "OperationResult[T]":
        """Create a successful result"""
        return cls(success=True, data=data)

    @classmethod
    def fail(cls, error: str, error_code: str = None, data: T = None) -> "OperationResult[T]":
        """Create an error result"""
        return cls(success=False, data=data, error=error, error_code=error_code)

    def __bool__(self) -> bool:
        return self.success


class ModuleStatus(Enum):
    """Module status enumeration"""
    INITIALIZING = "initializing"
    HEALTHY = "healthy"
    UNHEALTHY = "unhealthy"
    SHUTDOWN = "shutdown"
