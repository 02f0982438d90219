"""
carreau-stokes: facade over the solver and the convergence harness
Contracts: StudySpec → SolveOutcome | StudyReport, wrapped in OperationResult

The module keeps an audit trail of every operation and turns solver
exceptions into error codes that the command line maps to exit statuses.
"""

import logging
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from .harness import StudySpec, run_study, solve_level
from .interface import CarreauStokesInterface
from .stokes_types import (BasisError, CarreauStokesError, ConfigurationError, ConstitutiveError, MeshError,
                           ModuleStatus, NonConvergenceError, OperationResult, SolveOutcome, StudyReport)

logger = logging.getLogger(__name__)

NON_CONVERGENCE = "NON_CONVERGENCE"
INVALID_CONFIGURATION = "INVALID_CONFIGURATION"
IO_ERROR = "IO_ERROR"
SYSTEM_ERROR = "SYSTEM_ERROR"

EXIT_CODES = {
    None: 0,
    NON_CONVERGENCE: 1,
    INVALID_CONFIGURATION: 2,
    IO_ERROR: 3,
    SYSTEM_ERROR: 1,
}


class CarreauStokesModule(CarreauStokesInterface):
    """
    Carreau Stokes solver module

    Key entities:
    - StudySpec: validated parameters of a solve or study
    - SolveOutcome: converged coupled state, Picard log and error norms
    - StudyReport: convergence series with orders, one per (p, sigma)
    """

    def __init__(self, spec: Optional[StudySpec] = None):
        self.spec = spec
        self.status = ModuleStatus.INITIALIZING
        self._solves = 0
        self._failed_solves = 0
        self._studies = 0
        self._audit_trail: List[Dict[str, Any]] = []
        self._initialized = False
        logger.info("Initializing carreau-stokes module")

    def initialize(self) -> OperationResult:
        """Validate the default spec and mark the module healthy"""
        try:
            if self.spec is None:
                self.spec = StudySpec()
            self._initialized = True
            self.status = ModuleStatus.HEALTHY
            logger.info("carreau-stokes module initialized successfully")
            return OperationResult.ok("Module initialized")
        except ValueError as e:
            self.status = ModuleStatus.UNHEALTHY
            logger.error(f"Failed to initialize carreau-stokes: {e}")
            return OperationResult.fail(f"Initialization failed: {e}", INVALID_CONFIGURATION)

    def solve(self, spec: StudySpec, n: int) -> OperationResult[SolveOutcome]:
        if not self._initialized:
            return OperationResult.fail("Module not initialized", SYSTEM_ERROR)
        operation_id = self._start_audit_trail("solve", {"case": spec.case.value, "p": spec.p[0], "n": n})
        sigma = spec.sigma_values()[0]
        self._solves += 1
        try:
            outcome, _ = solve_level(spec, spec.p[0], sigma, n)
        except Exception as e:
            self._failed_solves += 1
            return self._failure(operation_id, e)
        self._record_audit_event(operation_id, "operation_completed",
                                 f"{outcome.log.iterations} iterations")
        return OperationResult.ok(outcome)

    def run_study(self, spec: StudySpec) -> OperationResult[StudyReport]:
        if not self._initialized:
            return OperationResult.fail("Module not initialized", SYSTEM_ERROR)
        operation_id = self._start_audit_trail("run_study", {"case": spec.case.value, "p": spec.p,
                                                             "levels": spec.levels})
        self._studies += 1
        try:
            report = run_study(spec, write=True)
        except Exception as e:
            return self._failure(operation_id, e)
        failed = report.failed_rows
        self._solves += sum(len(r.rows) for r in report.reports)
        self._failed_solves += failed
        self._record_audit_event(operation_id, "operation_completed",
                                 f"{len(report.reports)} series, {failed} failed levels")
        return OperationResult.ok(report)

    def get_health_status(self) -> Dict[str, Any]:
        return {
            "module_name": "carreau-stokes",
            "status": self.status.value,
            "solves_count": self._solves,
            "failed_solves_count": self._failed_solves,
            "studies_count": self._studies,
            "audit_events_count": len(self._audit_trail),
            "last_operation": self._audit_trail[-1] if self._audit_trail else None,
        }

    def shutdown(self) -> OperationResult:
        self._initialized = False
        self.status = ModuleStatus.SHUTDOWN
        logger.info(f"carreau-stokes module shutdown completed ({len(self._audit_trail)} audit events)")
        return OperationResult.ok("Shutdown completed")

    def _failure(self, operation_id: str, error: Exception) -> OperationResult:
        if isinstance(error, (ConfigurationError, ConstitutiveError, MeshError, BasisError)):
            code = INVALID_CONFIGURATION
        elif isinstance(error, NonConvergenceError):
            code = NON_CONVERGENCE
        elif isinstance(error, OSError):
            code = IO_ERROR
        elif isinstance(error, CarreauStokesError):
            code = SYSTEM_ERROR
        else:
            code = SYSTEM_ERROR
            logger.exception(f"Unexpected error in carreau-stokes: {error}")
        self._record_audit_event(operation_id, code.lower(), str(error))
        logger.warning(f"{operation_id} failed with {code}: {error}")
        return OperationResult.fail(str(error), code)

    def _start_audit_trail(self, operation: str, input_data: Any) -> str:
        now = datetime.now(timezone.utc).isoformat()
        operation_id = f"{operation}_{now}"
        self._audit_trail.append({
            "operation_id": operation_id,
            "operation": operation,
            "timestamp": now,
            "input_summary": str(input_data)[:100],
        })
        return operation_id

    def _record_audit_event(self, operation_id: str, event: str, details: str):
        self._audit_trail.append({
            "operation_id": operation_id,
            "event": event,
            "details": details,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        })


def exit_code(result: OperationResult) -> int:
    return EXIT_CODES.get(result.error_code, 1) if not result.success else 0
