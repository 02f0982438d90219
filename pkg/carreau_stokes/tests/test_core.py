"""
Tests for the carreau-stokes module facade
"""

import pytest

from .. import core as core_module
from ..core import (EXIT_CODES, INVALID_CONFIGURATION, IO_ERROR, NON_CONVERGENCE, SYSTEM_ERROR,
                    CarreauStokesModule, exit_code)
from ..harness import StudySpec
from ..solver import SolverConfig
from ..stokes_types import (ConstitutiveError, IterationLog, NonConvergenceError, OperationResult,
                            SingularSystemError)


class TestCarreauStokesModule:
    """Test suite for CarreauStokesModule"""

    @pytest.fixture
    def spec(self, tmp_path):
        return StudySpec(case="stokes_linear", p=[2.0], levels=[2, 4],
                         solver=SolverConfig(tol=1e-8, max_iter=20), output_dir=tmp_path / "out")

    @pytest.fixture
    def module(self, spec):
        return CarreauStokesModule(spec)

    def test_module_initialization(self, module):
        result = module.initialize()
        assert result.success
        assert module._initialized

    def test_default_spec(self):
        module = CarreauStokesModule()
        module.initialize()
        assert module.spec == StudySpec()

    def test_health_status(self, module):
        module.initialize()
        status = module.get_health_status()
        assert status["module_name"] == "carreau-stokes"
        assert status["status"] == "healthy"
        assert status["last_operation"] is None

    def test_shutdown(self, module):
        module.initialize()
        assert module.shutdown().success
        assert not module._initialized

    def test_solve_not_initialized(self, module, spec):
        result = module.solve(spec, 2)
        assert not result.success
        assert "not initialized" in result.error
        assert result.error_code == SYSTEM_ERROR

    def test_solve_success(self, module, spec):
        module.initialize()
        result = module.solve(spec, 2)
        assert result.success
        assert result.data.n == 2
        assert result.data.errors.err_u_l2 < 1e-9
        status = module.get_health_status()
        assert status["solves_count"] == 1
        assert status["failed_solves_count"] == 0

    def test_audit_trail_creation(self, module, spec):
        module.initialize()
        module.solve(spec, 2)
        assert module._audit_trail[0]["operation"] == "solve"
        assert module._audit_trail[-1]["event"] == "operation_completed"

    def test_run_study_writes_artifacts(self, module, spec):
        module.initialize()
        result = module.run_study(spec)
        assert result.success
        assert len(result.data.artifacts) == 3
        status = module.get_health_status()
        assert status["studies_count"] == 1
        assert status["solves_count"] == 2


class TestErrorMapping:
    @pytest.fixture
    def module(self, tmp_path):
        module = CarreauStokesModule(StudySpec(output_dir=tmp_path))
        module.initialize()
        return module

    @pytest.mark.parametrize("error, code", [
        (NonConvergenceError("stalled", None, IterationLog(2.0, 2.0, 2.0)), NON_CONVERGENCE),
        (ConstitutiveError("bad p"), INVALID_CONFIGURATION),
        (PermissionError("read-only"), IO_ERROR),
        (SingularSystemError("zero pivot"), SYSTEM_ERROR),
        (RuntimeError("boom"), SYSTEM_ERROR),
    ])
    def test_solve_failures(self, mocker, module, error, code):
        mocker.patch.object(core_module, "solve_level", side_effect=error)
        result = module.solve(module.spec, 4)
        assert not result.success
        assert result.error_code == code
        assert module.get_health_status()["failed_solves_count"] == 1
        assert module._audit_trail[-1]["event"] == code.lower()

    def test_study_io_failure(self, mocker, module):
        mocker.patch.object(core_module, "run_study", side_effect=OSError("disk full"))
        result = module.run_study(module.spec)
        assert result.error_code == IO_ERROR
        assert exit_code(result) == 3

    def test_exit_codes(self):
        assert exit_code(OperationResult.ok()) == 0
        assert exit_code(OperationResult.fail("x", NON_CONVERGENCE)) == 1
        assert exit_code(OperationResult.fail("x", INVALID_CONFIGURATION)) == 2
        assert exit_code(OperationResult.fail("x", IO_ERROR)) == 3
        assert exit_code(OperationResult.fail("x", "UNKNOWN")) == 1
        assert EXIT_CODES[SYSTEM_ERROR] == 1
