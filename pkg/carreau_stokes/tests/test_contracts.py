"""
Contract compliance tests for carreau-stokes
These tests verify that the module correctly implements its interface contract.
"""

import inspect

import pytest

from ..core import CarreauStokesModule
from ..harness import StudySpec
from ..interface import CarreauStokesInterface
from ..solver import SolverConfig
from ..stokes_types import OperationResult, SolveOutcome, StudyReport


class TestContractCompliance:
    """Test that CarreauStokesModule complies with its interface contract"""

    @pytest.fixture
    def spec(self, tmp_path):
        return StudySpec(case="stokes_linear", p=[2.0], levels=[2, 4],
                         solver=SolverConfig(tol=1e-8, max_iter=20), output_dir=tmp_path)

    @pytest.fixture
    def module(self, spec):
        return CarreauStokesModule(spec)

    def test_implements_interface(self, module):
        assert isinstance(module, CarreauStokesInterface)
        assert not inspect.isabstract(type(module))
        assert inspect.isabstract(CarreauStokesInterface)

    def test_interface_methods_exist(self, module):
        for method_name in ["initialize", "solve", "run_study", "get_health_status", "shutdown"]:
            assert callable(getattr(module, method_name))

    def test_initialize_returns_operation_result(self, module):
        result = module.initialize()
        assert isinstance(result, OperationResult)
        assert result.success

    def test_solve_signature(self, module, spec):
        module.initialize()
        result = module.solve(spec, 2)
        assert isinstance(result, OperationResult)
        assert isinstance(result.data, SolveOutcome)

    def test_run_study_signature(self, module, spec):
        module.initialize()
        result = module.run_study(spec)
        assert isinstance(result, OperationResult)
        assert isinstance(result.data, StudyReport)

    def test_get_health_status_returns_dict(self, module):
        module.initialize()
        status = module.get_health_status()
        for field in ["module_name", "status", "solves_count", "studies_count"]:
            assert field in status

    def test_module_lifecycle(self, module):
        assert module.initialize().success
        assert module.get_health_status()["status"] == "healthy"
        assert module.shutdown().success
        assert module.get_health_status()["status"] == "shutdown"

    def test_error_handling_compliance(self, module, spec):
        result = module.solve(spec, 2)
        assert not result.success
        assert result.error is not None
        assert not module.run_study(spec).success
