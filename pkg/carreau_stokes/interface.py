"""
Interface definition for carreau-stokes
"""

from abc import ABC, abstractmethod
from typing import Any, Dict

from .harness import StudySpec
from .stokes_types import OperationResult, SolveOutcome, StudyReport


class CarreauStokesInterface(ABC):
    """
    Interface for the carreau-stokes solver module

    Defines the contract that every solver front end must follow.
    """

    @abstractmethod
    def initialize(self) -> OperationResult:
        """
        Initialize the module

        Returns:
            OperationResult indicating success or failure
        """
        pass

    @abstractmethod
    def solve(self, spec: StudySpec, n: int) -> OperationResult[SolveOutcome]:
        """
        Solve one mesh level for the first p and sigma of a study

        Args:
            spec: Study parameters
            n: Subdivisions per side of the unit square

        Returns:
            OperationResult containing the converged state, log and errors
        """
        pass

    @abstractmethod
    def run_study(self, spec: StudySpec) -> OperationResult[StudyReport]:
        """
        Run a convergence study and write its artifacts

        Args:
            spec: Study parameters

        Returns:
            OperationResult containing the study report
        """
        pass

    @abstractmethod
    def get_health_status(self) -> Dict[str, Any]:
        """
        Get the current health status of the module

        Returns:
            Dictionary containing health status information
        """
        pass

    @abstractmethod
    def shutdown(self) -> OperationResult:
        """
        Gracefully shutdown the module

        Returns:
            OperationResult indicating shutdown success or failure
        """
        pass
