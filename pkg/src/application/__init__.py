"""Application layer - Use cases and orchestration."""

from application.analyze_run_use_case import AnalyzeRunUseCase
from application.run_simulation_use_case import RunSimulationUseCase
from application.stage_result import StageResult, StageStatus
from application.verify_suite_use_case import VerifySuiteUseCase

__all__ = [
    "AnalyzeRunUseCase",
    "RunSimulationUseCase",
    "StageResult",
    "StageStatus",
    "VerifySuiteUseCase",
]
