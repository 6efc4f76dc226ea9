"""Use case for the verification suite and single oracle checks."""
import time
from typing import Dict, List, Mapping, Optional

from application.stage_result import StageResult, StageStatus
from application.verification_checks import CHECKS, SUITE, CheckFn
from domain.exceptions import RvmError
from domain.models.reports import CheckResult
from domain.ports.logger import AppLogger

SUITES = ("fast", "full")


class VerifySuiteUseCase:
    """Runs the manufactured-solution and closed-form checks."""

    def __init__(self, logger: AppLogger, budget_minutes: float = 10.0,
                 checks: Optional[Mapping[str, CheckFn]] = None):
        """
        Initializes the use case.

        Args:
            logger: Logger instance
            budget_minutes: Runtime after which the suite warns
            checks: Check registry (defaults to every known check)
        """
        self.logger = logger
        self.budget_minutes = budget_minutes
        self.checks = dict(CHECKS if checks is None else checks)

    def _run(self, name: str, params: Mapping[str, str], fast: bool, corrupt: bool) -> CheckResult:
        check = self.checks[name]
        self.logger.subtitle(f"Check {name}")
        started = time.perf_counter()
        try:
            result = check(params, fast, corrupt)
        except (RvmError, ValueError, KeyError) as e:
            result = CheckResult(name=name, passed=False, message=f"{type(e).__name__}: {e}")
        result.seconds = time.perf_counter() - started
        if result.passed:
            self.logger.info(f"{name} passed in {result.seconds:.2f}s")
        else:
            self.logger.error(f"{name} failed in {result.seconds:.2f}s {result.message}".rstrip())
            for key, value in sorted(result.details.items()):
                self.logger.error(f"  {key}: {value}")
        return result

    def execute(self, suite: str = "fast", inject_corruption: bool = False) -> StageResult:
        """
        Executes every suite check.

        Args:
            suite: 'fast' (reduced resolutions) or 'full'
            inject_corruption: Drop the 6u term in the self-similar residual (negative-control hook)

        Returns:
            StageResult listing the failed checks
        """
        if suite not in SUITES:
            return StageResult(stage="verify", status=StageStatus.CONFIG_ERROR,
                               message=f"unknown suite '{suite}' (expected {', '.join(SUITES)})")
        self.logger.title(f"Verification suite: {suite}")
        if inject_corruption:
            self.logger.warning("Operator corruption injected: the self-similar check is expected to fail")
        started = time.perf_counter()
        results: List[CheckResult] = [
            self._run(name, {}, suite == "fast", inject_corruption) for name in SUITE if name in self.checks
        ]
        minutes = (time.perf_counter() - started) / 60.0
        if minutes > self.budget_minutes:
            self.logger.warning(f"Suite took {minutes:.1f} min, above the budget of {self.budget_minutes:g} min")
        failures = [r.name for r in results if not r.passed]
        details: Dict[str, object] = {r.name: r.model_dump() for r in results}
        details["minutes"] = minutes
        status = StageStatus.FAILED if failures else StageStatus.SUCCESS
        self.logger.subtitle("Summary")
        self.logger.table(("check", "passed", "seconds"), [(r.name, r.passed, r.seconds) for r in results])
        message = f"{len(results) - len(failures)}/{len(results)} checks passed"
        self.logger.info(message)
        return StageResult(stage="verify", status=status, message=message, details=details, failures=failures)

    def run_check(self, name: str, params: Optional[Mapping[str, str]] = None, fast: bool = False) -> StageResult:
        """
        Executes one named check with key=value overrides.

        Returns:
            StageResult; CONFIG_ERROR for unknown check names
        """
        if name not in self.checks:
            return StageResult(stage="oracle", status=StageStatus.CONFIG_ERROR,
                               message=f"unknown check '{name}' (expected {', '.join(sorted(self.checks))})")
        self.logger.title(f"Oracle: {name}")
        result = self._run(name, dict(params or {}), fast, False)
        status = StageStatus.SUCCESS if result.passed else StageStatus.FAILED
        return StageResult(stage="oracle", status=status, message=result.message,
                           details=result.model_dump(), failures=[] if result.passed else [name])
