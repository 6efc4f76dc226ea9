"""Tests for VerifySuiteUseCase."""
import pytest

from application.stage_result import StageStatus
from application.verify_suite_use_case import VerifySuiteUseCase
from domain.exceptions import InsufficientDataError
from domain.models.reports import CheckResult


def _passing(params, fast, corrupt):
    return CheckResult(name="kinematics", passed=True, details={"fast": fast, "params": dict(params)})


def _failing(params, fast, corrupt):
    return CheckResult(name="pusher", passed=False, message="order 1.2", details={"orders": [1.2]})


def _corruptible(params, fast, corrupt):
    return CheckResult(name="self_similar", passed=not corrupt)


def _raising(params, fast, corrupt):
    raise InsufficientDataError("too few points")


class TestVerifySuiteUseCase:
    """Tests for VerifySuiteUseCase with stub checks."""

    @pytest.fixture
    def checks(self):
        return {"kinematics": _passing, "self_similar": _corruptible, "pusher": _failing,
                "elliptic": _raising, "retarded": _passing}

    @pytest.fixture
    def use_case(self, mock_logger, checks):
        return VerifySuiteUseCase(mock_logger, budget_minutes=10.0, checks=checks)

    def test_suite_runs_known_checks(self, use_case):
        """Test that suite checks run in order and oracle-only checks are skipped."""
        result = use_case.execute("fast")

        assert result.status == StageStatus.FAILED
        assert result.failures == ["elliptic", "pusher"]
        assert "retarded" not in result.details
        assert result.message == "2/4 checks passed"
        assert result.details["kinematics"]["details"]["fast"] is True
        assert "minutes" in result.details

    def test_exception_becomes_failure(self, use_case, mock_logger):
        """Test that a raising check is reported as failed with its error."""
        result = use_case.execute("full")

        assert result.details["elliptic"]["passed"] is False
        assert "too few points" in result.details["elliptic"]["message"]
        assert result.details["kinematics"]["details"]["fast"] is False
        mock_logger.error.assert_called()

    def test_all_passing(self, mock_logger):
        """Test a fully passing suite."""
        result = VerifySuiteUseCase(mock_logger, checks={"kinematics": _passing}).execute()

        assert result.is_success
        assert result.failures == []
        assert result.message == "1/1 checks passed"

    def test_corruption_flips_check(self, mock_logger):
        """Test that the corruption hook reaches the checks and is announced."""
        use_case = VerifySuiteUseCase(mock_logger, checks={"self_similar": _corruptible})

        assert use_case.execute().is_success
        result = use_case.execute(inject_corruption=True)

        assert result.failures == ["self_similar"]
        mock_logger.warning.assert_called_once()

    def test_unknown_suite(self, use_case):
        """Test that an unknown suite name is a configuration error."""
        result = use_case.execute("nightly")

        assert result.status == StageStatus.CONFIG_ERROR
        assert result.exit_code == 2

    def test_budget_warning(self, mock_logger):
        """Test that a suite above its budget warns."""
        use_case = VerifySuiteUseCase(mock_logger, budget_minutes=-1.0, checks={"kinematics": _passing})

        use_case.execute()

        assert "budget" in mock_logger.warning.call_args.args[0]

    def test_run_check(self, use_case):
        """Test a single oracle check with parameter overrides."""
        result = use_case.run_check("retarded", {"R": "2.0"})

        assert result.is_success
        assert result.stage == "oracle"
        assert result.details["details"]["params"] == {"R": "2.0"}

    def test_run_check_failure(self, use_case):
        """Test that a failing oracle check lists itself."""
        result = use_case.run_check("pusher")

        assert result.status == StageStatus.FAILED
        assert result.failures == ["pusher"]
        assert result.message == "order 1.2"

    def test_run_check_unknown(self, use_case):
        """Test that an unknown check is a configuration error."""
        result = use_case.run_check("maxwell")

        assert result.status == StageStatus.CONFIG_ERROR
        assert "kinematics" in result.message
