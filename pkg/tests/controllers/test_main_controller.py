"""Tests for MainController."""
import os
from unittest.mock import Mock

import pytest

from application.analyze_run_use_case import AnalyzeRunUseCase
from application.run_simulation_use_case import RunSimulationUseCase
from application.stage_result import StageResult, StageStatus
from application.verify_suite_use_case import VerifySuiteUseCase
from controllers.main_controller import MainController, parse_params
from domain.exceptions import ConfigValidationError
from infrastructure.utils import digest


class TestParseParams:
    """Tests for parse_params."""

    def test_pairs(self):
        assert parse_params(["R=2.0", " t = 1.5 ", "solver="]) == {"R": "2.0", "t": "1.5", "solver": ""}

    def test_missing_separator(self):
        """Test that a bare word raises ConfigValidationError."""
        with pytest.raises(ConfigValidationError, match=r"\[oracle\]\.radius"):
            parse_params(["radius"])

    def test_empty_key(self):
        with pytest.raises(ConfigValidationError):
            parse_params(["=1"])


class TestParseArgs:
    """Tests for MainController.parse_args."""

    def test_run(self):
        args = MainController.parse_args(["run", "configs/free_streaming.ini"])

        assert args.command == "run"
        assert args.config == "configs/free_streaming.ini"

    def test_analyze(self):
        args = MainController.parse_args(["analyze", "runs/x", "--thresholds", "strict.ini"])

        assert args.run_dir == "runs/x"
        assert args.thresholds == "strict.ini"

    def test_verify_defaults(self):
        args = MainController.parse_args(["verify"])

        assert args.suite == "fast"
        assert args.inject_corruption is False

    def test_verify_options(self):
        args = MainController.parse_args(["verify", "--suite", "full", "--inject-corruption"])

        assert args.suite == "full"
        assert args.inject_corruption is True

    def test_oracle(self):
        args = MainController.parse_args(["oracle", "retarded", "R=2", "t=4", "--fast"])

        assert args.check == "retarded"
        assert args.params == ["R=2", "t=4"]
        assert args.fast is True

    def test_unknown_suite_exits(self):
        """Test that argparse rejects suites outside the choices."""
        with pytest.raises(SystemExit):
            MainController.parse_args(["verify", "--suite", "nightly"])

    def test_command_required(self):
        with pytest.raises(SystemExit):
            MainController.parse_args([])


class TestMainController:
    """Tests for MainController dispatch and display."""

    @pytest.fixture
    def run_use_case(self):
        mock = Mock(spec=RunSimulationUseCase)
        mock.execute.return_value = StageResult(stage="run", output="/runs/tiny")
        return mock

    @pytest.fixture
    def analyze_use_case(self):
        mock = Mock(spec=AnalyzeRunUseCase)
        mock.execute.return_value = StageResult(stage="analyze", status=StageStatus.FAILED,
                                                output="/runs/tiny/analysis/report.json", failures=["p_inf_rate"])
        return mock

    @pytest.fixture
    def verify_use_case(self):
        mock = Mock(spec=VerifySuiteUseCase)
        mock.execute.return_value = StageResult(stage="verify", status=StageStatus.FAILED, failures=["lwave"])
        mock.run_check.return_value = StageResult(stage="oracle")
        return mock

    @pytest.fixture
    def controller(self, run_use_case, analyze_use_case, verify_use_case, mock_logger):
        return MainController(run_use_case, analyze_use_case, verify_use_case, logger=mock_logger)

    def test_run_passes_serialized_config(self, controller, run_use_case, small_config_path):
        """Test that the run stage receives the parsed config, its text and its digest."""
        result = controller.run(MainController.parse_args(["run", small_config_path]))

        config, text, text_digest = run_use_case.execute.call_args.args
        assert result.is_success
        assert config.run.name == "tiny"
        assert "[species.1]" in text
        assert text_digest == digest(text)

    def test_run_missing_config(self, controller, run_use_case, temp_dir, mock_logger):
        """Test that a missing configuration file gives exit code 2."""
        result = controller.run(MainController.parse_args(["run", os.path.join(temp_dir, "none.ini")]))

        assert result.status == StageStatus.CONFIG_ERROR
        assert result.exit_code == 2
        run_use_case.execute.assert_not_called()
        assert "Configuration error" in mock_logger.error.call_args.args[0]

    def test_run_invalid_config(self, controller, temp_dir, small_config_text):
        """Test that a CFL violation is reported as a configuration error."""
        path = os.path.join(temp_dir, "bad.ini")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(small_config_text.replace("dt = 0.2", "dt = 0.9"))

        result = controller.run(MainController.parse_args(["run", path]))

        assert result.exit_code == 2
        assert "[time].dt" in result.message

    def test_analyze_with_thresholds(self, controller, analyze_use_case, temp_dir, mock_logger):
        """Test that a thresholds file is loaded and failed verdicts give exit code 1."""
        path = os.path.join(temp_dir, "strict.ini")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("[analysis]\np_rate_tol = 0.1\n")

        result = controller.run(MainController.parse_args(["analyze", "/runs/tiny", "--thresholds", path]))

        run_dir, thresholds = analyze_use_case.execute.call_args.args
        assert result.exit_code == 1
        assert run_dir == "/runs/tiny"
        assert thresholds.p_rate_tol == 0.1
        mock_logger.error.assert_any_call("  - failed: p_inf_rate")

    def test_analyze_without_thresholds(self, controller, analyze_use_case):
        controller.run(MainController.parse_args(["analyze", "/runs/tiny"]))

        assert analyze_use_case.execute.call_args.args == ("/runs/tiny", None)

    def test_verify_failure(self, controller, verify_use_case, mock_logger):
        """Test that failed checks are listed and exit with 1."""
        result = controller.run(MainController.parse_args(["verify", "--inject-corruption"]))

        verify_use_case.execute.assert_called_once_with("fast", inject_corruption=True)
        assert result.exit_code == 1
        mock_logger.error.assert_any_call("  - failed: lwave")

    def test_oracle(self, controller, verify_use_case):
        """Test that oracle overrides reach the check."""
        result = controller.run(MainController.parse_args(["oracle", "kirchhoff", "R=3", "--fast"]))

        verify_use_case.run_check.assert_called_once_with("kirchhoff", {"R": "3"}, fast=True)
        assert result.is_success

    def test_oracle_malformed_params(self, controller, verify_use_case):
        """Test that a malformed override is a configuration error."""
        result = controller.run(MainController.parse_args(["oracle", "kirchhoff", "R"]))

        assert result.exit_code == 2
        assert result.stage == "oracle"
        verify_use_case.run_check.assert_not_called()
