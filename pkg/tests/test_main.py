"""Tests for main.py."""
from unittest.mock import Mock, patch

from application.stage_result import StageResult, StageStatus


def _config():
    config = Mock()
    config.logger.name = "rvm-test"
    config.logger.level = "INFO"
    config.workers.count = 3
    config.verify.budget_minutes = 5.0
    return config


class TestBuildController:
    """Tests for build_controller."""

    @patch('main.LocalHardwareInfo')
    @patch('main.RunCatalogSQL')
    @patch('main.DatabaseConnection')
    def test_wires_adapters(self, mock_db, mock_catalog, mock_hardware, mock_logger):
        """Test that the catalog is initialized and the settings reach the use cases."""
        import main

        mock_hardware.return_value.default_workers = 8
        config = _config()

        controller = main.build_controller(config, mock_logger)

        mock_db.assert_called_once_with(config.catalog, mock_logger)
        mock_db.return_value.initialize.assert_called_once()
        mock_catalog.assert_called_once_with(mock_db.return_value)
        assert controller.run_use_case.default_workers == 8
        assert controller.run_use_case.workers_override == 3
        assert controller.verify_use_case.budget_minutes == 5.0
        assert controller.analyze_use_case.run_catalog is mock_catalog.return_value


class TestMain:
    """Tests for main."""

    @patch('main.build_controller')
    @patch('main.Logger')
    @patch('main.Config')
    def test_exit_code_from_result(self, mock_config, mock_logger_class, mock_build):
        """Test that main returns the stage exit code."""
        import main

        mock_config.load.return_value = _config()
        mock_build.return_value.run.return_value = StageResult(stage="verify", status=StageStatus.FAILED)

        assert main.main(["verify"]) == 1
        args = mock_build.return_value.run.call_args.args[0]
        assert args.command == "verify"
        mock_logger_class.get_logger.assert_called_once_with("rvm-test", "INFO")

    @patch('main.build_controller')
    @patch('main.Logger')
    @patch('main.Config')
    def test_config_error_exit_code(self, mock_config, mock_logger_class, mock_build):
        import main

        mock_config.load.return_value = _config()
        mock_build.return_value.run.return_value = StageResult(stage="run", status=StageStatus.CONFIG_ERROR)

        assert main.main(["run", "missing.ini"]) == 2

    @patch('main.build_controller')
    @patch('main.Logger')
    @patch('main.Config')
    def test_keyboard_interrupt(self, mock_config, mock_logger_class, mock_build):
        """Test that an interrupt exits with 1."""
        import main

        mock_config.load.return_value = _config()
        mock_build.return_value.run.side_effect = KeyboardInterrupt()

        assert main.main(["verify"]) == 1
        mock_logger_class.get_logger.return_value.info.assert_any_call("Interrupted by user")

    @patch('main.build_controller')
    @patch('main.Logger')
    @patch('main.Config')
    def test_unexpected_exception(self, mock_config, mock_logger_class, mock_build):
        """Test that an unexpected error is logged and exits with 1."""
        import main

        mock_config.load.return_value = _config()
        mock_build.side_effect = RuntimeError("catalog is missing required tables")
        logger = mock_logger_class.get_logger.return_value

        assert main.main(["analyze", "runs/tiny"]) == 1
        logger.error.assert_any_call("Application error: catalog is missing required tables")
