"""Tests for logger."""
import logging
import os
from unittest.mock import Mock, patch

import pytest

from infrastructure.logger import DEFAULT_LOGGER_NAME, EnhancedLogger, Logger


class TestLogger:
    """Tests for Logger."""

    def test_get_logger_returns_enhanced_logger(self):
        """Test that get_logger returns EnhancedLogger instance."""
        assert isinstance(Logger.get_logger(), EnhancedLogger)

    def test_get_logger_caching(self):
        """Test that get_logger caches loggers by name."""
        assert Logger.get_logger("cached-test") is Logger.get_logger("cached-test")
        assert Logger.get_logger("logger1")._logger is not Logger.get_logger("logger2")._logger

    def test_get_logger_with_name_and_level(self):
        """Test get_logger with both name and level."""
        logger = Logger.get_logger("test-named-level", level="debug")

        assert logger._logger.level == logging.DEBUG
        assert logger._logger.name == "test-named-level"

    def test_get_logger_invalid_level(self):
        """Test that an unknown level falls back to INFO."""
        assert Logger.get_logger("test-invalid", level="LOUD")._logger.level == logging.INFO

    def test_level_from_environment(self):
        """Test that RVM_LOG_LEVEL is used when no level is given."""
        with patch.dict(os.environ, {"RVM_LOG_LEVEL": "WARNING"}):
            logger = Logger.get_logger("test-env-level")

        assert logger._logger.level == logging.WARNING

    def test_default_name(self):
        """Test the process logger name."""
        assert DEFAULT_LOGGER_NAME == "rvm-asymptotics"

    def test_configure_root_logger_idempotent(self):
        """Test _configure_root_logger is idempotent."""
        root_logger = logging.getLogger()
        original_handlers = root_logger.handlers[:]
        Logger._root_logger_configured = False
        try:
            Logger._configure_root_logger("INFO")
            handlers = len(root_logger.handlers)
            Logger._configure_root_logger("DEBUG")

            assert Logger._root_logger_configured is True
            assert len(root_logger.handlers) == handlers
        finally:
            for handler in root_logger.handlers[:]:
                if handler not in original_handlers:
                    root_logger.removeHandler(handler)


class TestEnhancedLogger:
    """Tests for EnhancedLogger."""

    @pytest.fixture
    def mock_logger(self):
        """Creates a mock standard logger."""
        return Mock()

    @pytest.fixture
    def enhanced_logger(self, mock_logger):
        """Creates an EnhancedLogger instance."""
        return EnhancedLogger(mock_logger)

    def test_title(self, enhanced_logger, mock_logger):
        """Test title method logs border, text, and border."""
        enhanced_logger.title("Run free_streaming")

        assert mock_logger.info.call_count == 3
        assert mock_logger.info.call_args_list[0][0][0] == "=" * len("Run free_streaming")
        assert mock_logger.info.call_args_list[1][0][0] == "Run free_streaming"

    def test_subtitle_custom_char(self, enhanced_logger, mock_logger):
        """Test subtitle method with custom border character."""
        enhanced_logger.subtitle("Checkpoint", char="*")

        assert mock_logger.info.call_args_list[0][0][0] == "*" * len("Checkpoint")

    def test_delegates_to_underlying_logger(self, enhanced_logger, mock_logger):
        """Test that EnhancedLogger delegates level methods and other attributes."""
        enhanced_logger.info("test message")
        enhanced_logger.warning("test warning")
        enhanced_logger.error("test error")
        enhanced_logger.debug("test debug")
        enhanced_logger.exception("test exception")

        assert mock_logger.info.called
        assert mock_logger.warning.called
        assert mock_logger.error.called
        assert mock_logger.debug.called
        assert mock_logger.exception.called

    def test_table_alignment(self, enhanced_logger, mock_logger):
        """Test that columns are right-aligned and floats use 4 significant digits."""
        enhanced_logger.table(["t", "value", "ratio"], [[1.0, 0.123456, None], [2.0, 0.03125, 0.2531]])

        lines = [call.args[0] for call in mock_logger.info.call_args_list]
        assert lines == [
            "t    value   ratio",
            "1   0.1235       -",
            "2  0.03125  0.2531",
        ]

    def test_table_pads_short_rows(self, enhanced_logger, mock_logger):
        """Test that missing cells and booleans are rendered."""
        enhanced_logger.table(["check", "passed", "seconds"], [["pusher", True]])

        assert mock_logger.info.call_args_list[-1].args[0].split() == ["pusher", "yes", "-"]
