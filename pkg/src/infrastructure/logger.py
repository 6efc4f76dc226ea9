"""Process logging: one console handler on the root logger, named loggers with banners and tables."""
import inspect
import logging
import os
from typing import Any, Dict, Optional, Sequence

from domain.ports.logger import AppLogger

DEFAULT_LOGGER_NAME = "rvm-asymptotics"
LOG_FORMAT = "%(asctime)s (%(name)s) %(levelname)s | %(message)s"
DATE_FORMAT = "%Y-%m-%dT%H:%M:%S%z"


def _level(level: str) -> int:
    value = getattr(logging, str(level).upper(), None)
    return value if isinstance(value, int) else logging.INFO


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def _forward(level: str):
    def emit(self, msg: str, *args, **kwargs) -> None:
        getattr(self._logger, level)(msg, *args, **kwargs)
    emit.__name__ = level
    return emit


class EnhancedLogger(AppLogger):
    """Wraps a logging.Logger; unknown attributes resolve on the wrapped logger."""

    info = _forward("info")
    warning = _forward("warning")
    error = _forward("error")
    debug = _forward("debug")

    def __init__(self, logger: logging.Logger):
        self._logger = logger

    def __getattr__(self, name):
        return getattr(self._logger, name)

    def _banner(self, text: str, char: str) -> None:
        rule = char * len(text)
        for line in (rule, text, rule):
            self._logger.info(line)

    def title(self, text: str, char: str = "=") -> None:
        self._banner(text, char)

    def subtitle(self, text: str, char: str = "-") -> None:
        self._banner(text, char)

    def table(self, headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
        """
        One log line per row, columns right-aligned and separated by two spaces.

        Rows shorter than `headers` are padded with '-'.
        """
        cells = [[_cell(v) for v in row] + ["-"] * (len(headers) - len(row)) for row in rows]
        widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(headers)]
        for row in [list(headers)] + cells:
            self._logger.info("  ".join(c.rjust(w) for c, w in zip(row, widths)))


class Logger:
    """Registry of EnhancedLogger instances keyed by name."""

    _enhanced_loggers: Dict[str, EnhancedLogger] = {}
    _root_logger_configured: bool = False

    @staticmethod
    def _configure_root_logger(level: str) -> None:
        """Attach the console handler once; later calls are no-ops."""
        if Logger._root_logger_configured:
            return
        root = logging.getLogger()
        if not root.handlers:
            handler = logging.StreamHandler()
            handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
            root.addHandler(handler)
            root.setLevel(_level(level))
        Logger._root_logger_configured = True

    @staticmethod
    def _caller_name() -> Optional[str]:
        frame = inspect.currentframe()
        caller = frame.f_back.f_back if frame and frame.f_back else None
        if caller is None:
            return None
        module = inspect.getmodule(caller)
        return module.__name__ if module else caller.f_globals.get("__name__")

    @staticmethod
    def get_logger(name: Optional[str] = None, level: Optional[str] = None) -> EnhancedLogger:
        """
        Cached logger for `name`, defaulting to the calling module.

        Args:
            name: Logger name
            level: Logging level; RVM_LOG_LEVEL, then INFO, when omitted
        """
        level = level or os.getenv("RVM_LOG_LEVEL", "INFO")
        Logger._configure_root_logger(level)
        if not name:
            try:
                name = Logger._caller_name()
            except Exception:
                name = None
        name = name or DEFAULT_LOGGER_NAME
        cached = Logger._enhanced_loggers.get(name)
        if cached is None:
            std = logging.getLogger(name)
            std.setLevel(_level(level))
            cached = Logger._enhanced_loggers[name] = EnhancedLogger(std)
        return cached
