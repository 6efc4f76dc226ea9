"""Process settings read from RVM_* environment variables."""
import os
from typing import Callable, Dict, Optional

from pydantic import BaseModel

from domain.models.app_config import AppConfig, CatalogConfig, LoggerConfig, VerifyConfig, WorkersConfig
from infrastructure.logger import DEFAULT_LOGGER_NAME
from infrastructure.utils import to_float, to_int

DEFAULT_CATALOG_PATH = "data/catalog.db"
DEFAULT_BUDGET_MINUTES = 10.0


def _workers_from_env() -> WorkersConfig:
    raw = os.getenv("RVM_WORKERS")
    return WorkersConfig(count=to_int(raw, default=0) if raw else None)


def _catalog_from_env() -> CatalogConfig:
    path = os.getenv("RVM_CATALOG_PATH", DEFAULT_CATALOG_PATH)
    if not path.endswith(".db"):
        path = os.path.join(path, os.path.basename(DEFAULT_CATALOG_PATH))
    return CatalogConfig(path=path)


def _logger_from_env() -> LoggerConfig:
    return LoggerConfig(
        name=os.getenv("RVM_LOGGER_NAME", DEFAULT_LOGGER_NAME),
        level=os.getenv("RVM_LOG_LEVEL", "INFO"),
    )


def _verify_from_env() -> VerifyConfig:
    budget = to_float(os.getenv("RVM_VERIFY_BUDGET_MINUTES"), default=DEFAULT_BUDGET_MINUTES)
    return VerifyConfig(budget_minutes=budget)


_LOADERS: Dict[str, Callable[[], BaseModel]] = {
    "workers": _workers_from_env,
    "catalog": _catalog_from_env,
    "logger": _logger_from_env,
    "verify": _verify_from_env,
}


class Config:
    """
    Process-wide settings singleton.

    Each AppConfig section is built from the environment the first time it is read
    and cached until `reset`.
    """

    _instance: Optional['Config'] = None
    _app_config: Optional[AppConfig] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    @classmethod
    def load(cls) -> 'Config':
        return cls()

    @classmethod
    def reset(cls) -> None:
        """Drop cached sections; the next access reads the environment again."""
        cls._app_config = None

    def _section(self, name: str):
        if Config._app_config is None:
            Config._app_config = AppConfig()
        if getattr(Config._app_config, name) is None:
            setattr(Config._app_config, name, _LOADERS[name]())
        return getattr(Config._app_config, name)

    @property
    def workers(self) -> WorkersConfig:
        return self._section("workers")

    @property
    def catalog(self) -> CatalogConfig:
        return self._section("catalog")

    @property
    def logger(self) -> LoggerConfig:
        return self._section("logger")

    @property
    def verify(self) -> VerifyConfig:
        return self._section("verify")

    def load_all(self) -> AppConfig:
        for name in _LOADERS:
            self._section(name)
        return Config._app_config

    def log_config(self, logger) -> None:
        workers = self.workers.count or "detected cores"
        logger.info("Process settings:")
        logger.info(f"  - Catalog path: {self.catalog.path}")
        logger.info(f"  - Workers: {workers}")
        logger.info(f"  - Log level: {self.logger.level}")
        logger.info(f"  - Verification budget: {self.verify.budget_minutes:g} minutes")
