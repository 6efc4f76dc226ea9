"""Catalog database connection."""
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List

from sqlalchemy import create_engine, event, inspect
from sqlalchemy.orm import Session, declarative_base, sessionmaker

from domain.models.app_config import CatalogConfig
from domain.ports.logger import AppLogger

Base = declarative_base()


def _sqlite_pragmas(dbapi_connection, _record) -> None:
    # analyze runs may read the catalog while a run stage writes it
    cursor = dbapi_connection.cursor()
    cursor.execute("PRAGMA journal_mode=WAL")
    cursor.execute("PRAGMA foreign_keys=ON")
    cursor.close()


class DatabaseConnection:
    """Engine and sessions of the SQLite run catalog."""

    def __init__(self, catalog_config: CatalogConfig, logger: AppLogger):
        """
        Creates the engine; the parent directory of the catalog file is created if needed.

        Args:
            catalog_config: Catalog configuration object
            logger: Application logger
        """
        self.config = catalog_config
        self.logger = logger
        Path(catalog_config.path).parent.mkdir(parents=True, exist_ok=True)
        self.engine = create_engine(f"sqlite:///{catalog_config.path}", connect_args={"check_same_thread": False})
        event.listen(self.engine, "connect", _sqlite_pragmas)
        self.SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=self.engine)

    def is_empty(self) -> bool:
        """True when the catalog file does not exist or holds no tables."""
        if not os.path.exists(self.config.path):
            return True
        return not inspect(self.engine).get_table_names()

    def missing_columns(self) -> List[str]:
        """'table' or 'table.column' entries the mapped schema needs and the file lacks."""
        inspector = inspect(self.engine)
        existing = set(inspector.get_table_names())
        missing = []
        for name, table in sorted(Base.metadata.tables.items()):
            if name not in existing:
                missing.append(name)
                continue
            columns = {column["name"] for column in inspector.get_columns(name)}
            missing.extend(f"{name}.{column.name}" for column in table.columns if column.name not in columns)
        return missing

    def has_all_tables(self) -> bool:
        return not self.missing_columns()

    def create_tables(self):
        """Creates every mapped table; only called on an empty catalog."""
        Base.metadata.create_all(bind=self.engine)

    def get_session(self) -> Session:
        return self.SessionLocal()

    @contextmanager
    def session_scope(self) -> Iterator[Session]:
        """Session committed on success, rolled back on error, always closed."""
        session = self.get_session()
        try:
            yield session
            session.commit()
        except Exception:
            session.rollback()
            raise
        finally:
            session.close()

    def initialize(self):
        """
        Creates the tables of an empty catalog and validates an existing one.

        Raises:
            RuntimeError: If an existing catalog lacks tables or columns
        """
        self.logger.info("Initializing run catalog...")

        if self.is_empty():
            self.logger.info("Catalog is empty, creating tables...")
            self.create_tables()
        else:
            missing = self.missing_columns()
            if missing:
                error_msg = (
                    f"Catalog database {self.config.path} does not match the run schema "
                    f"(missing {', '.join(missing)}). Use another RVM_CATALOG_PATH or an empty file."
                )
                self.logger.error(error_msg)
                raise RuntimeError(error_msg)

        with self.session_scope():
            pass
        self.logger.info(f"Run catalog ready at {self.config.path}")
