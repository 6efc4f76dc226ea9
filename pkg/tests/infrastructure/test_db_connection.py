"""Tests for database connection."""
import os
import sqlite3
from unittest.mock import Mock

import pytest

import infrastructure.db.models  # noqa: F401  registers the runs table
from domain.models.app_config import CatalogConfig
from infrastructure.db.connection import DatabaseConnection


class TestDatabaseConnection:
    """Tests for DatabaseConnection."""

    def test_init_creates_engine(self, temp_db_path):
        """Test that __init__ creates SQLAlchemy engine."""
        catalog_config = CatalogConfig(path=temp_db_path)
        conn = DatabaseConnection(catalog_config, Mock())

        assert conn.config == catalog_config
        assert conn.engine is not None
        assert conn.SessionLocal is not None

    def test_init_creates_parent_directory(self, temp_dir):
        """Test that a missing catalog directory is created."""
        path = os.path.join(temp_dir, "nested", "catalog.db")

        DatabaseConnection(CatalogConfig(path=path), Mock())

        assert os.path.isdir(os.path.join(temp_dir, "nested"))

    def test_is_empty_new_database(self, temp_db_path):
        """Test is_empty returns True for new database."""
        conn = DatabaseConnection(CatalogConfig(path=temp_db_path), Mock())

        assert conn.is_empty() is True

    def test_is_empty_existing_database(self, temp_db_path):
        """Test is_empty returns False once tables exist."""
        conn = DatabaseConnection(CatalogConfig(path=temp_db_path), Mock())
        conn.create_tables()

        assert conn.is_empty() is False

    def test_has_all_tables(self, temp_db_path):
        """Test has_all_tables before and after create_tables."""
        conn = DatabaseConnection(CatalogConfig(path=temp_db_path), Mock())

        assert conn.has_all_tables() is False
        conn.create_tables()
        assert conn.has_all_tables() is True

    def test_get_session(self, temp_db_path):
        """Test get_session returns a session."""
        conn = DatabaseConnection(CatalogConfig(path=temp_db_path), Mock())

        session = conn.get_session()

        assert session is not None
        session.close()

    def test_initialize_empty_database(self, temp_db_path):
        """Test initialize creates tables for empty database."""
        logger = Mock()
        conn = DatabaseConnection(CatalogConfig(path=temp_db_path), logger)

        conn.initialize()

        assert conn.has_all_tables() is True
        logger.info.assert_any_call("Catalog is empty, creating tables...")

    def test_initialize_existing_database(self, temp_db_path):
        """Test initialize accepts a database with the runs table."""
        conn = DatabaseConnection(CatalogConfig(path=temp_db_path), Mock())
        conn.create_tables()

        conn.initialize()

        assert conn.has_all_tables() is True

    def test_initialize_foreign_schema_raises_error(self, temp_db_path):
        """Test initialize raises RuntimeError when the file holds other tables only."""
        with sqlite3.connect(temp_db_path) as raw:
            raw.execute("CREATE TABLE measurements (path TEXT)")
        logger = Mock()
        conn = DatabaseConnection(CatalogConfig(path=temp_db_path), logger)

        with pytest.raises(RuntimeError):
            conn.initialize()

        logger.error.assert_called_once()

    def test_missing_columns(self, temp_db_path):
        """Test that an outdated runs table is reported column by column."""
        with sqlite3.connect(temp_db_path) as raw:
            raw.execute("CREATE TABLE runs (run_dir TEXT PRIMARY KEY, seed INTEGER)")
        conn = DatabaseConnection(CatalogConfig(path=temp_db_path), Mock())

        missing = conn.missing_columns()

        assert "runs.config_digest" in missing
        assert "runs.seed" not in missing
        with pytest.raises(RuntimeError, match="runs.status"):
            conn.initialize()

    def test_session_scope_rolls_back(self, temp_db_path):
        """Test that an error inside session_scope discards the pending rows."""
        from datetime import datetime

        from infrastructure.db.models import RunModel

        conn = DatabaseConnection(CatalogConfig(path=temp_db_path), Mock())
        conn.initialize()
        now = datetime.now()

        with pytest.raises(ValueError):
            with conn.session_scope() as session:
                session.add(RunModel(run_dir="/runs/x", config_digest="0" * 64, seed=1, status="pending",
                                     created_at=now, updated_at=now))
                session.flush()
                raise ValueError("abort")

        with conn.session_scope() as session:
            assert session.query(RunModel).count() == 0
