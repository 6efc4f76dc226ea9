"""SQL implementation of the run catalog."""
from typing import List, Optional

from domain.models.run_record import RunRecord, RunStatus
from domain.ports.run_catalog import RunCatalog
from infrastructure.db.connection import DatabaseConnection
from infrastructure.db.models import RunModel

# Columns rewritten when a run directory is catalogued again; created_at is kept
_UPDATABLE = ("config_digest", "seed", "status", "error_message", "updated_at")


def _to_record(model: RunModel) -> RunRecord:
    return RunRecord(
        run_dir=model.run_dir,
        config_digest=model.config_digest,
        seed=model.seed,
        status=RunStatus(model.status),
        error_message=model.error_message,
        created_at=model.created_at,
        updated_at=model.updated_at,
    )


def _column_values(record: RunRecord) -> dict:
    values = record.model_dump()
    values["status"] = record.status.value
    return values


class RunCatalogSQL(RunCatalog):
    """Run catalog stored in the SQLite `runs` table."""

    def __init__(self, db_connection: DatabaseConnection):
        """
        Initializes the catalog.

        Args:
            db_connection: Initialized catalog connection
        """
        self.db_connection = db_connection

    def find_by_run_dir(self, run_dir: str) -> Optional[RunRecord]:
        with self.db_connection.session_scope() as session:
            model = session.get(RunModel, run_dir)
            return _to_record(model) if model else None

    def save(self, record: RunRecord) -> RunRecord:
        """Inserts a record, or updates the row of its run directory."""
        values = _column_values(record)
        with self.db_connection.session_scope() as session:
            model = session.get(RunModel, record.run_dir)
            if model is None:
                model = RunModel(**values)
                session.add(model)
            else:
                for key in _UPDATABLE:
                    setattr(model, key, values[key])
            session.flush()
            return _to_record(model)

    def list_runs(self) -> List[RunRecord]:
        """Every catalogued run, oldest first."""
        with self.db_connection.session_scope() as session:
            return [_to_record(m) for m in session.query(RunModel).order_by(RunModel.created_at).all()]
