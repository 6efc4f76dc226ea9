"""SQLAlchemy database models."""
from sqlalchemy import Column, DateTime, Index, Integer, String, Text

from infrastructure.db.connection import Base


class RunModel(Base):
    """SQLAlchemy model for the runs table."""
    __tablename__ = "runs"

    run_dir = Column(String(1000), primary_key=True, nullable=False)
    config_digest = Column(String(64), nullable=False)
    seed = Column(Integer, nullable=False)
    status = Column(String(20), nullable=False, default="pending")
    error_message = Column(Text, nullable=True)
    created_at = Column(DateTime, nullable=False)
    updated_at = Column(DateTime, nullable=False)

    __table_args__ = (
        Index("idx_run_status", "status"),
        Index("idx_run_digest", "config_digest"),
    )
