"""
Run ledger service using SQLAlchemy
Records sweep sessions and their trials (SQLite in practice)
"""

import math
import uuid
from contextlib import contextmanager
from datetime import datetime
from typing import Dict, List, Optional

from loguru import logger
from sqlalchemy import create_engine
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import sessionmaker

from src.core.config import settings
from src.schemas.database import Base, SweepSession, TrialRow
from src.schemas.experiments import ExperimentSpec, TrialRecord

class TrialStore:
    """Database service for sweep sessions and trial records"""

    def __init__(self, url: Optional[str] = None):
        self.url = url or settings.results_db_url
        if not self.url:
            raise ValueError("No results database URL configured")
        self.engine = create_engine(self.url, echo=(settings.log_level.upper() == "DEBUG"))
        self.SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=self.engine)

    def create_tables(self):
        """Create all database tables"""
        try:
            Base.metadata.create_all(bind=self.engine)
            logger.info("Results database tables ready")
        except Exception as e:
            logger.error(f"Error creating database tables: {e}")
            raise

    @contextmanager
    def get_session(self):
        """Context manager for database sessions"""
        session = self.SessionLocal()
        try:
            yield session
            session.commit()
        except Exception as e:
            session.rollback()
            logger.error(f"Database session error: {e}")
            raise
        finally:
            session.close()

    async def create_sweep_session(self, spec: ExperimentSpec) -> str:
        """Open a sweep session and return its UUID"""
        session_id = str(uuid.uuid4())
        try:
            with self.get_session() as session:
                session.add(SweepSession(
                    session_id=session_id,
                    experiment=spec.experiment.value,
                    q=spec.q,
                    n=spec.n,
                    base_seed=str(spec.base_seed),
                    spec=spec.model_dump(mode="json"),
                    status="running",
                ))
            logger.info(f"Created sweep session {session_id}")
            return session_id
        except SQLAlchemyError as e:
            logger.error(f"Error creating sweep session: {e}")
            raise

    async def record_trials(self, session_id: str, records: List[TrialRecord]) -> int:
        """Append trial rows to a session"""
        try:
            with self.get_session() as session:
                for record in records:
                    session.add(TrialRow(
                        session_id=session_id,
                        k=record.k,
                        trial=record.trial,
                        seed_signal=str(record.seed_signal),
                        seed_operator=str(record.seed_operator),
                        seed_solver=str(record.seed_solver),
                        objective=_finite_or_none(record.objective),
                        error=_finite_or_none(record.error),
                        success=record.success,
                        ms=record.ms,
                        cause=record.cause,
                    ))
                sweep = session.query(SweepSession).filter(SweepSession.session_id == session_id).one()
                sweep.trials_recorded += len(records)
            return len(records)
        except SQLAlchemyError as e:
            logger.error(f"Error recording trials: {e}")
            raise

    async def complete_sweep_session(self, session_id: str, table: Dict[int, float], status: str = "completed") -> bool:
        """Close a session with its success table"""
        try:
            with self.get_session() as session:
                sweep = session.query(SweepSession).filter(SweepSession.session_id == session_id).first()
                if not sweep:
                    logger.error(f"Sweep session not found: {session_id}")
                    return False
                sweep.status = status
                sweep.success_table = {str(k): rate for k, rate in table.items()}
                sweep.completed_at = datetime.utcnow()
                sweep.duration_seconds = (sweep.completed_at - sweep.started_at).total_seconds()
            return True
        except SQLAlchemyError as e:
            logger.error(f"Error completing sweep session: {e}")
            return False

    async def fetch_trials(self, session_id: str) -> List[TrialRecord]:
        """Trial records of a session, ordered by (K, trial)"""
        with self.get_session() as session:
            sweep = session.query(SweepSession).filter(SweepSession.session_id == session_id).one()
            rows = (
                session.query(TrialRow)
                .filter(TrialRow.session_id == session_id)
                .order_by(TrialRow.k, TrialRow.trial)
                .all()
            )
            return [
                TrialRecord(
                    experiment=sweep.experiment,
                    q=sweep.q,
                    n=sweep.n,
                    k=row.k,
                    trial=row.trial,
                    seed_signal=int(row.seed_signal),
                    seed_operator=int(row.seed_operator),
                    seed_solver=int(row.seed_solver),
                    objective=math.nan if row.objective is None else row.objective,
                    error=math.nan if row.error is None else row.error,
                    success=row.success,
                    ms=row.ms,
                    cause=row.cause,
                )
                for row in rows
            ]

    async def get_session_status(self, session_id: str) -> Optional[str]:
        with self.get_session() as session:
            sweep = session.query(SweepSession).filter(SweepSession.session_id == session_id).first()
            return sweep.status if sweep else None


def _finite_or_none(value: float) -> Optional[float]:
    return value if value is not None and math.isfinite(value) else None
