"""
Database schemas using SQLAlchemy
Optional run ledger: one row per sweep session and one per trial
"""

from datetime import datetime

from sqlalchemy import JSON, Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()

class SweepSession(Base):
    """Track sweeps for auditing and later re-aggregation"""
    __tablename__ = "sweep_sessions"

    id = Column(Integer, primary_key=True, autoincrement=True)
    session_id = Column(String(36), unique=True, nullable=False, index=True)  # UUID

    # Sweep definition
    experiment = Column(String(32), nullable=False, index=True)
    q = Column(Integer, nullable=False)
    n = Column(Integer, nullable=False)
    base_seed = Column(String(20), nullable=False)  # uint64 does not fit a signed BIGINT
    spec = Column(JSON, nullable=False)

    # Results summary
    trials_recorded = Column(Integer, default=0, nullable=False)
    success_table = Column(JSON, nullable=True)

    # Status and timing
    status = Column(String(50), default="running", nullable=False)
    started_at = Column(DateTime, default=datetime.utcnow, nullable=False)
    completed_at = Column(DateTime, nullable=True)
    duration_seconds = Column(Float, nullable=True)

    trials = relationship("TrialRow", back_populates="session", cascade="all, delete-orphan")

class TrialRow(Base):
    """One recovery attempt"""
    __tablename__ = "trials"

    id = Column(Integer, primary_key=True, autoincrement=True)
    session_id = Column(String(36), ForeignKey("sweep_sessions.session_id"), nullable=False, index=True)

    k = Column(Integer, nullable=False, index=True)
    trial = Column(Integer, nullable=False)

    seed_signal = Column(String(20), nullable=False)
    seed_operator = Column(String(20), nullable=False)
    seed_solver = Column(String(20), nullable=False)

    objective = Column(Float, nullable=True)
    error = Column(Float, nullable=True)
    success = Column(Boolean, nullable=False)
    ms = Column(Float, nullable=False)
    cause = Column(Text, nullable=True)

    session = relationship("SweepSession", back_populates="trials")
