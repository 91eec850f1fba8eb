import numpy as np
import pytest

from src.core.config import settings


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _quiet_settings(monkeypatch):
    # keep test runs from writing log files or touching a configured ledger
    monkeypatch.setattr(settings, "log_file", None)
    monkeypatch.setattr(settings, "results_db_url", None)
