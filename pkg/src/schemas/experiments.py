"""
Experiment and solver configuration models, trial records and the sweep summary schema
"""

import enum
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.config import settings
from src.services.sensing import OperatorKind

# Fixed, documented column order of the per-trial CSV
CSV_COLUMNS = [
    "experiment", "q", "N", "K", "trial",
    "seed_signal", "seed_operator", "seed_solver",
    "objective", "error", "success", "ms",
]

DEFAULT_N = {3: 30, 4: 10}


class ExperimentKind(str, enum.Enum):
    """The three success-rate experiments"""
    RANDOM = "random"
    SPECTRA_ROWS = "spectra-rows"
    SAMPLES = "samples"

    @property
    def operator_kind(self) -> OperatorKind:
        return {
            ExperimentKind.RANDOM: OperatorKind.DENSE_RANDOM,
            ExperimentKind.SPECTRA_ROWS: OperatorKind.SPECTRA_ROWS,
            ExperimentKind.SAMPLES: OperatorKind.SAMPLING_MASK,
        }[self]

    @property
    def code(self) -> int:
        """Stable integer used in per-trial seed derivation"""
        return {ExperimentKind.RANDOM: 1, ExperimentKind.SPECTRA_ROWS: 2, ExperimentKind.SAMPLES: 3}[self]


class SolverConfig(BaseModel):
    """Multi-start steepest descent with Armijo backtracking"""
    model_config = ConfigDict(frozen=True)

    num_starts: int = Field(3, ge=1)
    max_iters: int = Field(10000, ge=1)
    grad_tol: float = Field(1e-9, gt=0)
    objective_tol: float = Field(1e-20, gt=0)
    progress_tol: float = Field(1e-12, gt=0)
    initial_step: float = Field(1.0, gt=0)
    shrink: float = Field(0.5, gt=0, lt=1)
    armijo_c: float = Field(1e-4, gt=0, lt=1)
    step_growth: float = Field(2.0, ge=1)
    max_backtracks: int = Field(60, ge=1)
    init_scale: float = Field(1.0, gt=0)
    seed: int = Field(0, ge=0)


class ExperimentSpec(BaseModel):
    """One success-rate sweep over K"""
    model_config = ConfigDict(frozen=True)

    experiment: ExperimentKind
    q: Literal[3, 4]
    n: Optional[int] = Field(None, ge=1)
    k_values: List[int] = Field(..., min_length=1)
    trials: int = Field(100, ge=1)
    solver: SolverConfig = SolverConfig()
    base_seed: int = Field(0, ge=0)
    success_threshold: float = Field(default_factory=lambda: settings.success_threshold, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _default_length(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("n") is None and data.get("q") in DEFAULT_N:
            data = {**data, "n": DEFAULT_N[data["q"]]}
        return data

    @model_validator(mode="after")
    def _check_k_values(self) -> "ExperimentSpec":
        if any(k < 1 for k in self.k_values):
            raise ValueError(f"K values must be positive: {self.k_values}")
        r = self.n ** (self.q - 1)
        if self.experiment is ExperimentKind.SAMPLES and max(self.k_values) > r:
            raise ValueError(f"Random sampling needs K <= N^(q-1) = {r}, got {max(self.k_values)}")
        return self

    @property
    def spectrum_length(self) -> int:
        return self.n ** (self.q - 1)


@dataclass
class TrialRecord:
    """Bookkeeping for one recovery attempt"""
    experiment: str
    q: int
    n: int
    k: int
    trial: int
    seed_signal: int
    seed_operator: int
    seed_solver: int
    objective: float
    error: float
    success: bool
    ms: float
    cause: Optional[str] = None

    def to_row(self) -> Dict[str, Any]:
        """Row keyed by CSV_COLUMNS"""
        return {
            "experiment": self.experiment,
            "q": self.q,
            "N": self.n,
            "K": self.k,
            "trial": self.trial,
            "seed_signal": self.seed_signal,
            "seed_operator": self.seed_operator,
            "seed_solver": self.seed_solver,
            "objective": self.objective,
            "error": self.error,
            "success": self.success,
            "ms": self.ms,
        }

    def identity(self) -> Dict[str, Any]:
        """Everything except wall time, for reproducibility checks"""
        data = asdict(self)
        data.pop("ms")
        # NaN never equals itself; normalize so failed trials compare equal
        for key in ("objective", "error"):
            if isinstance(data[key], float) and math.isnan(data[key]):
                data[key] = "nan"
        return data


class RateRow(BaseModel):
    K: int
    trials: int
    successes: int
    rate: float = Field(..., ge=0, le=1)


class TrialFailure(BaseModel):
    K: int
    trial: int
    cause: str


class SweepSummary(BaseModel):
    """JSON summary of a sweep; mirrored by src/schemas/sweep_summary.schema.json"""
    spec: ExperimentSpec
    table: List[RateRow]
    environment: Dict[str, str]
    seeds: Dict[str, Any]
    failures: List[TrialFailure] = []

    def rates(self) -> Dict[int, float]:
        return {row.K: row.rate for row in self.table}
