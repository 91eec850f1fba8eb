"""
Rank checker service
Numerical rank of the compressed spectrum Jacobian at random real signals
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from loguru import logger
from scipy import linalg as sp_linalg

from src.core.config import settings
from src.schemas.signals import Signal
from src.services.sensing import OperatorKind, build_operator, compose_jacobian
from src.services.spectra import spectrum_jacobian


def numerical_rank(matrix: np.ndarray, rel_tol: Optional[float] = None) -> int:
    """Count singular values with sigma_i >= rel_tol * sigma_1 (0 for the zero matrix)"""
    rel_tol = settings.rank_rel_tol if rel_tol is None else rel_tol
    if not 0 < rel_tol < 1:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")

    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0
    sigma = sp_linalg.svdvals(matrix)
    if sigma[0] == 0:
        return 0
    return int(np.count_nonzero(sigma >= rel_tol * sigma[0]))


def _sigma_ratio(matrix: np.ndarray) -> float:
    sigma = sp_linalg.svdvals(matrix)
    if sigma.size == 0 or sigma[0] == 0:
        return 0.0
    return float(sigma[-1] / sigma[0])


@dataclass
class RankProbeReport:
    """Per-trial ranks of A J(x) and the generic pass statistic"""
    n: int
    q: int
    k: int
    kind: str
    rel_tol: float
    seed: int
    ranks: List[int] = field(default_factory=list)
    real_ranks: List[int] = field(default_factory=list)
    sigma_ratios: List[float] = field(default_factory=list)
    signal_norms: List[float] = field(default_factory=list)
    generic: List[bool] = field(default_factory=list)
    min_rank: int = 0
    passed: bool = False

    @property
    def trials(self) -> int:
        return len(self.ranks)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["trials"] = self.trials
        return data


def probe_injectivity_rank(
    n: int,
    q: int,
    k: int,
    trials: int,
    seed: int,
    kind: OperatorKind = OperatorKind.DENSE_RANDOM,
    rel_tol: Optional[float] = None,
    zero_signal_trials: Sequence[int] = (),
    min_signal_norm: float = 1e-6
) -> RankProbeReport:
    """
    Probe generic full rank of the Jacobian of x -> A M_q(x)

    Args:
        n: Signal length
        q: Spectrum order
        k: Number of measurements
        trials: Number of random (x, A) draws
        seed: Base seed; trial t uses SeedSequence(seed, spawn_key=(t,))
        kind: Operator family for A
        rel_tol: Singular value threshold relative to sigma_1
        zero_signal_trials: Trial indices forced to x = 0
        min_signal_norm: Trials with ||x|| below this are excluded from the pass statistic

    Returns:
        RankProbeReport; passed means K >= N+1 and every generic trial has rank N
    """
    if k < 1:
        raise ValueError(f"K must be positive, got {k}")
    rel_tol = settings.rank_rel_tol if rel_tol is None else rel_tol
    kind = OperatorKind(kind)
    forced = set(zero_signal_trials)

    report = RankProbeReport(n=n, q=q, k=k, kind=kind.value, rel_tol=rel_tol, seed=seed)
    logger.info(f"Rank probe: N={n} q={q} K={k} kind={kind.value} trials={trials}")

    for t in range(trials):
        signal_seed, operator_seed = np.random.SeedSequence(seed, spawn_key=(t,)).generate_state(2, dtype=np.uint64)
        rng = np.random.default_rng(int(signal_seed))
        values = np.zeros(n) if t in forced else rng.standard_normal(n)
        x = Signal.real(values)

        op = build_operator(kind, k, n, q, int(operator_seed))
        composed = compose_jacobian(op, spectrum_jacobian(x, q))
        stacked = np.vstack([composed.real, composed.imag])

        norm = float(np.linalg.norm(values))
        report.ranks.append(numerical_rank(composed, rel_tol))
        report.real_ranks.append(numerical_rank(stacked, rel_tol))
        report.sigma_ratios.append(_sigma_ratio(composed))
        report.signal_norms.append(norm)
        report.generic.append(norm >= min_signal_norm)

    generic_ranks = [r for r, g in zip(report.ranks, report.generic) if g]
    report.min_rank = min(generic_ranks) if generic_ranks else 0
    report.passed = bool(generic_ranks) and k >= n + 1 and report.min_rank == n

    logger.info(f"Rank probe finished: min generic rank {report.min_rank}/{n}, passed={report.passed}")
    return report
