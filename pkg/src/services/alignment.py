"""
Orbit-aware recovery error and success classification
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.core.config import settings
from src.core.errors import ShapeMismatch, ZeroTruthSignal
from src.schemas.signals import Signal


@dataclass(frozen=True)
class SuccessCriterion:
    threshold: float = settings.success_threshold

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError(f"Success threshold must be positive, got {self.threshold}")


def _aligned_error(estimate: Signal, truth: Signal, signs: Sequence[int]) -> float:
    if estimate.n != truth.n:
        raise ShapeMismatch(f"Signals have different lengths: {estimate.n} and {truth.n}")
    norm = np.linalg.norm(truth.values)
    if norm == 0:
        raise ZeroTruthSignal("Relative error against the zero signal is undefined")

    # row s holds R_s applied to the estimate
    shifted = np.stack([np.roll(estimate.values, s) for s in range(estimate.n)])
    best = min(np.min(np.linalg.norm(z * shifted - truth.values, axis=1)) for z in signs)
    return float(best / norm)


def bispectrum_relative_error(estimate: Signal, truth: Signal) -> float:
    """min_s ||R_s estimate - truth|| / ||truth||"""
    return _aligned_error(estimate, truth, (1,))


def trispectrum_relative_error(estimate: Signal, truth: Signal) -> float:
    """min_{s, z = ±1} ||z R_s estimate - truth|| / ||truth||"""
    return _aligned_error(estimate, truth, (1, -1))


def relative_error(estimate: Signal, truth: Signal, q: int) -> float:
    """Sign flips are symmetries of real signals only for even q"""
    if q % 2 == 0:
        return trispectrum_relative_error(estimate, truth)
    return bispectrum_relative_error(estimate, truth)


def is_success(err: float, criterion: SuccessCriterion = SuccessCriterion()) -> bool:
    """Success means the error dropped strictly below the threshold"""
    if err < 0:
        raise ValueError(f"Error must be non-negative, got {err}")
    return bool(err < criterion.threshold)
