"""
Diagnostics Workflow - rank probe and analytic recovery demo
"""

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger

from src.core.errors import HosRecoverError, OutputWriteError
from src.services.alignment import bispectrum_relative_error
from src.services.analytic_recovery import forward_construct, recursive_recover, select_entries
from src.services.rank_checker import RankProbeReport, probe_injectivity_rank
from src.services.sensing import OperatorKind


@dataclass
class AnalyticDemoReport:
    """Errors of recursive recovery on forward-constructed signals"""
    n: int
    q: int
    seed: int
    entries_consumed: int
    errors: List[float] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def max_error(self) -> float:
        return max(self.errors) if self.errors else float("nan")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["max_error"] = self.max_error
        return data


def run_analytic_demo(n: int, trials: int = 100, seed: int = 0, q: int = 3) -> AnalyticDemoReport:
    """
    Recover forward-constructed signals from N-2 spectrum entries and the mean

    Args:
        n: Signal length
        trials: Number of constructed signals
        seed: Seed of the construction stream
        q: 3 (bispectrum entries) or 4 (trispectrum entries)

    Returns:
        AnalyticDemoReport with one aligned error per successful recovery
    """
    logger.info(f"Analytic recovery demo: N={n} q={q} trials={trials}")
    rng = np.random.default_rng(seed)
    report = AnalyticDemoReport(n=n, q=q, seed=seed, entries_consumed=max(n - 2, 0))
    started = time.perf_counter()

    for t in range(trials):
        truth = forward_construct(n, rng)
        try:
            estimate = recursive_recover(select_entries(truth, q))
            report.errors.append(bispectrum_relative_error(estimate, truth))
        except HosRecoverError as e:
            logger.warning(f"Analytic recovery #{t} failed: {e}")
            report.failures.append(f"{type(e).__name__}: {e}")

    report.seconds = time.perf_counter() - started
    logger.info(f"Analytic demo finished: max error {report.max_error:.3e}, {len(report.failures)} failures")
    return report


def run_rank_probe(
    n: int,
    q: int,
    k: int,
    trials: int,
    seed: int,
    kind: OperatorKind = OperatorKind.DENSE_RANDOM,
    rel_tol: Optional[float] = None,
    out_file: Optional[Path] = None
) -> RankProbeReport:
    """Run the rank probe and optionally write its JSON report"""
    report = probe_injectivity_rank(n, q, k, trials, seed, kind=kind, rel_tol=rel_tol)
    if out_file is not None:
        write_json(report.to_dict(), Path(out_file))
    return report


def write_json(data: Dict[str, Any], output_file: Path) -> Path:
    try:
        output_file.parent.mkdir(parents=True, exist_ok=True)
        with open(output_file, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, default=str)
        logger.info(f"Report written to {output_file}")
        return output_file
    except OSError as e:
        logger.error(f"Error writing report: {e}")
        raise OutputWriteError(output_file, e) from e
