"""
Sweep Workflow - success-rate experiments over K
Orchestrates signal draws, operator construction, inversion, alignment, exports and the run ledger
"""

import asyncio
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from src.core.config import settings
from src.core.errors import HosRecoverError
from src.schemas.experiments import ExperimentKind, ExperimentSpec, TrialRecord
from src.schemas.signals import Signal
from src.services.alignment import SuccessCriterion, is_success, relative_error
from src.services.relational_db import TrialStore
from src.services.report_export import ReportExporter
from src.services.sensing import build_operator, measure
from src.services.solver import solve


def derive_trial_seeds(base_seed: int, experiment: ExperimentKind, k: int, trial: int) -> Tuple[int, int, int]:
    """
    Per-trial (signal, operator, solver) seeds

    SeedSequence(entropy=base_seed, spawn_key=(experiment_code, K, trial)), so
    adding K values or trials never perturbs existing ones.
    """
    words = np.random.SeedSequence(base_seed, spawn_key=(experiment.code, k, trial)).generate_state(3, dtype=np.uint64)
    return int(words[0]), int(words[1]), int(words[2])


def run_trial(spec: ExperimentSpec, k: int, trial_index: int) -> TrialRecord:
    """
    One noiseless recovery attempt

    Draws x ~ N(0, I), builds the operator, forms y = A M_q(x), solves and
    scores the orbit-aligned error. Library errors become a failed record
    carrying the cause.
    """
    seed_signal, seed_operator, seed_solver = derive_trial_seeds(spec.base_seed, spec.experiment, k, trial_index)
    started = time.perf_counter()

    objective = math.nan
    error = math.nan
    success = False
    cause: Optional[str] = None

    try:
        truth = Signal.real(np.random.default_rng(seed_signal).standard_normal(spec.n))
        op = build_operator(spec.experiment.operator_kind, k, spec.n, spec.q, seed_operator)
        y = measure(op, truth)

        cfg = spec.solver.model_copy(update={"seed": seed_solver})
        result = solve(op, y, spec.n, spec.q, cfg)

        objective = result.objective
        error = relative_error(result.estimate, truth, spec.q)
        success = is_success(error, SuccessCriterion(spec.success_threshold))
    except HosRecoverError as e:
        logger.warning(f"Trial K={k} #{trial_index} failed: {e}")
        cause = f"{type(e).__name__}: {e}"

    return TrialRecord(
        experiment=spec.experiment.value,
        q=spec.q,
        n=spec.n,
        k=k,
        trial=trial_index,
        seed_signal=seed_signal,
        seed_operator=seed_operator,
        seed_solver=seed_solver,
        objective=objective,
        error=error,
        success=success,
        ms=(time.perf_counter() - started) * 1000.0,
        cause=cause,
    )


def success_rates(records: List[TrialRecord], k_values: Optional[List[int]] = None) -> Dict[int, float]:
    """Success rate per K, sorted by K"""
    totals: Dict[int, List[int]] = {k: [0, 0] for k in (k_values or [])}
    for record in records:
        totals.setdefault(record.k, [0, 0])
        totals[record.k][0] += 1
        totals[record.k][1] += int(record.success)
    return {k: (s / t if t else 0.0) for k, (t, s) in sorted(totals.items())}


@dataclass
class SweepResult:
    """Outcome of a sweep"""
    spec: ExperimentSpec
    table: Dict[int, float]
    records: List[TrialRecord]
    session_id: Optional[str] = None
    outputs: Dict[str, Path] = field(default_factory=dict)


class SweepWorkflow:
    """Main workflow for running a success-rate sweep"""

    def __init__(
        self,
        workers: Optional[int] = None,
        batch_size: Optional[int] = None,
        store: Optional[TrialStore] = None
    ):
        self.workers = max(1, workers or settings.workers)
        self.batch_size = max(1, batch_size or settings.batch_size)
        self.store = store
        self.exporter = ReportExporter()

    async def run(
        self,
        spec: ExperimentSpec,
        out_dir: Optional[Path] = None,
        excel: bool = False
    ) -> SweepResult:
        """
        Run every (K, trial) unit of a sweep

        Args:
            spec: Sweep specification
            out_dir: Where to write CSV/JSON/SVG; nothing is written when None
            excel: Also write an Excel workbook

        Returns:
            SweepResult with the success table and records sorted by (K, trial)
        """
        k_values = sorted(set(spec.k_values))
        units = [(k, t) for k in k_values for t in range(spec.trials)]
        logger.info(
            f"Starting {spec.experiment.value} sweep: q={spec.q} N={spec.n} "
            f"K={k_values} trials={spec.trials} workers={self.workers}"
        )
        start_time = time.perf_counter()

        session_id = None
        if self.store is not None:
            self.store.create_tables()
            session_id = await self.store.create_sweep_session(spec)

        records: List[TrialRecord] = []
        try:
            executor = ProcessPoolExecutor(max_workers=self.workers) if self.workers > 1 else None
            try:
                for i in range(0, len(units), self.batch_size):
                    batch = units[i:i + self.batch_size]
                    batch_records = await self._process_batch(spec, batch, executor)
                    records.extend(batch_records)
                    if self.store is not None:
                        await self.store.record_trials(session_id, batch_records)
                    logger.info(f"Processed batch {i // self.batch_size + 1}/{(len(units) - 1) // self.batch_size + 1}")
            finally:
                if executor is not None:
                    executor.shutdown()
        except Exception as e:
            logger.error(f"Sweep workflow failed: {e}")
            if self.store is not None:
                await self.store.complete_sweep_session(session_id, success_rates(records), status="error")
            raise

        records.sort(key=lambda r: (r.k, r.trial))
        table = success_rates(records, k_values)
        result = SweepResult(spec=spec, table=table, records=records, session_id=session_id)

        if self.store is not None:
            await self.store.complete_sweep_session(session_id, table)
        if out_dir is not None:
            result.outputs = self.exporter.export_all(spec, table, records, Path(out_dir), excel=excel)

        duration = time.perf_counter() - start_time
        logger.info(f"Sweep completed in {duration:.2f} seconds")
        for k, rate in table.items():
            logger.info(f"K={k}: success rate {rate:.3f}")
        return result

    async def _process_batch(
        self,
        spec: ExperimentSpec,
        batch: List[Tuple[int, int]],
        executor: Optional[ProcessPoolExecutor]
    ) -> List[TrialRecord]:
        """Run a batch of units, in-process and in order when serial"""
        if executor is None:
            batch_records = []
            for k, t in batch:
                try:
                    batch_records.append(run_trial(spec, k, t))
                except Exception as e:
                    batch_records.append(_crash_record(spec, k, t, e))
            return batch_records

        loop = asyncio.get_running_loop()
        tasks = [loop.run_in_executor(executor, run_trial, spec, k, t) for k, t in batch]
        results = await asyncio.gather(*tasks, return_exceptions=True)

        batch_records = []
        for (k, t), result in zip(batch, results):
            if isinstance(result, Exception):
                result = _crash_record(spec, k, t, result)
            batch_records.append(result)
        return batch_records


def _crash_record(spec: ExperimentSpec, k: int, trial: int, exc: Exception) -> TrialRecord:
    # trial crashed outside the library's error handling
    logger.error(f"Trial K={k} #{trial} crashed: {exc}")
    seeds = derive_trial_seeds(spec.base_seed, spec.experiment, k, trial)
    return TrialRecord(
        spec.experiment.value, spec.q, spec.n, k, trial, *seeds,
        objective=math.nan, error=math.nan, success=False, ms=0.0,
        cause=f"{type(exc).__name__}: {exc}",
    )


def run_sweep(
    spec: ExperimentSpec,
    workers: Optional[int] = None,
    out_dir: Optional[Path] = None,
    db_url: Optional[str] = None,
    excel: bool = False
) -> SweepResult:
    """
    Synchronous wrapper for the sweep workflow

    Args:
        spec: Sweep specification
        workers: Process count; 1 runs serially in (K, trial) order
        out_dir: Output directory for CSV/JSON/SVG
        db_url: SQLAlchemy URL of the run ledger (settings.results_db_url by default)
        excel: Also write an Excel workbook

    Returns:
        SweepResult
    """
    db_url = db_url or settings.results_db_url
    store = TrialStore(db_url) if db_url else None
    workflow = SweepWorkflow(workers=workers, store=store)
    return asyncio.run(workflow.run(spec, out_dir=out_dir, excel=excel))
