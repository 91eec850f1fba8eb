import math
import os

import pandas as pd
import pytest

from src.core.errors import NonFiniteObjective
from src.schemas.experiments import CSV_COLUMNS, ExperimentKind, ExperimentSpec, SolverConfig, TrialRecord
from src.services.relational_db import TrialStore
from src.services.report_export import load_summary
from workflows import sweep as sweep_module
from workflows.sweep import SweepWorkflow, derive_trial_seeds, run_sweep, run_trial, success_rates

FAST_SOLVER = SolverConfig(num_starts=2, max_iters=200)


def _spec(**overrides):
    data = dict(experiment=ExperimentKind.RANDOM, q=3, n=5, k_values=[3, 8], trials=2, solver=FAST_SOLVER, base_seed=11)
    data.update(overrides)
    return ExperimentSpec(**data)


def _record(k, trial, success):
    return TrialRecord("random", 3, 5, k, trial, 1, 2, 3, 0.0, 0.0 if success else 1.0, success, 1.0)


def test_trial_seeds_are_stable_and_distinct():
    seeds = derive_trial_seeds(7, ExperimentKind.RANDOM, 10, 3)
    assert seeds == derive_trial_seeds(7, ExperimentKind.RANDOM, 10, 3)
    assert len(set(seeds)) == 3
    assert all(0 <= s < 2 ** 64 for s in seeds)

    others = {
        derive_trial_seeds(7, ExperimentKind.SAMPLES, 10, 3),
        derive_trial_seeds(7, ExperimentKind.RANDOM, 11, 3),
        derive_trial_seeds(7, ExperimentKind.RANDOM, 10, 4),
        derive_trial_seeds(8, ExperimentKind.RANDOM, 10, 3),
    }
    assert seeds not in others
    assert len(others) == 4


def test_run_trial_is_reproducible():
    spec = _spec()
    first, second = run_trial(spec, 8, 1), run_trial(spec, 8, 1)
    assert first.identity() == second.identity()
    assert (first.k, first.trial, first.n, first.q) == (8, 1, 5, 3)
    assert first.ms >= 0
    assert first.cause is None
    assert first.error >= 0


def test_run_trial_folds_library_errors(monkeypatch):
    def explode(*args, **kwargs):
        raise NonFiniteObjective("all starts diverged")

    monkeypatch.setattr(sweep_module, "solve", explode)
    record = run_trial(_spec(), 3, 0)
    assert not record.success
    assert math.isnan(record.error) and math.isnan(record.objective)
    assert record.cause == "NonFiniteObjective: all starts diverged"


async def test_serial_run_folds_unexpected_crashes(monkeypatch):
    def crash(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(sweep_module, "solve", crash)
    result = await SweepWorkflow(workers=1).run(_spec(k_values=[3], trials=2))
    assert [(r.k, r.trial) for r in result.records] == [(3, 0), (3, 1)]
    assert all(not r.success and r.cause == "RuntimeError: boom" for r in result.records)
    assert result.table == {3: 0.0}


def test_success_rates_keeps_every_requested_k():
    records = [_record(4, 0, True), _record(4, 1, False), _record(6, 0, True)]
    assert success_rates(records, [2, 4, 6]) == {2: 0.0, 4: 0.5, 6: 1.0}


def test_spec_fills_default_length_and_validates_k():
    assert _spec(n=None).n == 30
    assert _spec(n=None, q=4, k_values=[5]).n == 10
    with pytest.raises(ValueError):
        _spec(k_values=[0, 4])
    with pytest.raises(ValueError):
        _spec(experiment=ExperimentKind.SAMPLES, k_values=[26])
    assert _spec(experiment=ExperimentKind.SAMPLES, k_values=[25]).spectrum_length == 25


async def test_workflow_runs_serially_in_order(tmp_path):
    spec = _spec()
    result = await SweepWorkflow(workers=1, batch_size=3).run(spec, out_dir=tmp_path)

    assert [(r.k, r.trial) for r in result.records] == [(3, 0), (3, 1), (8, 0), (8, 1)]
    assert set(result.table) == {3, 8}
    assert set(result.outputs) == {"csv", "json", "svg"}

    frame = pd.read_csv(result.outputs["csv"])
    assert list(frame.columns) == CSV_COLUMNS
    assert len(frame) == 4

    summary = load_summary(result.outputs["json"])
    assert summary.spec == spec
    assert summary.rates() == result.table
    assert "<svg" in result.outputs["svg"].read_text()


async def test_adding_k_values_does_not_perturb_existing_trials():
    small = await SweepWorkflow(workers=1).run(_spec(k_values=[8]))
    large = await SweepWorkflow(workers=1).run(_spec(k_values=[3, 8]))
    kept = [r.identity() for r in large.records if r.k == 8]
    assert kept == [r.identity() for r in small.records]


async def test_parallel_run_matches_serial_run():
    spec = _spec(trials=3)
    serial = await SweepWorkflow(workers=1).run(spec)
    parallel = await SweepWorkflow(workers=2, batch_size=4).run(spec)
    assert [r.identity() for r in parallel.records] == [r.identity() for r in serial.records]
    assert parallel.table == serial.table


async def test_workflow_records_trials_in_the_store(tmp_path):
    store = TrialStore(f"sqlite:///{tmp_path / 'runs.db'}")
    result = await SweepWorkflow(workers=1, batch_size=2, store=store).run(_spec())

    assert result.session_id is not None
    assert await store.get_session_status(result.session_id) == "completed"
    stored = await store.fetch_trials(result.session_id)
    assert [r.identity() for r in stored] == [r.identity() for r in result.records]


async def test_store_keeps_uint64_seeds_and_nan_errors(tmp_path):
    store = TrialStore(f"sqlite:///{tmp_path / 'ledger.db'}")
    store.create_tables()
    session_id = await store.create_sweep_session(_spec(base_seed=2 ** 64 - 1))
    record = TrialRecord("random", 3, 5, 4, 0, 2 ** 64 - 1, 2 ** 63, 5, math.nan, math.nan, False, 2.0, "ShapeMismatch: x")
    assert await store.record_trials(session_id, [record]) == 1

    (stored,) = await store.fetch_trials(session_id)
    assert stored.identity() == record.identity()
    assert await store.complete_sweep_session(session_id, {4: 0.0}, status="error")
    assert await store.get_session_status(session_id) == "error"
    assert await store.get_session_status("missing") is None


def test_store_requires_a_url():
    with pytest.raises(ValueError):
        TrialStore(None)


def test_run_sweep_writes_outputs(tmp_path):
    result = run_sweep(_spec(k_values=[6]), workers=1, out_dir=tmp_path, excel=True)
    assert set(result.outputs) == {"csv", "json", "svg", "xlsx"}
    assert all(path.exists() for path in result.outputs.values())
    assert result.outputs["csv"].name == "random_q3_N5.csv"


def test_repeated_sweep_is_deterministic():
    spec = _spec(experiment=ExperimentKind.SPECTRA_ROWS, k_values=[4, 7])
    first = run_sweep(spec, workers=1)
    second = run_sweep(spec, workers=1)
    assert [r.identity() for r in first.records] == [r.identity() for r in second.records]


def _rates(experiment, q, k_values, trials=100, n=None):
    spec = ExperimentSpec(experiment=experiment, q=q, n=n, k_values=k_values, trials=trials, base_seed=1)
    return run_sweep(spec, workers=os.cpu_count() or 1).table


@pytest.mark.slow
def test_full_spectrum_inversion_control():
    n = 30
    table = _rates(ExperimentKind.SAMPLES, 3, [n * n], n=n)
    assert table[n * n] >= 0.9


@pytest.mark.slow
@pytest.mark.parametrize("q,n", [(3, 30), (4, 10)])
def test_dense_random_success_curve(q, n):
    table = _rates(ExperimentKind.RANDOM, q, [n // 2, n + 5, 2 * n], n=n)
    assert table[n // 2] <= 0.05
    assert table[n + 5] >= 0.2
    assert table[2 * n] >= 0.8


@pytest.mark.slow
def test_spectra_rows_track_dense_random():
    k_values = [20, 35, 60]
    dense = _rates(ExperimentKind.RANDOM, 3, k_values)
    rows = _rates(ExperimentKind.SPECTRA_ROWS, 3, k_values)
    assert all(abs(rows[k] - dense[k]) <= 0.2 for k in k_values)


@pytest.mark.slow
def test_random_samples_succeed_far_below_full_spectrum():
    k_values = [45, 90]
    dense = _rates(ExperimentKind.RANDOM, 3, k_values)
    samples = _rates(ExperimentKind.SAMPLES, 3, k_values)
    assert samples[90] > 0
    assert all(samples[k] <= dense[k] + 0.15 for k in k_values)


def test_single_measurement_never_succeeds():
    table = run_sweep(_spec(k_values=[1], trials=3), workers=1).table
    assert table == {1: 0.0}


@pytest.mark.slow
def test_full_mask_recovers_most_small_signals():
    spec = ExperimentSpec(experiment=ExperimentKind.SAMPLES, q=3, n=8, k_values=[1, 64], trials=20, base_seed=3)
    table = run_sweep(spec, workers=1).table
    assert table[64] > 0.5
    assert table[64] >= table[1]
