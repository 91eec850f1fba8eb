import numpy as np
import pytest

from src.services.rank_checker import numerical_rank, probe_injectivity_rank
from src.services.sensing import OperatorKind


def test_numerical_rank_examples():
    assert numerical_rank(np.eye(3)) == 3
    assert numerical_rank(np.zeros((4, 2))) == 0
    assert numerical_rank(np.zeros((0, 3))) == 0
    assert numerical_rank(np.diag([1.0, 1e-3, 1e-12])) == 2
    assert numerical_rank(np.diag([1.0, 1e-3, 1e-12]), rel_tol=1e-2) == 1


def test_numerical_rank_of_outer_product(rng):
    u, v = rng.standard_normal(6), rng.standard_normal(4)
    assert numerical_rank(np.outer(u, v)) == 1


def test_numerical_rank_rejects_bad_tolerance():
    for rel_tol in (0.0, 1.0, -1e-3):
        with pytest.raises(ValueError):
            numerical_rank(np.eye(2), rel_tol=rel_tol)


@pytest.mark.parametrize("n,q", [(n, 3) for n in range(5, 13)] + [(n, 4) for n in range(4, 9)])
def test_generic_rank_with_n_plus_one_measurements(n, q):
    report = probe_injectivity_rank(n, q, n + 1, trials=50, seed=2024)
    assert report.trials == 50
    assert report.passed
    assert report.min_rank == n
    assert all(rank == n for rank in report.ranks)


def test_forced_zero_trial_is_reported_but_not_generic():
    report = probe_injectivity_rank(6, 3, 7, trials=5, seed=1, zero_signal_trials=[2])
    assert report.ranks[2] == 0
    assert report.real_ranks[2] == 0
    assert report.generic == [True, True, False, True, True]
    assert report.passed


def test_all_zero_trials_cannot_pass():
    report = probe_injectivity_rank(4, 3, 5, trials=2, seed=0, zero_signal_trials=[0, 1])
    assert report.min_rank == 0
    assert not report.passed


def test_too_few_measurements_cannot_pass():
    report = probe_injectivity_rank(6, 3, 6, trials=5, seed=0)
    assert not report.passed


def test_full_sampling_mask_has_full_rank():
    report = probe_injectivity_rank(5, 3, 25, trials=10, seed=3, kind=OperatorKind.SAMPLING_MASK)
    assert report.passed
    assert report.kind == "sampling-mask"


def test_rank_grows_with_measurements():
    ranks = [min(probe_injectivity_rank(6, 3, k, trials=5, seed=9).ranks) for k in range(1, 9)]
    assert ranks == sorted(ranks)
    assert ranks[0] == 1
    assert ranks[-1] == 6


def test_probe_is_deterministic_and_serializable():
    first = probe_injectivity_rank(5, 3, 6, trials=4, seed=77)
    second = probe_injectivity_rank(5, 3, 6, trials=4, seed=77)
    assert first.to_dict() == second.to_dict()
    data = first.to_dict()
    assert data["trials"] == 4
    assert len(data["sigma_ratios"]) == 4
    assert all(0 < ratio <= 1 for ratio in data["sigma_ratios"])


def test_probe_rejects_non_positive_k():
    with pytest.raises(ValueError):
        probe_injectivity_rank(5, 3, 0, trials=1, seed=0)
