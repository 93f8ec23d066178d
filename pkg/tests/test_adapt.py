import numpy as np
import pytest

from lswave.adapt import StudyRecord, doerfler_mark, fitted_slope, run_study
from lswave.problems import get_problem


def brute_force_minimal_bulk(eta2, theta):
    """Oracle: smallest cardinality of a set carrying theta of the total."""
    srt = np.sort(eta2)[::-1]
    cum = np.cumsum(srt)
    return int(np.argmax(cum >= theta * eta2.sum() - 1e-15)) + 1


def test_doerfler_example():
    marked = doerfler_mark(np.array([4.0, 1.0, 3.0, 2.0]), 0.5)
    assert marked.tolist() == [0, 2]


def test_doerfler_tiny_theta_marks_largest():
    marked = doerfler_mark(np.array([1.0, 5.0, 2.0]), 0.01)
    assert marked.tolist() == [1]


def test_doerfler_all_zero():
    assert doerfler_mark(np.zeros(6), 0.25).tolist() == [0]


def test_doerfler_ties_by_ascending_id():
    marked = doerfler_mark(np.ones(4), 0.6)
    assert marked.tolist() == [0, 1, 2]


def test_doerfler_validation():
    with pytest.raises(ValueError):
        doerfler_mark(np.ones(3), 0.0)
    with pytest.raises(ValueError):
        doerfler_mark(np.ones(3), 1.0)
    with pytest.raises(ValueError):
        doerfler_mark(np.array([1.0, -0.5]), 0.5)


def test_doerfler_random_bulk_and_minimality():
    rng = np.random.default_rng(7)
    for _ in range(200):
        eta2 = rng.random(rng.integers(1, 40)) ** 2
        theta = rng.uniform(0.05, 0.95)
        marked = doerfler_mark(eta2, theta)
        assert eta2[marked].sum() >= theta * eta2.sum() - 1e-12
        assert marked.size == brute_force_minimal_bulk(eta2, theta)
        assert np.unique(marked).size == marked.size


def test_fitted_slope_recovers_power_law():
    records = [StudyRecord(i, n, 2 * n, 3.0 * n ** -0.75)
               for i, n in enumerate([100, 200, 400, 800, 1600])]
    assert fitted_slope(records) == pytest.approx(-0.75, abs=1e-12)
    assert fitted_slope(records, n_points=5) == pytest.approx(-0.75, abs=1e-12)


def test_run_study_uniform_smooth():
    records = run_study(get_problem("smooth1d"), p=1, mode="uniform", max_dofs=2000)
    assert len(records) >= 3
    assert [r.step for r in records] == list(range(len(records)))
    ndofs = [r.n_dofs for r in records]
    assert ndofs == sorted(ndofs)
    assert all(r.n_dofs <= 2000 for r in records)
    etas = [r.eta for r in records]
    assert all(b < a for a, b in zip(etas, etas[1:]))
    assert all(r.err_V is not None and r.err_V > 0 for r in records)
    # uniform refinement quadruples the element count each step
    assert all(b.n_elements == 4 * a.n_elements
               for a, b in zip(records, records[1:]))


def test_run_study_adaptive_jump():
    records = run_study(get_problem("jump1d"), p=1, mode="adaptive", max_dofs=800)
    assert len(records) >= 5
    assert all(b.n_elements > a.n_elements for a, b in zip(records, records[1:]))
    assert all(np.isfinite(r.eta) and r.eta > 0 for r in records)


def test_run_study_pulse_has_no_error_columns():
    records = run_study(get_problem("pulse1d"), p=1, mode="adaptive",
                        max_dofs=400, initial_n=4)
    assert all(r.err_V is None for r in records)
    assert all(r.seconds > 0 for r in records)


def test_run_study_validation():
    with pytest.raises(ValueError):
        run_study(get_problem("smooth1d"), mode="bogus")
    with pytest.raises(ValueError):
        run_study(get_problem("smooth1d"), p=1, max_dofs=3)


def test_run_study_deterministic():
    a = run_study(get_problem("jump1d"), p=1, mode="adaptive", max_dofs=500)
    b = run_study(get_problem("jump1d"), p=1, mode="adaptive", max_dofs=500)
    assert [r.n_dofs for r in a] == [r.n_dofs for r in b]
    assert [r.eta for r in a] == [r.eta for r in b]
    assert [r.err_V for r in a] == [r.err_V for r in b]
