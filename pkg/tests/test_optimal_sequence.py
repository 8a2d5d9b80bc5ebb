import numpy as np
import pytest

from oracles import fixed_point_floor, simplex_grid_search
from wsnfeedback.policies import breakpoints, optimal_snr_sequence, sequence_cost


def test_horizon_zero():
    res = optimal_snr_sequence(2.5, 0.9, 0)
    assert res.snrs.tolist() == [2.5]
    assert res.r_star == pytest.approx(1 / 3.5, rel=1e-15)


@pytest.mark.parametrize("T", [1, 2, 3])
@pytest.mark.parametrize("lambda_bar", [0.5, 2.0, 10.0])
def test_matches_simplex_grid_search(T, lambda_bar):
    res = optimal_snr_sequence(lambda_bar, 0.9, T)
    oracle, _ = simplex_grid_search(lambda_bar, 0.9, T)
    assert abs(res.r_star - oracle) <= 1e-4 * oracle
    # the reported value is the cost of the reported sequence, and the sequence is feasible
    assert res.r_star == pytest.approx(sequence_cost(res.snrs, 0.9), rel=1e-12)
    assert res.snrs.sum() == pytest.approx((T + 1) * lambda_bar, rel=1e-12)
    assert np.all(res.snrs >= 0)


def test_long_horizon_approaches_floor():
    res = optimal_snr_sequence(6.180, 0.96, 10_000)
    assert abs(res.r_star - fixed_point_floor(6.180, 0.96)) < 1e-3
    assert res.r_star == pytest.approx(sequence_cost(res.snrs, 0.96), rel=1e-10)


def test_beats_constant_sequence():
    for T in (5, 50, 500):
        res = optimal_snr_sequence(3.0, 0.95, T)
        assert res.r_star <= sequence_cost(np.full(T + 1, 3.0), 0.95) + 1e-15


def test_breakpoints_decrease_with_silence():
    l0 = [breakpoints(m, 0.9)[0] for m in range(30)]
    assert np.all(np.diff(l0) < 0)
    assert breakpoints(-1, 0.9) == (np.inf, np.inf)


def test_input_validation():
    with pytest.raises(ValueError):
        optimal_snr_sequence(0.0, 0.9, 3)
    with pytest.raises(ValueError):
        optimal_snr_sequence(1.0, 1.0, 3)


@pytest.mark.parametrize("T", [0, 3, 40, 1000])
def test_value_nonincreasing_in_mean_snr(T):
    r = [optimal_snr_sequence(lam, 0.9, T).r_star for lam in np.geomspace(1e-3, 100, 40)]
    assert np.all(np.diff(r) <= 0)
