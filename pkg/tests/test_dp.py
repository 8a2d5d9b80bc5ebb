import numpy as np
import pytest

from wsnfeedback.estimator import mse_floor
from wsnfeedback.policies import PolicyTable, coord_dp_solve, dec_dp_solve, max_snr_coordinated
from wsnfeedback.simulator import CoordPolicy, SimConfig, match_budget, run_episode

ALPHA, S_A, B = 0.96, 20.0, 5


def test_coord_free_sensing_uses_largest_snr(cost, small_grid):
    tab = coord_dp_solve(ALPHA, S_A, cost, B, 0.0, 50, small_grid)
    top = small_grid.lambda_grid(S_A, B)[-1]
    assert np.all(tab.actions["lambda"] == top)


def test_coord_idles_for_large_multiplier(cost, small_grid):
    # any action saves at most 1/(1 - alpha) = 25 in discounted-free MSE; it costs more than lambda
    tab = coord_dp_solve(ALPHA, S_A, cost, B, 26.0, 100, small_grid)
    assert np.all(tab.actions["lambda"] == 0) and np.all(tab.actions["t_active"] == 0)


def test_coord_still_active_at_unit_multiplier(cost, small_grid):
    tab = coord_dp_solve(ALPHA, S_A, cost, B, 1.0, 100, small_grid)
    assert tab.actions["lambda"].max() > 0


def test_coord_actions_are_consistent(cost, small_grid):
    tab = coord_dp_solve(ALPHA, S_A, cost, B, 0.2, 100, small_grid)
    t, sm, lam = tab.actions["t_active"], tab.actions["s_measure"], tab.actions["lambda"]
    with np.errstate(invalid="ignore"):
        snr = np.where(t > 0, t * S_A * sm / (S_A + sm), 0.0)
    np.testing.assert_allclose(snr, lam, rtol=1e-10, atol=1e-12)
    assert lam[-1] > lam[0]


@pytest.mark.parametrize("solver", [coord_dp_solve, dec_dp_solve])
def test_relative_value_iteration_contracts(cost, small_grid, solver):
    tab = solver(ALPHA, S_A, cost, B, 0.3, 100, small_grid)
    assert np.all(np.diff(tab.spans) <= 1e-12)
    assert tab.spans[-1] < 1e-6
    # the gain is the average cost per slot of the greedy policy
    assert 0 < tab.gain < 1 + 0.3 * B * (1 + 0.25 * 1e3)


def test_dec_free_sensing(cost, small_grid):
    tab = dec_dp_solve(ALPHA, S_A, cost, B, 0.0, 30, small_grid)
    assert np.all(tab.actions["zeta"] == 1.0)


def test_dec_idles_for_large_multiplier(cost, small_grid):
    tab = dec_dp_solve(ALPHA, S_A, cost, B, 126.0, 100, small_grid)
    assert np.all(tab.actions["zeta"] == 0) and np.all(tab.actions["s_measure"] == 0)


def test_dec_structure_default_parameters(cost, small_grid):
    tab = dec_dp_solve(ALPHA, S_A, cost, B, 1.0, 100, small_grid)
    z, v = tab.actions["zeta"], tab.v
    assert np.all(z[v < 0.19] == 0)
    assert 0.18 < v[z > 0].min() < 0.22
    assert np.all(np.diff(z) >= -1e-12)
    assert np.all((z >= 0) & (z <= 1))


def test_policy_table_csv_round_trip(cost, small_grid):
    tab = dec_dp_solve(ALPHA, S_A, cost, B, 0.5, 20, small_grid)
    back = PolicyTable.from_csv(tab.to_csv())
    assert back.scheme == "dec"
    np.testing.assert_array_equal(back.v, tab.v)
    np.testing.assert_array_equal(back.value, tab.value)
    for k in tab.actions:
        np.testing.assert_array_equal(back.actions[k], tab.actions[k])
    assert back.params == tab.params and back.gain == tab.gain


def test_lookup_nearest_cell(cost, small_grid):
    tab = coord_dp_solve(ALPHA, S_A, cost, B, 0.2, 20, small_grid)
    h = tab.v[1] - tab.v[0]
    assert tab.lookup("lambda", tab.v[10] + 0.4 * h) == tab.actions["lambda"][10]
    assert tab.lookup("lambda", 5.0) == tab.actions["lambda"][-1]


def test_dp_matches_max_snr_at_anchor_budget(cost, small_grid):
    eps = 3.2361
    cfg = SimConfig(slots=100_000)

    def evaluate(lam):
        tab = coord_dp_solve(ALPHA, S_A, cost, B, lam, 100, small_grid)
        return run_episode(cfg, CoordPolicy.from_table(tab), ("lambda", lam)).point

    p = match_budget(evaluate, eps, lo=1e-3, hi=10.0, rel_tol=0.01)
    assert abs(p.network_cost / eps - 1) <= 0.01
    target = mse_floor(max_snr_coordinated(eps, cost, S_A, B).lambda_bar, ALPHA)
    assert abs(p.mse / target - 1) <= 0.01


def test_dec_load_decreases_with_multiplier(cost, small_grid):
    z = [dec_dp_solve(ALPHA, S_A, cost, B, lam, 100, small_grid).actions["zeta"] for lam in (0.1, 0.3, 1.0, 3.0)]
    for lo, hi in zip(z, z[1:]):
        assert np.all(lo >= hi - 1e-12)
