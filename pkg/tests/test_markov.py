import math

import numpy as np
import pytest

from wsnfeedback.policies import (
    InfeasibleRuleError,
    PolicyTable,
    coord_dp_solve,
    dec_dp_solve,
    max_snr_coordinated,
    scdp_gap_bound,
    scdp_schedule,
    sddp_rule,
    threshold_rule,
)
from wsnfeedback.process import AccuracyChain
from wsnfeedback.simulator import CoordPolicy, DecPolicy, SimConfig, run_episode

ALPHA, S_A, B = 0.96, 20.0, 5


@pytest.fixture(scope="module")
def coord_table():
    from wsnfeedback.policies import CostModel, DpGrid
    return coord_dp_solve(ALPHA, S_A, CostModel(), B, 0.2, 100, DpGrid(n_v=501))


@pytest.fixture(scope="module")
def dec_table():
    from wsnfeedback.policies import CostModel, DpGrid
    return dec_dp_solve(ALPHA, S_A, CostModel(), B, 0.3, 100, DpGrid(n_v=501, n_zeta=101, n_sm=100))


def test_scdp_all_best_sensors_reproduces_table(coord_table):
    v = 0.6
    sch = scdp_schedule(coord_table, v, np.ones(30))
    t = int(coord_table.lookup("t_active", v))
    assert sch.active.sum() == t and np.all(sch.active[:t])  # ties broken by index
    assert sch.target_snr == coord_table.lookup("lambda", v)
    post = v / (1 + v * sch.target_snr)
    assert sch.next_virtual_v == pytest.approx(1 - ALPHA * (1 - post), abs=1e-15)


def test_scdp_picks_most_accurate(coord_table):
    g = np.array([0.3, 1.0, 0.5, 1.0, 0.9, 0.2])
    sch = scdp_schedule(coord_table, 0.9, g)
    t = int(coord_table.lookup("t_active", 0.9))
    assert set(np.flatnonzero(sch.active)) == set(np.lexsort((np.arange(6), -g))[:t])


def test_scdp_cost_symmetry_markov(cost):
    eps = 3.2361
    chain = AccuracyChain.paper_v()
    cfg = SimConfig(n_sensors=100, scenario="markov-gamma", chain=chain, slots=20_000)
    p = run_episode(cfg, CoordPolicy.max_snr(max_snr_coordinated(eps, cost, S_A, B))).point
    assert abs(p.per_sn_cost / (eps / 100) - 1) <= 0.02


def test_gap_bound_arithmetic():
    bound = scdp_gap_bound(ALPHA, 1000, 1 / 18, B)
    m = 1000 / 18
    assert bound == pytest.approx(math.exp(-((m - 4) ** 2) / (2 * m)) / 0.04, rel=1e-14)
    assert 1e-10 < bound < 1e-8  # about 1e-9
    assert scdp_gap_bound(ALPHA, 20, 1 / 18, B) == math.inf


def test_sddp_threshold_example():
    pi = AccuracyChain.paper_v().stationary
    q = threshold_rule(5 * 0.9 / 100, pi)
    assert q[-1] == pytest.approx(0.81, abs=1e-12)
    assert np.all(q[:-1] == 0)
    assert np.all(threshold_rule(0.0, pi) == 0)
    q = threshold_rule(0.3, pi)
    assert q @ pi == pytest.approx(0.3, abs=1e-15)
    assert np.all(np.diff(q) >= 0)
    with pytest.raises(InfeasibleRuleError):
        threshold_rule(1.2, pi)


def test_sddp_rule_uses_table(dec_table):
    chain = AccuracyChain.paper_v()
    v = 0.8
    rule = sddp_rule(dec_table, v, chain, B, 100)
    assert rule.q @ chain.stationary == pytest.approx(B * dec_table.lookup("zeta", v) / 100, abs=1e-14)
    # marginal activation matches zeta*(V) on every grid cell
    for v, z in zip(dec_table.v, dec_table.actions["zeta"]):
        q = sddp_rule(dec_table, v, chain, B, 100).q
        assert abs(q @ chain.stationary * 100 / B - z) <= 1e-12
    full = PolicyTable("dec", dec_table.v, dec_table.value,
                       {"zeta": np.ones(dec_table.v.size), "s_measure": np.ones(dec_table.v.size)}, dec_table.params)
    with pytest.raises(InfeasibleRuleError):
        sddp_rule(full, v, chain, 5, 4)  # B zeta / N_S = 1.25


def test_sddp_iid_matches_best_gamma(dec_table):
    chain = AccuracyChain.paper_v()
    pol = DecPolicy.from_table(dec_table, "sddp")
    best = run_episode(SimConfig(n_sensors=100), pol).point
    iid = run_episode(SimConfig(n_sensors=100, scenario="iid-gamma", chain=chain), pol).point
    se = math.hypot(best.mse_se, iid.mse_se)
    assert abs(best.mse - iid.mse) <= 2 * se
