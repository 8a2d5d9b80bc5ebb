import math

import numpy as np
import pytest
from scipy import stats

from wsnfeedback.estimator import FcBelief, fuse
from wsnfeedback.process import AccuracyChain
from wsnfeedback.simulator import Mod17Config, mod17_posterior, mod17_step, mod17_tune, run_mod17, SimConfig

S_A = 20.0


def test_threshold_probability_identities():
    assert Mod17Config(0.0, 5.0).q == 1.0
    assert Mod17Config(40.0, 5.0).q < 1e-300
    for q in (1e-6, 0.01, 0.3, 0.77, 1.0):
        cfg = Mod17Config.from_q(q, 5.0)
        assert abs(2 * stats.norm.sf(cfg.tau) - q) < 1e-10
    assert math.isinf(Mod17Config.from_q(0.0, 5.0).tau)


def test_everything_censored_with_infinite_threshold_keeps_prior():
    cfg = Mod17Config(math.inf, 8.0)
    mean, var = mod17_posterior(0.3, 0.5, [], [3, 4], [0, 0], np.array([0.5, 1.0]), S_A, cfg)
    assert mean == pytest.approx(0.3, abs=1e-9) and var == pytest.approx(0.5, rel=1e-9)


def test_single_report_matches_kalman():
    cfg = Mod17Config(1.0, 8.0)
    v_post_prev, x_prev, alpha, g, y = 0.2, 0.4, 0.96, 0.8, 0.9
    m = math.sqrt(alpha) * x_prev
    v = 1 - alpha * (1 - v_post_prev)
    mean, var = mod17_posterior(m, v, [(y, g)], [0], [0], np.array([g]), S_A, cfg)
    snr = g * g * S_A * 8.0 / (S_A + 8.0)
    ref = fuse(FcBelief(x_prev, 1.0, v_post_prev), [(y, g, snr)], alpha)
    assert abs(mean - ref.x_hat) < 1e-3 and abs(var - ref.v_post) < 1e-3
    # the quadrature is far tighter than the tolerance
    assert abs(mean - ref.x_hat) < 1e-9 and abs(var - ref.v_post) < 1e-9


def test_censoring_shrinks_and_collision_widens():
    cfg = Mod17Config(1.0, 8.0)
    states = np.array([1.0])
    _, v_cens = mod17_posterior(0.0, 0.5, [], [5], [0], states, S_A, cfg)
    _, v_coll = mod17_posterior(0.0, 0.5, [], [0], [5], states, S_A, cfg)
    assert v_cens < 0.5
    # collided sensors were surprised: mass moves to the tails
    assert v_coll > v_cens


def test_step_collided_sensors_are_uncensored():
    cfg = Mod17Config(0.0, 8.0)  # tau = 0: everybody transmits
    states = np.array([1.0])
    world = dict(x=0.1, alpha=0.96, s_ambient=S_A, states=states, acc=np.zeros(4, dtype=np.int64),
                 noise=np.array([0.1, -0.2, 0.3, 0.0]), u_chan=np.array([0.05, 0.1, 0.6, 0.9]), n_channels=2)
    (_, _), met = mod17_step((0.0, 1.0), cfg, world)
    assert met["n_tx"] == 4 and met["collisions"] == 2


def grid_oracle(eps_per_sn, cost, N=100, B=5, n=400):
    qmax = min(1.0, B / N)

    def best_on(qs, ls):
        Q, L = np.meshgrid(qs, ls, indexing="ij")
        S = np.exp(L)
        val = Q * N * np.exp(-Q * N / B) * S_A * S / (S_A + S)
        val[Q * cost.c_tx + cost.phi * S > eps_per_sn * (1 + 1e-12)] = -np.inf
        i, j = np.unravel_index(np.argmax(val), val.shape)
        return qs[i], ls[j], val[i, j]

    qs, ls = np.linspace(0, qmax, n), np.linspace(math.log(1e-4), math.log(1e3), n)
    for _ in range(5):
        q, l, v = best_on(qs, ls)
        dq, dl = 10 * (qs[1] - qs[0]), 10 * (ls[1] - ls[0])
        qs = np.linspace(max(q - dq, 0), min(q + dq, qmax), n)
        ls = np.linspace(l - dl, l + dl, n)
    return v


@pytest.mark.parametrize("per_sn", [0.05, 0.1, 0.2])
def test_tune_against_grid(cost, per_sn):
    q, sm = mod17_tune(per_sn * 100, cost, S_A, 5, 100)
    assert q * cost.c_tx + cost.phi * sm <= per_sn * (1 + 1e-12)
    val = q * 100 * math.exp(-q * 100 / 5) * S_A * sm / (S_A + sm)
    oracle = grid_oracle(per_sn, cost)
    assert abs(val - oracle) <= 1e-4 * oracle


def test_tune_degenerate_budget(cost):
    q, sm = mod17_tune(1e-9, cost, S_A, 5, 100)
    assert q >= 0 and sm >= 0 and q * cost.c_tx + cost.phi * sm <= 1e-11 * (1 + 1e-9)


def test_short_episode_runs(cost):
    sim = SimConfig(n_sensors=20, scenario="markov-gamma", chain=AccuracyChain.paper_v(), seed=5)
    q, sm = mod17_tune(4.0, cost, S_A, 5, 20)
    p = run_mod17(sim, Mod17Config.from_q(q, sm), slots=200, knob=("epsilon", 4.0))
    assert p.scheme == "mod17" and p.slots == 200
    assert 0 < p.mse < 1 and p.network_cost > 0
