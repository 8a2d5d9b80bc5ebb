"""Monte-Carlo episodes, sweeps and the censoring baseline."""

from .engine import CoordPolicy, DecPolicy, EpisodeResult, SimConfig, TradeoffPoint, Trajectory, batch_se, run_episode
from .mod17 import Mod17Config, QuadratureError, mod17_posterior, mod17_step, mod17_tune, run_mod17
from .sweep import collision_stats, cost_at_mse, match_budget, savings_at_matched_mse, sweep_tradeoff
from .two_state import run_amp, run_na, run_two_state

__all__ = [
    "CoordPolicy", "DecPolicy", "EpisodeResult", "SimConfig", "TradeoffPoint", "Trajectory", "batch_se", "run_episode",
    "Mod17Config", "QuadratureError", "mod17_posterior", "mod17_step", "mod17_tune", "run_mod17",
    "collision_stats", "cost_at_mse", "match_budget", "savings_at_matched_mse", "sweep_tradeoff", "run_amp", "run_na",
    "run_two_state",
]
