"""Sensing-transmission policies: closed forms, DP solvers and Markov-accuracy wrappers."""

from .closed_form import (
    CoordAction,
    CostModel,
    MaxSnrCoordinated,
    OverheadModel,
    TradeoffKnobs,
    amp_stationary_metrics,
    amp_zeta,
    lambda_threshold,
    max_snr_coordinated,
    max_snr_decentralized,
    mp_zeta,
    mse_lower_bound,
    na_closed_form,
    overhead_costs,
    snr_allocation,
)
from .dp import DpGrid, PolicyTable, coord_dp_solve, dec_dp_solve
from .markov import DecRule, InfeasibleRuleError, scdp_gap_bound, scdp_schedule, sddp_rule, threshold_rule
from .optimal_sequence import OptimalSequence, breakpoints, optimal_snr_sequence, sequence_cost

__all__ = [
    "CoordAction", "CostModel", "MaxSnrCoordinated", "OverheadModel", "TradeoffKnobs",
    "amp_stationary_metrics", "amp_zeta", "lambda_threshold", "max_snr_coordinated",
    "max_snr_decentralized", "mp_zeta", "mse_lower_bound", "na_closed_form", "overhead_costs",
    "snr_allocation", "DpGrid", "PolicyTable", "coord_dp_solve", "dec_dp_solve", "DecRule",
    "InfeasibleRuleError", "scdp_gap_bound", "scdp_schedule", "sddp_rule", "OptimalSequence",
    "optimal_snr_sequence", "breakpoints", "sequence_cost", "threshold_rule",
]
