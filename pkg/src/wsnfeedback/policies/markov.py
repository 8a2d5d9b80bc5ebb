"""Markov-accuracy wrappers around policies solved for the best-accuracy network.

Both wrappers reuse a best-gamma ``PolicyTable`` and bias activity towards
sensors currently in high accuracy states, which is near-optimal once the
network is dense enough for a few sensors to sit in the best state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..process import AccuracyChain
from .dp import PolicyTable


class InfeasibleRuleError(ValueError):
    """Requested marginal activation exceeds what activating everyone provides."""


@dataclass(frozen=True)
class CoordSchedule:
    active: np.ndarray  # bool per sensor
    s_measure: float
    target_snr: float  # best-gamma aggregate SNR the schedule was sized for
    next_virtual_v: float


def scdp_schedule(table: PolicyTable, virtual_v: float, gammas) -> CoordSchedule:
    """Activate the ``t*`` most accurate sensors at the best-gamma ``S_M*``.

    Ranking is by accuracy, highest first, ties broken by sensor index. The
    virtual prior advances with the planned SNR, ignoring realized accuracy.
    """
    if table.scheme != "coord":
        raise ValueError("SCDP needs a coordinated policy table")
    g = np.asarray(gammas, dtype=float)
    i = table.index(virtual_v)
    t = int(table.actions["t_active"][i])
    s_m = float(table.actions["s_measure"][i])
    lam = float(table.actions["lambda"][i])
    order = np.lexsort((np.arange(g.size), -g))
    active = np.zeros(g.size, dtype=bool)
    active[order[: min(t, g.size)]] = True
    post = virtual_v / (1.0 + virtual_v * lam)
    return CoordSchedule(active, s_m, lam, 1.0 - table.alpha * (1.0 - post))


@dataclass(frozen=True)
class DecRule:
    q: np.ndarray  # activation probability per accuracy state
    s_measure: np.ndarray  # measurement SNR per accuracy state

    def __post_init__(self):
        if np.any((self.q < 0) | (self.q > 1)):
            raise ValueError("activation probabilities must lie in [0, 1]")
        if np.any(self.s_measure < 0):
            raise ValueError("measurement SNR must be nonnegative")


def threshold_rule(rho: float, stationary) -> np.ndarray:
    """Activation probabilities: all mass on the best states, ``sum q pi = rho``."""
    pi = np.asarray(stationary, dtype=float)
    if rho > 1.0 + 1e-12:
        raise InfeasibleRuleError(f"marginal activation {rho} exceeds 1")
    q = np.zeros(pi.size)
    left = rho
    for s in range(pi.size - 1, -1, -1):
        if left <= 0:
            break
        if pi[s] <= left:
            q[s] = 1.0
            left -= pi[s]
        else:
            q[s] = left / pi[s]
            left = 0.0
    return q


def sddp_rule(table: PolicyTable, v_prior: float, chain: AccuracyChain, n_channels: int,
              n_sensors: int) -> DecRule:
    """Threshold rule with marginal normalized activation ``zeta*(V)``."""
    if table.scheme != "dec":
        raise ValueError("SDDP needs a decentralized policy table")
    i = table.index(v_prior)
    zeta = float(table.actions["zeta"][i])
    s_m = float(table.actions["s_measure"][i])
    rho = n_channels * zeta / n_sensors
    if rho > 1.0:
        raise InfeasibleRuleError(f"B zeta / N_S = {rho:.4g} > 1")
    q = threshold_rule(rho, chain.stationary)
    return DecRule(q, np.full(chain.n_states, s_m if zeta > 0 else 0.0))


def scdp_gap_bound(alpha: float, n_sensors: int, pi_max: float, n_channels: int) -> float:
    """Upper bound on the SCDP MSE gap to the best-gamma optimum."""
    m = n_sensors * pi_max
    if n_sensors < (n_channels - 1) / pi_max:
        return math.inf
    return math.exp(-((m - n_channels + 1) ** 2) / (2 * m)) / (1 - alpha)
