"""Single-channel system with noiseless sensing.

A successful report reveals the state exactly, so the FC state reduces to
the number ``j`` of slots since the last success, with prior variance
``1 - alpha^(j+1)``. Sensors are exchangeable, so the number of transmitters
in a slot is drawn directly as Binomial(N_S, zeta(j) / N_S).
"""

from __future__ import annotations

import math
from typing import Callable

import numba
import numpy as np

from ..policies.closed_form import amp_zeta
from .engine import TradeoffPoint, batch_se


@numba.njit(cache=True, nogil=True)
def _two_state_kernel(alpha, zeta_of_j, n_tx, u, o_vpost, o_tx):
    jmax = zeta_of_j.size - 1
    j = jmax  # V_0 = 1, i.e. no success so far (alpha^(jmax+1) is negligible)
    for k in range(u.size):
        q = zeta_of_j[j] / n_tx
        # inverse CDF of Binomial(n_tx, q)
        p = (1.0 - q) ** n_tx
        cdf = p
        t = 0
        while u[k] > cdf and t < n_tx:
            p *= (n_tx - t) / (t + 1.0) * q / (1.0 - q)
            t += 1
            cdf += p
        o_tx[k] = t
        if t == 1:
            o_vpost[k] = 0.0
            j = 0
        else:
            o_vpost[k] = 1.0 - alpha ** (j + 1)
            j = min(j + 1, jmax)


def run_two_state(zeta_fn: Callable[[int], float], alpha: float, n_sensors: int, c_tx: float,
                  slots: int, seed: int, scheme: str, knob: tuple[str, float], j_cap: int = 4000) -> TradeoffPoint:
    """Simulate ``slots`` slots with load ``zeta_fn(j)`` (``j`` capped at ``j_cap``)."""
    zeta = np.array([zeta_fn(j) for j in range(j_cap + 1)], dtype=float)
    if np.any((zeta < 0) | (zeta >= n_sensors)):
        raise ValueError("zeta must lie in [0, N_S)")
    u = np.random.default_rng(seed).random(slots)
    v = np.empty(slots)
    tx = np.empty(slots)
    _two_state_kernel(alpha, zeta, n_sensors, u, v, tx)
    cost = tx * c_tx
    return TradeoffPoint(scheme, "best-gamma", knob[0], float(knob[1]), float(cost.mean()) / n_sensors,
                         float(cost.mean()), float(v.mean()), float(np.mean(v >= 0.1)), 0.0, seed, slots,
                         batch_se(v))


def run_na(zeta: float, alpha: float, n_sensors: int = 1000, c_tx: float = 1.0, slots: int = 1_000_000,
           seed: int = 0) -> TradeoffPoint:
    return run_two_state(lambda j: zeta, alpha, n_sensors, c_tx, slots, seed, "na", ("zeta", zeta))


def run_amp(lagrange: float, alpha: float, n_sensors: int = 1000, c_tx: float = 1.0, slots: int = 1_000_000,
            seed: int = 0) -> TradeoffPoint:
    return run_two_state(lambda j: amp_zeta(j, lagrange, alpha), alpha, n_sensors, c_tx, slots, seed,
                         "amp", ("lambda", lagrange))
