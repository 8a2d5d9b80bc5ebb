"""Budget-optimal aggregate-SNR sequence over a finite horizon.

Minimizes the sample-average posterior variance from ``V_0 = 1`` subject to a
mean aggregate SNR ``lambda_bar``. The optimum front-loads a burst ``L_0``,
holds the steady level that keeps ``V_post`` at ``1/(1+L_0)``, spends a
closing amount ``L_{T-m}`` and then stays silent for the last ``m`` slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..estimator import sample_average_mse


def breakpoints(m: int, alpha: float) -> tuple[float, float]:
    """Regime boundaries ``(L*_{0,m}, L*_{1,m})``; both infinite for ``m = -1``."""
    if m < 0:
        return math.inf, math.inf
    ratio = (1 - alpha ** (m + 2)) / (1 - alpha ** (m + 1))
    l0 = (math.sqrt(ratio) - 1) / (1 - alpha)
    return l0, l0 * (1 - alpha / math.sqrt(ratio))


def _middle(l0: float, alpha: float) -> float:
    return (1 - alpha) * l0 * (1 + l0) / (1 + (1 - alpha) * l0)


def _closing(l0: float, alpha: float, m: int) -> float:
    root = math.sqrt(1 - alpha ** (m + 1)) * math.sqrt((1 + l0) ** 2 - alpha * l0**2)
    return max((1 + l0) / (1 + (1 - alpha) * l0) * (root - 1), 0.0)


def _regime(lambda_bar: float, alpha: float, T: int) -> int:
    def lower(m):
        l0, l1 = breakpoints(m, alpha)
        return (l0 + max(T - m - 1, 0) * l1) / (T + 1)

    m = 0
    while m < T and lower(m) > lambda_bar:
        m += 1
    return m


@dataclass(frozen=True)
class OptimalSequence:
    snrs: np.ndarray
    r_star: float
    regime: int


def optimal_snr_sequence(lambda_bar: float, alpha: float, T: int, tol: float = 1e-14) -> OptimalSequence:
    """Minimizer of the sample-average MSE over ``T + 1`` slots at mean SNR ``lambda_bar``."""
    if lambda_bar <= 0:
        raise ValueError("mean aggregate SNR must be positive")
    if T < 0:
        raise ValueError("horizon must be nonnegative")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    m = _regime(lambda_bar, alpha, T)
    seq = np.zeros(T + 1)
    if m >= T:
        l0 = (T + 1) * lambda_bar
        seq[0] = l0
        r = 1 - (1 - alpha ** (T + 1)) / ((T + 1) * (1 - alpha)) * l0 / (1 + l0)
        return OptimalSequence(seq, r, m)

    def mean_of(l0):
        return (l0 + (T - m - 1) * _middle(l0, alpha) + _closing(l0, alpha, m)) / (T + 1)

    lo, hi = breakpoints(m, alpha)[0], breakpoints(m - 1, alpha)[0]
    if math.isinf(hi):
        hi = max(2 * lo, 1.0)
        while mean_of(hi) < lambda_bar:
            hi *= 2
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mean_of(mid) < lambda_bar:
            lo = mid
        else:
            hi = mid
    l0 = 0.5 * (lo + hi)
    seq[0] = l0
    seq[1 : T - m] = _middle(l0, alpha)
    seq[T - m] = _closing(l0, alpha, m)
    # V_post sits at 1/(1+L0) for slots 0..T-m-1, reaches w at T-m, then relaxes freely
    v_hold = 1 / (1 + l0)
    prior = 1 - alpha * (1 - v_hold)
    w = prior / (1 + prior * seq[T - m])
    r = ((T - m) * v_hold + (m + 1) - (1 - w) * (1 - alpha ** (m + 1)) / (1 - alpha)) / (T + 1)
    return OptimalSequence(seq, r, m)


def sequence_cost(snrs, alpha: float) -> float:
    """Sample-average MSE of an arbitrary SNR sequence from ``V_0 = 1``."""
    return sample_average_mse(1.0, snrs, alpha)
