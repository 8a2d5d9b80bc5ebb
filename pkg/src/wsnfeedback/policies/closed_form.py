"""Closed-form and low-dimensional sensing-transmission policies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ..estimator import mse_floor
from ..process import AccuracyChain


@dataclass(frozen=True)
class CostModel:
    """Per-activation cost ``c_tx + phi * S_M``."""

    c_tx: float = 1.0
    phi: float = 0.25
    theta: float = field(init=False)

    def __post_init__(self):
        if self.c_tx <= 0:
            raise ValueError("transmission cost must be positive")
        if self.phi < 0:
            raise ValueError("sensing cost must be nonnegative")
        object.__setattr__(self, "theta", self.phi / self.c_tx)

    def activation_cost(self, s_measure):
        return self.c_tx + self.phi * np.asarray(s_measure, dtype=float)

    def c_sn(self, active, s_measure):
        return np.asarray(active) * self.activation_cost(s_measure)


@dataclass(frozen=True)
class TradeoffKnobs:
    """Exactly one of a Lagrange multiplier or a network budget drives a run."""

    lagrange: float | None = None
    budget: float | None = None

    def __post_init__(self):
        if (self.lagrange is None) == (self.budget is None):
            raise ValueError("set exactly one of lagrange or budget")
        if self.lagrange is not None and self.lagrange < 0:
            raise ValueError("lagrange multiplier must be nonnegative")
        if self.budget is not None and self.budget <= 0:
            raise ValueError("budget must be positive")

    @property
    def kind(self) -> str:
        return "lambda" if self.lagrange is not None else "epsilon"

    @property
    def value(self) -> float:
        return self.lagrange if self.lagrange is not None else self.budget


@dataclass(frozen=True)
class CoordAction:
    t_active: int
    s_measure: float

    def __post_init__(self):
        if self.t_active < 0 or self.s_measure < 0:
            raise ValueError("negative action")
        if self.t_active == 0 and self.s_measure != 0:
            raise ValueError("idle action must have zero measurement SNR")

    def aggregate_snr(self, s_ambient: float) -> float:
        if self.t_active == 0:
            return 0.0
        return self.t_active * s_ambient * self.s_measure / (s_ambient + self.s_measure)


# --- two-state toy schemes (one channel, noiseless sensing) -------------------


def success_probability(zeta):
    """Large-network success probability of one channel at normalized load zeta."""
    z = np.asarray(zeta, dtype=float)
    return z * np.exp(-z)


def na_closed_form(zeta: float, alpha: float, c_tx: float, n_sensors: int):
    """(cost per sensor, MSE) of the non-adaptive scheme activating w.p. zeta / N_S."""
    if not 0 <= zeta <= n_sensors:
        raise ValueError("zeta must lie in [0, N_S]")
    s = zeta * math.exp(-zeta)
    mse = (1 - alpha) * (1 - s) / (1 - alpha + alpha * s)
    return zeta * c_tx / n_sensors, mse


def _uncertainty(j, alpha):
    """Prior variance after ``j`` consecutive failures, ``1 - alpha^(j+1)``."""
    j = np.asarray(j, dtype=float)
    return np.where(np.isinf(j), 1.0, 1.0 - alpha ** (j + 1))


def mp_zeta(j, lagrange: float, alpha: float, tol: float = 1e-12) -> float:
    """Myopic load: minimizes ``(1 - z e^-z) V + lagrange z`` with ``V = 1 - alpha^(j+1)``."""
    v = float(_uncertainty(j, alpha))
    if lagrange >= v * (1 - 1e-12):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if math.exp(-mid) * v * (1 - mid) > lagrange:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def amp_zeta(j, lagrange: float, alpha: float):
    """Approximate myopic load ``[1 - lagrange / (1 - alpha^(j+1))]^+``."""
    v = _uncertainty(j, alpha)
    out = np.maximum(1.0 - lagrange / v, 0.0)
    return out if out.ndim else float(out)


def amp_stationary_metrics(lagrange: float, alpha: float, c_tx: float, n_sensors: int,
                           tail: float = 1e-12, max_states: int = 10_000_000):
    """(cost per sensor, MSE) of AMP from the stationary law of the failure counter.

    States ``j`` (slots since the last success) are enumerated until either the
    remaining mass is below ``tail`` or ``alpha^(j+1)`` vanishes in double
    precision. Past that point every state has load ``1 - lagrange`` and prior
    variance 1, so the rest of the chain is a geometric series summed exactly.
    """
    if not 0 < lagrange < 1:
        raise ValueError("AMP stationary metrics need lagrange in (0, 1)")
    z_inf = 1.0 - lagrange
    f_inf = 1.0 - z_inf * math.exp(-z_inf)
    chunk = 4096
    zs, ws, vs = [], [], []
    w_last, total, start = 1.0, 0.0, 0
    while True:
        j = np.arange(start, start + chunk)
        v = 1.0 - alpha ** (j + 1)
        z = np.maximum(1.0 - lagrange / v, 0.0)
        f = 1.0 - z * np.exp(-z)
        w = w_last * np.concatenate([[1.0], np.cumprod(f[:-1])])
        zs.append(z)
        ws.append(w)
        vs.append(v)
        total += w.sum()
        w_last = w[-1] * f[-1]
        start += chunk
        if (w_last / (1.0 - f_inf) < tail * total and z[-1] > 0) or v[-1] == 1.0:
            break
        if start >= max_states:
            raise RuntimeError("AMP quality chain did not settle within the truncation cap")
    z, w, v = (np.concatenate(a) for a in (zs, ws, vs))
    s = z * np.exp(-z)
    w_tail = w_last / (1.0 - f_inf)
    mass = w.sum() + w_tail
    cost = (float(w @ z) + w_tail * z_inf) / mass * c_tx / n_sensors
    mse = (float(w @ ((1 - s) * v)) + w_tail * f_inf) / mass
    return cost, mse


# --- coordinated allocation ---------------------------------------------------


def lambda_threshold(t, s_ambient: float, theta: float):
    """Aggregate SNR above which activating ``t + 1`` sensors beats ``t``."""
    t = np.asarray(t, dtype=float)
    out = 2 * s_ambient * t * (t + 1) / (np.sqrt(1 + 4 * s_ambient * theta * t * (t + 1)) + 2 * t + 1)
    return out if out.ndim else float(out)


def snr_allocation(lambda_target: float, s_ambient: float, theta: float, n_channels: int):
    """Cheapest (number of sensors, common S_M) collecting ``lambda_target``."""
    if lambda_target < 0:
        raise ValueError("target aggregate SNR must be nonnegative")
    if lambda_target >= n_channels * s_ambient:
        raise ValueError("target aggregate SNR not reachable with B channels")
    if lambda_target == 0:
        return 0, 0.0
    t = 1
    while t < n_channels and lambda_target >= lambda_threshold(t, s_ambient, theta):
        t += 1
    return t, s_ambient * lambda_target / (t * s_ambient - lambda_target)


def allocation_arrays(lambdas, s_ambient: float, theta: float, n_channels: int):
    """Vectorized ``snr_allocation`` over an array of targets."""
    lam = np.asarray(lambdas, dtype=float)
    thresholds = lambda_threshold(np.arange(1, n_channels), s_ambient, theta)
    t = 1 + np.searchsorted(thresholds, lam, side="right")
    t = np.minimum(t, n_channels)
    t = np.where(lam > 0, t, 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        sm = np.where(t > 0, s_ambient * lam / (t * s_ambient - lam), 0.0)
    return t, sm


@dataclass(frozen=True)
class MaxSnrCoordinated:
    m_bar: float  # mean number of active sensors
    s_measure: float
    lambda_bar: float
    time_sharing: bool  # True when the closed form is not tight (fractional m_bar)

    @property
    def t_active(self) -> int:
        return int(math.floor(self.m_bar)) if self.time_sharing else int(round(self.m_bar))


def max_snr_coordinated(budget: float, cost: CostModel, s_ambient: float, n_channels: int,
                        snap: float = 1e-4) -> MaxSnrCoordinated:
    """Max expected aggregate SNR for a coordinated scheme under a network budget.

    The whole budget is always spent. Between anchor budgets the optimum
    time-shares between neighbouring sensor counts; ``m_bar`` is then
    fractional and ``time_sharing`` is set.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    c, theta, B = cost.c_tx, cost.theta, n_channels
    if theta == 0:
        m_bar = min(budget / c, B)
        return MaxSnrCoordinated(m_bar, math.inf, m_bar * s_ambient, abs(m_bar - round(m_bar)) > snap * max(1.0, m_bar))
    anchor = c * (1 + math.sqrt(theta * s_ambient))
    m_bar = min(budget / anchor, B)
    # budgets quoted to a few digits snap onto the anchor t c (1 + sqrt(theta S_A))
    fractional = abs(m_bar - round(m_bar)) > snap * max(1.0, m_bar)
    if not fractional:
        m_bar = float(round(m_bar))
    s_m = (budget / (m_bar * c) - 1) / theta
    lam = m_bar * s_ambient * s_m / (s_ambient + s_m)
    return MaxSnrCoordinated(m_bar, s_m, lam, fractional)


def mse_lower_bound(budget: float, alpha: float, cost: CostModel, s_ambient: float, n_channels: int) -> float:
    """MSE floor of any scheme spending at most ``budget`` per slot network-wide."""
    return mse_floor(max_snr_coordinated(budget, cost, s_ambient, n_channels).lambda_bar, alpha)


# --- decentralized non-adaptive allocation ------------------------------------


def _maximize_over_sm(objective, sm_hi: float):
    """Maximize a 1-D objective of S_M on (0, sm_hi] by log grid plus bounded polish."""
    if not sm_hi > 0:
        raise ValueError("upper end of the S_M range must be positive")
    grid = np.geomspace(min(1e-6, 1e-3 * sm_hi), sm_hi, 4001)
    vals = np.array([objective(s) for s in grid])
    i = int(np.argmax(vals))
    lo = math.log(grid[max(i - 1, 0)])
    hi = math.log(grid[min(i + 1, grid.size - 1)])
    res = optimize.minimize_scalar(lambda u: -objective(math.exp(u)), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-12})
    s_best = math.exp(res.x)
    if objective(s_best) < vals[i]:
        s_best = grid[i]
    return s_best, objective(s_best)


def max_snr_decentralized(budget: float, cost: CostModel, s_ambient: float, n_channels: int):
    """(zeta*, S_M*, expected aggregate SNR) under ``B zeta (c_tx + phi S_M) <= budget``.

    For a given S_M the expected SNR ``B z e^-z s(S_M)`` grows with ``z`` on
    [0, 1], so the load is the budget-binding value capped at 1.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    B, c, phi = n_channels, cost.c_tx, cost.phi

    def zeta_of(sm):
        return min(1.0, budget / (B * (c + phi * sm)))

    def objective(sm):
        z = zeta_of(sm)
        return B * z * math.exp(-z) * s_ambient * sm / (s_ambient + sm)

    sm_hi = 1e7 if phi == 0 else max(budget / (B * phi) * 1e3, 1e3)
    sm, val = _maximize_over_sm(objective, sm_hi)
    return zeta_of(sm), sm, val


# --- overhead -----------------------------------------------------------------


@dataclass(frozen=True)
class OverheadModel:
    c_gamma: float = 1.0
    c_v: float = 1.0
    c_sc: float = 1.0

    def __post_init__(self):
        if min(self.c_gamma, self.c_v, self.c_sc) < 0:
            raise ValueError("overhead unit costs must be nonnegative")


def overhead_costs(scheme: str, chain: AccuracyChain, model: OverheadModel, n_sensors: int,
                   avg_t_active: float = 0.0):
    """Long-run (uplink, downlink) signalling cost per slot."""
    if scheme.startswith("coord"):
        leave = 1.0 - np.diag(chain.transition)
        uplink = n_sensors * model.c_gamma * float(chain.stationary @ leave)
        return uplink, avg_t_active * model.c_sc
    if scheme.startswith("dec"):
        return 0.0, model.c_v
    raise ValueError(f"unknown scheme {scheme!r}")
