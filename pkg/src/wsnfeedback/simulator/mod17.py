"""Censoring baseline: every sensor senses, only surprising measurements are sent.

A sensor transmits iff its measurement deviates from the predicted value by
at least ``tau`` predictive standard deviations. The FC is genie-aided: it
knows who censored and every accuracy state, and computes the exact
posterior by quadrature, combining the received likelihoods, the censoring
intervals of censored sensors and the complementary events of collided
sensors. A Gaussian with the posterior moments is carried to the next slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from ..policies.closed_form import CostModel, _maximize_over_sm
from .engine import SimConfig, TradeoffPoint, _Streams, batch_se


class QuadratureError(ArithmeticError):
    """Posterior mass escaped the integration window even after widening."""


@dataclass(frozen=True)
class Mod17Config:
    tau: float
    s_measure: float
    width: float = 8.0  # half-width in prior standard deviations
    points: int = 2001

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("censoring threshold must be nonnegative")
        if self.s_measure <= 0:
            raise ValueError("every sensor senses, so S_M must be positive")
        if self.points < 101 or self.points % 2 == 0:
            raise ValueError("quadrature needs an odd number of at least 101 points")

    @property
    def q(self) -> float:
        """Transmission probability ``2 (1 - Phi(tau))`` under the predictive law."""
        return float(2 * stats.norm.sf(self.tau))

    @classmethod
    def from_q(cls, q: float, s_measure: float, **kw) -> "Mod17Config":
        if not 0 <= q <= 1:
            raise ValueError("transmission probability must lie in [0, 1]")
        tau = math.inf if q == 0 else float(stats.norm.isf(q / 2))
        return cls(tau, s_measure, **kw)


def _log_interval(lo, hi):
    """log(Phi(hi) - Phi(lo)) for lo < hi, stable in both tails."""
    a, b = special.log_ndtr(hi), special.log_ndtr(lo)
    # use the upper tail when both bounds are large
    flip = lo > 0
    a2, b2 = special.log_ndtr(-lo), special.log_ndtr(-hi)
    top = np.where(flip, a2, a)
    bot = np.where(flip, b2, b)
    with np.errstate(divide="ignore"):
        return top + np.log1p(-np.exp(np.minimum(bot - top, 0.0)))


def mod17_posterior(m: float, v: float, received, censored, collided, states, s_ambient: float,
                    cfg: Mod17Config):
    """Posterior (mean, variance) of the state given one slot of genie-aided observations.

    ``received`` is a list of ``(y, gamma)``; ``censored`` and ``collided``
    are per-accuracy-state counts.
    """
    sig2 = 1.0 / s_ambient + 1.0 / cfg.s_measure
    sig = math.sqrt(sig2)
    censored = np.asarray(censored)
    collided = np.asarray(collided)
    for width in (cfg.width, 2 * cfg.width):
        x = m + math.sqrt(v) * width * np.linspace(-1.0, 1.0, cfg.points)
        logp = -0.5 * (x - m) ** 2 / v
        for y, g in received:
            logp -= 0.5 * (y - g * x) ** 2 / sig2
        for s, g in enumerate(states):
            if censored[s] == 0 and collided[s] == 0:
                continue
            half = cfg.tau * math.sqrt(g * g * v + sig2)
            lo = (g * m - half - g * x) / sig
            hi = (g * m + half - g * x) / sig
            if censored[s]:
                logp += censored[s] * _log_interval(lo, hi)
            if collided[s]:
                logp += collided[s] * np.logaddexp(special.log_ndtr(lo), special.log_ndtr(-hi))
        top = logp.max()
        if not np.isfinite(top):
            continue
        w = np.exp(logp - top)
        mass = np.trapezoid(w, x)
        edge = max(w[0], w[-1])
        if mass > 0 and edge < 1e-12:
            mean = np.trapezoid(w * x, x) / mass
            var = np.trapezoid(w * (x - mean) ** 2, x) / mass
            return float(mean), float(var)
    raise QuadratureError("posterior mass not contained in the integration window")


def mod17_step(state, cfg: Mod17Config, world):
    """One slot. ``state = (x_hat, v_post)``; ``world`` holds the slot's draws.

    ``world`` keys: x (true state), alpha, s_ambient, states, acc (per-sensor
    state index), noise, u_chan, n_channels. Returns the new state and a dict
    of slot metrics.
    """
    x_hat, v_post = state
    alpha, states, acc = world["alpha"], world["states"], world["acc"]
    B = world["n_channels"]
    m = math.sqrt(alpha) * x_hat
    v = 1.0 - alpha * (1.0 - v_post)
    sig2 = 1.0 / world["s_ambient"] + 1.0 / cfg.s_measure
    g = states[acc]
    y = g * world["x"] + math.sqrt(sig2) * world["noise"]
    half = cfg.tau * np.sqrt(g * g * v + sig2)
    send = np.abs(y - g * m) >= half
    chan = np.minimum((world["u_chan"] * B).astype(np.int64), B - 1)
    occ = np.bincount(chan[send], minlength=B)
    ok = send & (occ[chan] == 1)
    ns = states.size
    censored = np.bincount(acc[~send], minlength=ns)
    collided = np.bincount(acc[send & ~ok], minlength=ns)
    received = list(zip(y[ok], g[ok]))
    mean, var = mod17_posterior(m, v, received, censored, collided, states, world["s_ambient"], cfg)
    metrics = dict(v_prior=v, n_tx=int(send.sum()), collisions=int((occ >= 2).sum()))
    return (mean, var), metrics


def run_mod17(sim: SimConfig, cfg: Mod17Config, slots: int = 3000,
              knob: tuple[str, float] = ("epsilon", math.nan)) -> TradeoffPoint:
    """Episode of the censoring baseline; sensor streams match ``run_episode``."""
    chain = sim.effective_chain()
    N = sim.n_sensors
    streams = _Streams(sim.seed, N)
    cdf = np.cumsum(chain.transition, axis=1)
    cdf[:, -1] = 1.0
    acc = streams.initial_accuracy(chain.stationary)
    x = streams.process.standard_normal()
    markov = chain.n_states > 1
    z = streams.process.standard_normal(slots)
    u_acc = streams.uniforms(0, slots) if markov else None
    u_chan = streams.uniforms(2, slots)
    noise = streams.normals(slots)
    state = (0.0, 1.0)
    v_post = np.empty(slots)
    se = np.empty(slots)
    cost = np.empty(slots)
    coll = np.empty(slots)
    c = sim.cost
    a = math.sqrt(sim.alpha)
    for k in range(slots):
        x = a * x + math.sqrt(1 - sim.alpha) * z[k]
        if markov:
            acc = (u_acc[k][:, None] >= cdf[acc]).sum(axis=1)
            acc = np.minimum(acc, chain.n_states - 1)
        world = dict(x=x, alpha=sim.alpha, s_ambient=sim.s_ambient, states=chain.states, acc=acc,
                     noise=noise[k], u_chan=u_chan[k], n_channels=sim.n_channels)
        state, met = mod17_step(state, cfg, world)
        v_post[k] = state[1]
        se[k] = (state[0] - x) ** 2
        cost[k] = N * c.phi * cfg.s_measure + met["n_tx"] * c.c_tx
        coll[k] = met["collisions"]
    net = float(cost.mean())
    return TradeoffPoint("mod17", sim.scenario, knob[0], float(knob[1]), net / N, net, float(v_post.mean()),
                         float(np.mean(v_post >= sim.outage_threshold)), float(coll.mean()), sim.seed, slots,
                         batch_se(v_post), float(se.mean()))


def mod17_tune(budget: float, cost: CostModel, s_ambient: float, n_channels: int, n_sensors: int):
    """(q*, S_M*) maximizing ``q N e^(-q N / B) s(S_M)`` with ``q c_tx + phi S_M <= budget / N``."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    per_sn = budget / n_sensors
    N, B = n_sensors, n_channels

    def q_of(sm):
        q_budget = (per_sn - cost.phi * sm) / cost.c_tx
        return min(max(q_budget, 0.0), 1.0, B / N)

    def objective(sm):
        q = q_of(sm)
        return q * N * math.exp(-q * N / B) * s_ambient * sm / (s_ambient + sm)

    sm_hi = per_sn / cost.phi if cost.phi > 0 else 1e7
    sm, _ = _maximize_over_sm(objective, sm_hi)
    return q_of(sm), sm
