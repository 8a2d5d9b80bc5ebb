"""Multi-channel collision channel: slot resolution and success-count statistics.

A transmission succeeds iff it is the only one on its channel. The number of
successes ``R`` in a slot has a closed alternating-sum form. It also equals a
mixture over the number of transmitters of a conditional PMF built from the
count ``U(t, b)`` of all-unsuccessful assignments. Small networks can be
checked against exhaustive enumeration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special, stats


@dataclass(frozen=True)
class ChannelConfig:
    n_sensors: int
    n_channels: int

    def __post_init__(self):
        if self.n_sensors < 1 or self.n_channels < 1:
            raise ValueError("need at least one sensor and one channel")
        if self.n_channels > self.n_sensors:
            raise ValueError("number of channels cannot exceed number of sensors")


@dataclass(frozen=True)
class SlotOutcome:
    occupancy: np.ndarray  # transmitters per channel, shape (B,)
    success: np.ndarray  # per-sensor success flag, shape (N,)

    @property
    def n_success(self) -> int:
        return int(self.success.sum())

    @property
    def n_transmitting(self) -> int:
        return int(self.occupancy.sum())

    @property
    def n_collisions(self) -> int:
        """Channels carrying two or more transmissions."""
        return int((self.occupancy >= 2).sum())


def resolve_slot(assignments, cfg: ChannelConfig) -> SlotOutcome:
    """Resolve one slot. ``assignments[n]`` is 0 for idle or a channel in 1..B."""
    a = np.asarray(assignments, dtype=np.int64)
    if a.shape != (cfg.n_sensors,):
        raise ValueError(f"expected {cfg.n_sensors} assignments, got shape {a.shape}")
    if np.any((a < 0) | (a > cfg.n_channels)):
        raise ValueError(f"channel index out of range 0..{cfg.n_channels}")
    occupancy = np.bincount(a, minlength=cfg.n_channels + 1)[1:]
    success = (a > 0) & (occupancy[np.maximum(a - 1, 0)] == 1)
    return SlotOutcome(occupancy, success)


@lru_cache(maxsize=None)
def _u_recursive(t: int, b: int) -> int:
    if b == 0:
        return 1 if t == 0 else 0
    if b == 1:
        return 0 if t == 1 else 1
    # n transmitters on the first channel (n != 1), the rest spread over b - 1 channels
    return sum(math.comb(t, n) * _u_recursive(t - n, b - 1) for n in range(t + 1) if n != 1)


def _u_closed(t: int, b: int) -> int:
    if b == 0:
        return 1 if t == 0 else 0
    total = sum(
        (-1) ** k * math.comb(b, k) * math.perm(t, k) * (b - k) ** (t - k)
        for k in range(min(t, b - 1) + 1)
    )
    if t == b:
        total += math.factorial(b) * (-1) ** b
    return total


def unsuccessful_combinations(t: int, b: int) -> int:
    """Number of ways ``t`` labelled transmissions land on ``b`` channels with no success.

    Computed by the first-channel recursion and by the alternating closed
    form, both in exact integer arithmetic; they must agree.
    """
    if t < 0 or b < 0:
        raise ValueError("t and b must be nonnegative")
    rec = _u_recursive(t, b)
    closed = _u_closed(t, b)
    if rec != closed:
        raise ArithmeticError(f"U({t},{b}) mismatch: recursion {rec} vs closed form {closed}")
    return rec


def collision_conditional_pmf(t: int, n_channels: int) -> np.ndarray:
    """P(R = r | T = t) for uniform independent channel choice, r = 0..B."""
    B = n_channels
    out = np.zeros(B + 1)
    denom = B**t
    for r in range(min(t, B) + 1):
        num = math.comb(B, r) * math.perm(t, r) * unsuccessful_combinations(t - r, B - r)
        out[r] = num / denom
    return out


@dataclass(frozen=True)
class SuccessPmf:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("not a probability mass function")
        object.__setattr__(self, "probs", p)

    def __getitem__(self, r):
        return self.probs[r]

    def __len__(self):
        return self.probs.size

    @property
    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    def total_variation(self, other: "SuccessPmf") -> float:
        return 0.5 * float(np.abs(self.probs - other.probs).sum())


ConditionalPmf = Callable[[int, int], np.ndarray]


def mixture_success_pmf(q: float, cfg: ChannelConfig, conditional: ConditionalPmf = collision_conditional_pmf) -> SuccessPmf:
    """Mix ``p(r | t)`` over ``T ~ Binomial(N, q)``; any channel model plugs in here."""
    N, B = cfg.n_sensors, cfg.n_channels
    t = np.arange(N + 1)
    # log-space binomial weights; stats.binom.pmf overflows for subnormal q
    log_w = special.gammaln(N + 1) - special.gammaln(t + 1) - special.gammaln(N - t + 1)
    weights = np.exp(log_w + special.xlogy(t, q) + special.xlog1py(N - t, -q))
    probs = np.zeros(B + 1)
    for t, w in enumerate(weights):
        if w > 0:
            probs += w * conditional(t, B)
    return SuccessPmf(probs / probs.sum())


def exact_success_pmf(q: float, cfg: ChannelConfig) -> SuccessPmf:
    """Closed alternating-sum PMF of the success count when each sensor fires w.p. ``q``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("activation probability must lie in [0, 1]")
    N, B = cfg.n_sensors, cfg.n_channels
    x = q / B
    probs = np.zeros(B + 1)
    for r in range(B + 1):
        terms = []
        for k in range(r, min(B, N) + 1):
            base = 1.0 - k * x
            if base < 0:
                base = 0.0
            terms.append(
                (-1) ** (k - r)
                * math.perm(N, k)
                * math.comb(B, r)
                * math.comb(B - r, k - r)
                * x**k
                * base ** (N - k)
            )
        probs[r] = math.fsum(terms)
    probs[np.abs(probs) < 1e-15] = 0.0
    probs = np.clip(probs, 0.0, None)
    return SuccessPmf(probs / probs.sum())


@lru_cache(maxsize=None)
def _enumerated_histogram(t: int, B: int) -> tuple:
    """Success-count counts over all ``B**t`` channel assignments of ``t`` transmitters."""
    counts = np.zeros(B + 1, dtype=np.int64)
    if t == 0:
        counts[0] = 1
        return tuple(counts)
    total = B**t
    powers = B ** np.arange(t, dtype=np.int64)
    chunk = 1 << 20
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (idx[:, None] // powers) % B
        succ = np.zeros(idx.size, dtype=np.int64)
        for c in range(B):
            succ += (digits == c).sum(axis=1) == 1
        counts += np.bincount(succ, minlength=B + 1)
    return tuple(counts)


def brute_force_pmf(q: float, cfg: ChannelConfig) -> SuccessPmf:
    """Enumerate every activation subset and channel assignment (N <= 12, B <= 4)."""
    N, B = cfg.n_sensors, cfg.n_channels
    if N > 12 or B > 4:
        raise ValueError("brute-force enumeration limited to N_S <= 12 and B <= 4")
    probs = np.zeros(B + 1)
    for subset in itertools.product((0, 1), repeat=N):
        t = sum(subset)
        w = q**t * (1.0 - q) ** (N - t)
        if w == 0.0:
            continue
        hist = np.asarray(_enumerated_histogram(t, B), dtype=float)
        probs += w * hist / B**t
    return SuccessPmf(probs / probs.sum())


def binomial_approx_pmf(zeta: float, n_channels: int) -> SuccessPmf:
    """Large-network limit: independent channels, each succeeding w.p. zeta e^-zeta."""
    if zeta < 0:
        raise ValueError("zeta must be nonnegative")
    p = zeta * math.exp(-zeta)
    return SuccessPmf(stats.binom.pmf(np.arange(n_channels + 1), n_channels, p))


def binomial_success_matrix(zetas, n_channels: int) -> np.ndarray:
    """Rows of binomial success PMFs for an array of normalized loads."""
    z = np.asarray(zetas, dtype=float)
    p = z * np.exp(-z)
    r = np.arange(n_channels + 1)
    return stats.binom.pmf(r[None, :], n_channels, p[:, None])
