"""Latent Gauss-Markov process, per-sensor accuracy chains and noisy measurements."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import signal
from scipy.sparse.csgraph import connected_components


class ReducibleChainError(ValueError):
    """Raised when a transition matrix has no unique stationary distribution."""


@dataclass(frozen=True)
class ProcessParams:
    """Scalar AR(1) process ``x' = sqrt(alpha) x + z`` normalized to unit power."""

    alpha: float
    sigma_z2: float = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        object.__setattr__(self, "sigma_z2", 1.0 - self.alpha)

    @property
    def stationary_power(self) -> float:
        return self.sigma_z2 / (1.0 - self.alpha)


def step_process(x, p: ProcessParams, rng: np.random.Generator):
    return np.sqrt(p.alpha) * x + rng.normal(0.0, np.sqrt(p.sigma_z2), size=np.shape(x))


def simulate_process(p: ProcessParams, slots: int, rng: np.random.Generator, x0=None) -> np.ndarray:
    """Trajectory of ``slots`` values; ``x0=None`` starts from the stationary law."""
    z = rng.normal(0.0, np.sqrt(p.sigma_z2), size=slots)
    prev = rng.normal() if x0 is None else float(x0)
    a = np.sqrt(p.alpha)
    x, _ = signal.lfilter([1.0], [1.0, -a], z, zi=[a * prev])
    return x


def stationary_distribution(transition, tol: float = 1e-12, max_iter: int = 1_000_000) -> np.ndarray:
    """Stationary row vector of an irreducible row-stochastic matrix.

    Solves ``pi P = pi`` with the normalization appended as an extra row. If
    the dense solve fails, falls back to power iteration on the lazy chain
    ``(P + I) / 2`` (same fixed point, aperiodic).
    """
    P = np.asarray(transition, dtype=float)
    n = P.shape[0]
    if P.shape != (n, n):
        raise ValueError("transition matrix must be square")
    n_comp, _ = connected_components(P > 0, directed=True, connection="strong")
    if n_comp > 1:
        raise ReducibleChainError(f"chain is reducible ({n_comp} communicating classes)")
    A = np.vstack([P.T - np.eye(n), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    try:
        pi, *_ = np.linalg.lstsq(A, b, rcond=None)
        if np.abs(pi @ P - pi).max() <= 1e-10 and np.all(pi > -1e-14):
            pi = np.clip(pi, 0.0, None)
            return pi / pi.sum()
    except np.linalg.LinAlgError:
        pass
    lazy = 0.5 * (P + np.eye(n))
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = pi @ lazy
        if np.abs(nxt - pi).max() < tol:
            return nxt / nxt.sum()
        pi = nxt
    raise ReducibleChainError("power iteration did not converge")


@dataclass(frozen=True)
class AccuracyChain:
    """Markov chain over accuracy values gamma in (0, 1], ascending, last state 1."""

    states: np.ndarray
    transition: np.ndarray
    stationary: np.ndarray = field(init=False)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        P = np.asarray(self.transition, dtype=float)
        if states.ndim != 1 or P.shape != (states.size, states.size):
            raise ValueError("transition must be square and match the number of states")
        if np.any(np.diff(states) <= 0) or states[0] <= 0:
            raise ValueError("states must be positive and strictly ascending")
        if abs(states[-1] - 1.0) > 1e-12:
            raise ValueError("best accuracy state must equal 1")
        if np.any(P < 0) or np.abs(P.sum(axis=1) - 1.0).max() > 1e-12:
            raise ValueError("transition rows must be nonnegative and sum to 1")
        pi = stationary_distribution(P)
        if pi[-1] <= 0:
            raise ValueError("best accuracy state must have positive stationary mass")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "stationary", pi)

    @property
    def n_states(self) -> int:
        return self.states.size

    @property
    def pi_max(self) -> float:
        return float(self.stationary[-1])

    @classmethod
    def best_gamma(cls) -> "AccuracyChain":
        return cls(np.array([1.0]), np.array([[1.0]]))

    @classmethod
    def iid(cls, states, probs) -> "AccuracyChain":
        probs = np.asarray(probs, dtype=float)
        return cls(np.asarray(states, dtype=float), np.tile(probs, (probs.size, 1)))

    @classmethod
    def paper_v(cls) -> "AccuracyChain":
        """Ten states sqrt(i/10), self-loop 0.9, nearest-neighbour moves otherwise."""
        n = 10
        P = np.zeros((n, n))
        for i in range(n):
            P[i, i] = 0.9
            if i == 0:
                P[0, 1] = 0.1
            elif i == n - 1:
                P[i, i - 1] = 0.1
            else:
                P[i, i - 1] = P[i, i + 1] = 0.05
        return cls(np.sqrt(np.arange(1, n + 1) / n), P)

    @classmethod
    def from_text(cls, text: str) -> "AccuracyChain":
        """Parse ``states`` on the first line, then one transition row per line."""
        rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
        rows = [r for r in rows if r]
        if len(rows) < 2:
            raise ValueError("chain spec needs a state line and at least one transition row")
        states = np.array([float(v) for v in rows[0]])
        P = np.array([[float(v) for v in r] for r in rows[1:]])
        return cls(states, P)

    def to_text(self) -> str:
        lines = [" ".join(repr(float(s)) for s in self.states)]
        lines += [" ".join(repr(float(v)) for v in row) for row in self.transition]
        return "\n".join(lines) + "\n"


PRESETS = {"paper-v": AccuracyChain.paper_v, "best-gamma": AccuracyChain.best_gamma}


def load_chain(spec: str) -> AccuracyChain:
    """Resolve a preset name or a path to a plain-text chain spec."""
    if spec in PRESETS:
        return PRESETS[spec]()
    return AccuracyChain.from_text(Path(spec).read_text())


def step_accuracy(chain: AccuracyChain, idx: int, rng: np.random.Generator) -> int:
    cdf = np.cumsum(chain.transition[idx])
    return int(min(np.searchsorted(cdf, rng.random(), side="right"), chain.n_states - 1))


def accuracy_paths(chain: AccuracyChain, uniforms: np.ndarray, start: np.ndarray) -> np.ndarray:
    """Vectorized accuracy-index paths driven by pre-drawn uniforms.

    ``uniforms`` has shape (slots, n_sensors); row 0 is used for the first
    transition out of ``start``. Returns integer indices of shape (slots, n_sensors).
    """
    cdf = np.cumsum(chain.transition, axis=1)
    cdf[:, -1] = 1.0
    out = np.empty(uniforms.shape, dtype=np.int64)
    idx = np.asarray(start, dtype=np.int64)
    cols = np.arange(chain.n_states)
    if chain.n_states == 1:
        out[:] = 0
        return out
    for k in range(uniforms.shape[0]):
        # count of cdf entries <= u gives the sampled column
        idx = (uniforms[k][:, None] >= cdf[idx]).sum(axis=1)
        np.minimum(idx, cols[-1], out=idx)
        out[k] = idx
    return out


@dataclass(frozen=True)
class MeasurementParams:
    s_ambient: float
    s_measure: float

    def __post_init__(self):
        if self.s_ambient <= 0:
            raise ValueError("ambient SNR must be positive")
        if self.s_measure < 0:
            raise ValueError("measurement SNR must be nonnegative")


def local_snr(gamma, s_ambient, s_measure):
    """Local SNR ``gamma^2 S_A S_M / (S_A + S_M)``; zero for an idle sensor."""
    gamma = np.asarray(gamma, dtype=float)
    s_measure = np.asarray(s_measure, dtype=float)
    with np.errstate(invalid="ignore"):
        base = np.where(
            np.isinf(s_measure), s_ambient, s_ambient * s_measure / (s_ambient + s_measure)
        )
    out = gamma**2 * base
    return out if out.ndim else float(out)


def measure(x, gamma, mp: MeasurementParams, rng: np.random.Generator):
    if mp.s_measure <= 0:
        raise ValueError("an idle sensor (S_M = 0) takes no measurement")
    shape = np.broadcast(np.asarray(x), np.asarray(gamma)).shape
    w_a = rng.normal(0.0, 1.0 / np.sqrt(mp.s_ambient), size=shape)
    w_m = rng.normal(0.0, 1.0 / np.sqrt(mp.s_measure), size=shape)
    return np.asarray(gamma) * np.asarray(x) + w_a + w_m
