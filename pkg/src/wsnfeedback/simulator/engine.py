"""Slot-level Monte-Carlo engine for the coordinated and decentralized schemes.

Each slot: the process moves, accuracy states move, the FC looks up the action
for its current prior variance, sensors measure and transmit, the channel
resolves, and the FC fuses what got through. Per-slot work runs in numba
kernels over chunks of pre-drawn random numbers. Every entity owns its own
streams (the process and FC streams plus per-sensor accuracy/activation/
channel/noise streams) so runs with the same seed share the process path and
the per-sensor noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from ..policies.closed_form import CostModel, MaxSnrCoordinated
from ..policies.dp import PolicyTable
from ..process import AccuracyChain

SCENARIOS = ("best-gamma", "iid-gamma", "markov-gamma")
CHUNK = 4096
N_BATCHES = 20


@dataclass(frozen=True)
class SimConfig:
    n_sensors: int = 100
    n_channels: int = 5
    alpha: float = 0.96
    s_ambient: float = 20.0
    cost: CostModel = field(default_factory=CostModel)
    scenario: str = "best-gamma"
    chain: AccuracyChain | None = None  # accuracy chain for the non-best scenarios
    slots: int = 100_000
    seed: int = 0
    outage_threshold: float = 0.1

    def __post_init__(self):
        if self.slots < 1:
            raise ValueError("horizon must be at least one slot")
        if not 1 <= self.n_channels <= self.n_sensors:
            raise ValueError("need 1 <= B <= N_S")
        if not 0 <= self.alpha < 1:
            raise ValueError("alpha must lie in [0, 1)")
        if self.s_ambient <= 0:
            raise ValueError("ambient SNR must be positive")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")
        if self.scenario != "best-gamma" and self.chain is None:
            raise ValueError(f"scenario {self.scenario} needs an accuracy chain")

    def effective_chain(self) -> AccuracyChain:
        if self.scenario == "best-gamma":
            return AccuracyChain.best_gamma()
        if self.scenario == "iid-gamma":
            return AccuracyChain.iid(self.chain.states, self.chain.stationary)
        return self.chain


@dataclass(frozen=True)
class TradeoffPoint:
    scheme: str
    scenario: str
    knob_kind: str
    knob_value: float
    per_sn_cost: float
    network_cost: float
    mse: float
    outage: float
    collisions_per_slot: float
    seed: int
    slots: int
    mse_se: float = math.nan  # batch-means standard error of ``mse``
    sq_error: float = math.nan  # time average of (x_hat - x)^2

    CSV_FIELDS = ("scheme", "scenario", "knob_kind", "knob_value", "per_sn_cost", "network_cost",
                  "mse", "outage", "collisions_per_slot", "seed", "slots")

    def csv_row(self) -> list:
        return [getattr(self, f) for f in self.CSV_FIELDS]


# --- policies -----------------------------------------------------------------


@dataclass(frozen=True)
class CoordPolicy:
    """Number of sensors and S_M per prior-variance cell; ``t_frac`` time-shares one more."""

    name: str
    v0: float
    h: float
    t_floor: np.ndarray
    t_frac: np.ndarray
    s_measure: np.ndarray

    @classmethod
    def from_table(cls, table: PolicyTable, name: str = "coord-dp") -> "CoordPolicy":
        if table.scheme != "coord":
            raise ValueError("coordinated policy needs a coordinated table")
        t = table.actions["t_active"].astype(np.int64)
        return cls(name, table.v[0], table.v[1] - table.v[0], t, np.zeros(t.size), table.actions["s_measure"].copy())

    @classmethod
    def max_snr(cls, res: MaxSnrCoordinated, name: str = "coord-snr") -> "CoordPolicy":
        t = int(math.floor(res.m_bar + 1e-12))
        return cls(name, 0.0, 1.0, np.array([t]), np.array([res.m_bar - t]), np.array([res.s_measure]))

    @classmethod
    def idle(cls) -> "CoordPolicy":
        return cls("idle", 0.0, 1.0, np.array([0]), np.zeros(1), np.zeros(1))


@dataclass(frozen=True)
class DecPolicy:
    """Normalized activation ``zeta`` and S_M per prior-variance cell."""

    name: str
    v0: float
    h: float
    zeta: np.ndarray
    s_measure: np.ndarray

    def __post_init__(self):
        if np.any((self.zeta < 0) | (self.zeta > 1)):
            raise ValueError("zeta must lie in [0, 1]")

    @classmethod
    def from_table(cls, table: PolicyTable, name: str = "dec-dp") -> "DecPolicy":
        if table.scheme != "dec":
            raise ValueError("decentralized policy needs a decentralized table")
        return cls(name, table.v[0], table.v[1] - table.v[0], table.actions["zeta"].copy(),
                   table.actions["s_measure"].copy())

    @classmethod
    def constant(cls, zeta: float, s_measure: float, name: str = "dec-snr") -> "DecPolicy":
        return cls(name, 0.0, 1.0, np.array([float(zeta)]), np.array([float(s_measure)]))


# --- kernels ------------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _lookup(v, v0, h, n):
    if n == 1:
        return 0
    i = int(np.rint((v - v0) / h))
    return min(max(i, 0), n - 1)


@numba.njit(cache=True, nogil=True)
def _advance_accuracy(acc, u, cdf):
    ns = cdf.shape[0]
    if ns == 1:
        return
    for n in range(acc.size):
        row = acc[n]
        j = 0
        while j < ns - 1 and u[n] >= cdf[row, j]:
            j += 1
        acc[n] = j


@numba.njit(cache=True, nogil=True)
def _coord_chunk(alpha, s_ambient, c_tx, phi, states, cdf, acc, z_proc, u_fc, u_acc, noise,
                 v0, h, t_floor, t_frac, s_tab, st, o_vprior, o_vpost, o_lam, o_se, o_cost, o_active):
    # st = [x, x_hat, v_post, virtual prior]
    N = acc.size
    ns = states.size
    sa = math.sqrt(alpha)
    sz = math.sqrt(1.0 - alpha)
    order = np.empty(N, dtype=np.int64)
    for k in range(z_proc.size):
        x = sa * st[0] + sz * z_proc[k]
        _advance_accuracy(acc, u_acc[k], cdf)
        i = _lookup(st[3], v0, h, t_floor.size)
        t = t_floor[i] + (1 if u_fc[k] < t_frac[i] else 0)
        t = min(t, N)
        sm = s_tab[i] if t > 0 else 0.0
        # rank by accuracy (best first), ties by index
        m = 0
        for s in range(ns - 1, -1, -1):
            for n in range(N):
                if m >= t:
                    break
                if acc[n] == s:
                    order[m] = n
                    m += 1
        base = s_ambient * sm / (s_ambient + sm) if sm > 0 else 0.0
        sd = math.sqrt(1.0 / s_ambient + 1.0 / sm) if sm > 0 else 0.0
        lam = 0.0
        wsum = 0.0
        for j in range(t):
            n = order[j]
            g = states[acc[n]]
            y = g * x + sd * noise[k, n]
            snr = g * g * base
            lam += snr
            wsum += snr / g * y
        mean = sa * st[1]
        v_prior = 1.0 - alpha * (1.0 - st[2])
        v_post = v_prior / (1.0 + v_prior * lam)
        x_hat = mean + v_post * (wsum - lam * mean)
        lam_plan = t * base
        vv = st[3] / (1.0 + st[3] * lam_plan)
        st[0], st[1], st[2], st[3] = x, x_hat, v_post, 1.0 - alpha * (1.0 - vv)
        o_vprior[k] = v_prior
        o_vpost[k] = v_post
        o_lam[k] = lam
        o_se[k] = (x_hat - x) ** 2
        o_cost[k] = t * (c_tx + phi * sm)
        o_active[k] = t


@numba.njit(cache=True, nogil=True)
def _dec_chunk(alpha, s_ambient, c_tx, phi, B, states, cdf, pi, acc, z_proc, u_acc, u_act, u_chan, noise,
               v0, h, zeta_tab, s_tab, st, o_vprior, o_vpost, o_lam, o_se, o_cost, o_active, o_coll):
    # st = [x, x_hat, v_post]
    N = acc.size
    ns = states.size
    sa = math.sqrt(alpha)
    sz = math.sqrt(1.0 - alpha)
    q = np.empty(ns)
    occ = np.zeros(B, dtype=np.int64)
    chan = np.empty(N, dtype=np.int64)
    for k in range(z_proc.size):
        x = sa * st[0] + sz * z_proc[k]
        _advance_accuracy(acc, u_acc[k], cdf)
        v_prior = 1.0 - alpha * (1.0 - st[2])
        i = _lookup(v_prior, v0, h, zeta_tab.size)
        zeta = zeta_tab[i]
        sm = s_tab[i]
        # threshold rule: fill the best states first up to marginal B zeta / N
        left = B * zeta / N
        for s in range(ns - 1, -1, -1):
            if left <= 0.0:
                q[s] = 0.0
            elif pi[s] <= left:
                q[s] = 1.0
                left -= pi[s]
            else:
                q[s] = left / pi[s]
                left = 0.0
        occ[:] = 0
        n_act = 0
        for n in range(N):
            if zeta > 0.0 and sm > 0.0 and u_act[k, n] < q[acc[n]]:
                c = min(int(u_chan[k, n] * B), B - 1)
                chan[n] = c
                occ[c] += 1
                n_act += 1
            else:
                chan[n] = -1
        base = s_ambient * sm / (s_ambient + sm) if sm > 0 else 0.0
        sd = math.sqrt(1.0 / s_ambient + 1.0 / sm) if sm > 0 else 0.0
        lam = 0.0
        wsum = 0.0
        for n in range(N):
            c = chan[n]
            if c >= 0 and occ[c] == 1:
                g = states[acc[n]]
                y = g * x + sd * noise[k, n]
                snr = g * g * base
                lam += snr
                wsum += snr / g * y
        coll = 0
        for c in range(B):
            if occ[c] >= 2:
                coll += 1
        mean = sa * st[1]
        v_post = v_prior / (1.0 + v_prior * lam)
        x_hat = mean + v_post * (wsum - lam * mean)
        st[0], st[1], st[2] = x, x_hat, v_post
        o_vprior[k] = v_prior
        o_vpost[k] = v_post
        o_lam[k] = lam
        o_se[k] = (x_hat - x) ** 2
        o_cost[k] = n_act * (c_tx + phi * sm)
        o_active[k] = n_act
        o_coll[k] = coll


# --- streams ------------------------------------------------------------------


class _Streams:
    """Per-entity generators spawned from one seed."""

    def __init__(self, seed: int, n_sensors: int):
        root = np.random.SeedSequence(seed)
        proc, fc, sensors = root.spawn(3)
        self.process = np.random.default_rng(proc)
        self.fc = np.random.default_rng(fc)
        kids = sensors.spawn(n_sensors)
        # per sensor: accuracy, activation, channel choice, measurement noise
        self.sensor = [[np.random.default_rng(s) for s in kid.spawn(4)] for kid in kids]

    def uniforms(self, which: int, C: int) -> np.ndarray:
        out = np.empty((C, len(self.sensor)))
        for n, g in enumerate(self.sensor):
            out[:, n] = g[which].random(C)
        return out

    def normals(self, C: int) -> np.ndarray:
        out = np.empty((C, len(self.sensor)))
        for n, g in enumerate(self.sensor):
            out[:, n] = g[3].standard_normal(C)
        return out

    def initial_accuracy(self, pi: np.ndarray) -> np.ndarray:
        cdf = np.cumsum(pi)
        u = np.array([g[0].random() for g in self.sensor])
        return np.minimum(np.searchsorted(cdf, u, side="right"), pi.size - 1).astype(np.int64)


# --- episodes -----------------------------------------------------------------


@dataclass
class Trajectory:
    v_prior: np.ndarray
    v_post: np.ndarray
    lam: np.ndarray
    sq_error: np.ndarray
    cost: np.ndarray
    n_active: np.ndarray
    collisions: np.ndarray

    def to_csv(self) -> str:
        lines = ["slot,v_prior,v_post,lambda"]
        for k in range(self.v_post.size):
            lines.append(f"{k},{self.v_prior[k]!r},{self.v_post[k]!r},{self.lam[k]!r}")
        return "\n".join(lines) + "\n"


@dataclass
class EpisodeResult:
    point: TradeoffPoint
    trajectory: Trajectory | None = None


def batch_se(x: np.ndarray, n_batches: int = N_BATCHES) -> float:
    """Standard error of the mean of a correlated series by non-overlapping batch means."""
    m = x.size // n_batches
    if m < 2:
        return math.nan
    means = x[: m * n_batches].reshape(n_batches, m).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def _summarize(cfg: SimConfig, scheme: str, knob_kind: str, knob_value: float, traj: Trajectory) -> TradeoffPoint:
    net = float(traj.cost.mean())
    return TradeoffPoint(
        scheme=scheme, scenario=cfg.scenario, knob_kind=knob_kind, knob_value=float(knob_value),
        per_sn_cost=net / cfg.n_sensors, network_cost=net, mse=float(traj.v_post.mean()),
        outage=float(np.mean(traj.v_post >= cfg.outage_threshold)),
        collisions_per_slot=float(traj.collisions.mean()), seed=cfg.seed, slots=cfg.slots,
        mse_se=batch_se(traj.v_post), sq_error=float(traj.sq_error.mean()),
    )


def run_episode(cfg: SimConfig, policy, knob: tuple[str, float] = ("none", math.nan),
                record: bool = False) -> EpisodeResult:
    """Simulate ``cfg.slots`` slots under ``policy`` starting from ``V_0 = 1``."""
    chain = cfg.effective_chain()
    N, T = cfg.n_sensors, cfg.slots
    streams = _Streams(cfg.seed, N)
    cdf = np.cumsum(chain.transition, axis=1)
    cdf[:, -1] = 1.0
    acc = streams.initial_accuracy(chain.stationary)
    x0 = streams.process.standard_normal()
    out = {k: np.empty(T) for k in ("v_prior", "v_post", "lam", "sq_error", "cost", "n_active", "collisions")}
    markov = chain.n_states > 1
    if isinstance(policy, CoordPolicy):
        st = np.array([x0, 0.0, 1.0, 1.0])
        out["collisions"][:] = 0.0
    elif isinstance(policy, DecPolicy):
        st = np.array([x0, 0.0, 1.0])
    else:
        raise TypeError(f"unsupported policy type {type(policy).__name__}")
    c = cfg.cost
    for start in range(0, T, CHUNK):
        C = min(CHUNK, T - start)
        sl = slice(start, start + C)
        z = streams.process.standard_normal(C)
        u_acc = streams.uniforms(0, C) if markov else np.zeros((C, N))
        noise = streams.normals(C)
        views = [out[k][sl] for k in ("v_prior", "v_post", "lam", "sq_error", "cost", "n_active")]
        if isinstance(policy, CoordPolicy):
            u_fc = streams.fc.random(C)
            _coord_chunk(cfg.alpha, cfg.s_ambient, c.c_tx, c.phi, chain.states, cdf, acc, z, u_fc, u_acc,
                         noise, policy.v0, policy.h, policy.t_floor, policy.t_frac, policy.s_measure, st, *views)
        else:
            u_act = streams.uniforms(1, C)
            u_chan = streams.uniforms(2, C)
            _dec_chunk(cfg.alpha, cfg.s_ambient, c.c_tx, c.phi, cfg.n_channels, chain.states, cdf,
                       chain.stationary, acc, z, u_acc, u_act, u_chan, noise, policy.v0, policy.h,
                       policy.zeta, policy.s_measure, st, *views, out["collisions"][sl])
    traj = Trajectory(**out)
    point = _summarize(cfg, policy.name, knob[0], knob[1], traj)
    return EpisodeResult(point, traj if record else None)


def with_seed(cfg: SimConfig, seed: int) -> SimConfig:
    return replace(cfg, seed=seed)
