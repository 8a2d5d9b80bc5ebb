"""Finite-horizon dynamic programs over the FC prior variance.

Both solvers run ``iterations`` backward steps of relative value iteration on
a uniform grid of prior variances covering [1 - alpha, 1]. The next-slot prior
``nu(nu_hat(V, L))`` falls between grid points and is read off by linear
interpolation. The value is re-centred on its grid mean after every step; the
removed amount estimates the average cost per slot.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import optimize

from ..channel import binomial_success_matrix
from .closed_form import CostModel, allocation_arrays

TIE_TOL = 1e-12


@dataclass(frozen=True)
class DpGrid:
    n_v: int = 2001
    n_lambda: int = 400
    lambda_min: float = 1e-3
    n_zeta: int = 201
    n_sm: int = 200
    sm_range: tuple = (1e-2, 1e3)

    def v_grid(self, alpha: float) -> np.ndarray:
        return np.linspace(1.0 - alpha, 1.0, self.n_v)

    def lambda_grid(self, s_ambient: float, n_channels: int) -> np.ndarray:
        top = n_channels * s_ambient * (1 - 1e-6)
        return np.concatenate([[0.0], np.geomspace(self.lambda_min, top, self.n_lambda)])

    def zeta_grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_zeta)

    def sm_grid(self) -> np.ndarray:
        return np.concatenate([[0.0], np.geomspace(*self.sm_range, self.n_sm)])


@dataclass(frozen=True)
class PolicyTable:
    """Relative value and greedy action on a prior-variance grid."""

    scheme: str  # "coord" or "dec"
    v: np.ndarray
    value: np.ndarray
    actions: dict  # column name -> array over v
    params: dict = field(default_factory=dict)
    gain: float = math.nan  # average cost per slot
    spans: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        if self.scheme not in ("coord", "dec"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        for k, a in self.actions.items():
            if np.shape(a) != self.v.shape:
                raise ValueError(f"action column {k} does not match the grid")
        if not np.all(np.isfinite(self.value)):
            raise ValueError("value function is not finite")

    @property
    def alpha(self) -> float:
        return float(self.params["alpha"])

    def index(self, v) -> np.ndarray:
        """Nearest grid index of each prior variance."""
        h = self.v[1] - self.v[0]
        i = np.rint((np.asarray(v, dtype=float) - self.v[0]) / h).astype(np.int64)
        return np.clip(i, 0, self.v.size - 1)

    def lookup(self, name: str, v):
        out = self.actions[name][self.index(v)]
        return out if np.ndim(out) else float(out)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# scheme = {self.scheme}\n")
        for k, val in self.params.items():
            buf.write(f"# {k} = {val!r}\n")
        buf.write(f"# gain = {self.gain!r}\n")
        cols = ["v", "value", *self.actions]
        buf.write(",".join(cols) + "\n")
        data = np.column_stack([self.v, self.value, *self.actions.values()])
        for row in data:
            buf.write(",".join(repr(float(x)) for x in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PolicyTable":
        meta, body = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                meta[key.strip()] = val.strip()
            elif line.strip():
                body.append(line)
        header = body[0].split(",")
        data = np.array([[float(x) for x in ln.split(",")] for ln in body[1:]])
        scheme = meta.pop("scheme")
        gain = float(meta.pop("gain", "nan"))
        params = {}
        for k, v in meta.items():
            try:
                params[k] = float(v) if any(ch in v for ch in ".en") else int(v)
            except ValueError:
                params[k] = v.strip("'\"")
        actions = {name: data[:, i] for i, name in enumerate(header[2:], start=2)}
        return cls(scheme, data[:, 0], data[:, 1], actions, params, gain)


def _interp_setup(v_next: np.ndarray, v: np.ndarray):
    """Left index and weight of each next-state value on the uniform grid ``v``."""
    h = v[1] - v[0]
    pos = (v_next - v[0]) / h
    lo = np.clip(np.floor(pos).astype(np.int64), 0, v.size - 2)
    frac = np.clip(pos - lo, 0.0, 1.0)
    return lo, frac


def _interp(w: np.ndarray, lo: np.ndarray, frac: np.ndarray) -> np.ndarray:
    return w[lo] * (1.0 - frac) + w[lo + 1] * frac


def _posterior(v, lam):
    return v / (1.0 + v * lam)


def _first_within(vals: np.ndarray, axis: int = -1) -> np.ndarray:
    """Index of the first entry within TIE_TOL of the minimum along ``axis``."""
    best = vals.min(axis=axis, keepdims=True)
    return np.argmax(vals <= best + TIE_TOL, axis=axis)


def coord_dp_solve(alpha: float, s_ambient: float, cost: CostModel, n_channels: int, lagrange: float,
                   iterations: int = 100, grid: DpGrid = DpGrid(), damping: float = 0.5) -> PolicyTable:
    """Coordinated-scheme DP; the action is the target aggregate SNR.

    Each target is met at least cost by ``snr_allocation``; the stage cost is
    ``nu_hat(V, L) + lagrange * t*(L) * (1 + theta S_M*(L))``.

    The dynamics are deterministic and good policies cycle (sense, then idle
    until V recovers), so plain relative value iteration oscillates. The
    update is damped, ``w <- (1 - damping) w + damping T w``, which has the
    same fixed points and greedy policy but no periodicity.
    """
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    if iterations < 1:
        raise ValueError("need at least one DP iteration")
    if lagrange < 0:
        raise ValueError("lagrange multiplier must be nonnegative")
    v = grid.v_grid(alpha)
    lam = grid.lambda_grid(s_ambient, n_channels)
    t, sm = allocation_arrays(lam, s_ambient, cost.theta, n_channels)
    act_cost = lagrange * t * (1.0 + cost.theta * sm)
    post = _posterior(v[:, None], lam[None, :])
    stage = post + act_cost[None, :]
    lo, frac = _interp_setup(1.0 - alpha * (1.0 - post), v)
    w = np.zeros(v.size)
    spans, gain, prev_inc = [], 0.0, None
    for _ in range(iterations):
        q = stage + _interp(w, lo, frac)
        inc = q.min(axis=1) - w
        if prev_inc is not None:
            spans.append(inc.max() - inc.min())
        prev_inc = inc
        gain = float(inc.mean())
        w = w + damping * inc
        w -= w.mean()
    q = stage + _interp(w, lo, frac)
    best = _first_within(q, axis=1)
    params = dict(alpha=alpha, s_ambient=s_ambient, c_tx=cost.c_tx, phi=cost.phi,
                  n_channels=n_channels, lagrange=lagrange, iterations=iterations, damping=damping)
    actions = {"lambda": lam[best], "t_active": t[best].astype(float), "s_measure": sm[best]}
    return PolicyTable("coord", v, w, actions, params, gain, np.array(spans))


@numba.njit(cache=True, nogil=True)
def _dec_sweep(w, v, alpha, s_loc, zetas, sm_cost, pmf, lagrange, tol, out, arg):
    """One Bellman sweep. ``arg`` receives the first (zeta-major) action within
    ``tol`` of the minimum when ``tol >= 0``; only minima are computed otherwise."""
    nv, ns, nz, nr = v.size, s_loc.size, zetas.size, pmf.shape[1]
    h0, step = v[0], v[1] - v[0]
    hv = np.empty((ns, nr))
    q = np.empty((nz, ns))
    for i in range(nv):
        for s in range(ns):
            for r in range(nr):
                post = v[i] / (1.0 + v[i] * r * s_loc[s])
                pos = (1.0 - alpha * (1.0 - post) - h0) / step
                lo = min(max(int(np.floor(pos)), 0), nv - 2)
                frac = min(max(pos - lo, 0.0), 1.0)
                hv[s, r] = post + w[lo] * (1.0 - frac) + w[lo + 1] * frac
        best = np.inf
        for k in range(nz):
            for s in range(ns):
                acc = lagrange * zetas[k] * sm_cost[s]
                for r in range(nr):
                    acc += pmf[k, r] * hv[s, r]
                q[k, s] = acc
                if acc < best:
                    best = acc
        out[i] = best
        if tol >= 0.0:
            done = False
            for k in range(nz):
                for s in range(ns):
                    if q[k, s] <= best + tol:
                        arg[i] = k * ns + s
                        done = True
                        break
                if done:
                    break


@numba.njit(cache=True, nogil=True)
def _dec_point_value(vi, w, v, alpha, s_ambient, theta, B, lagrange, zeta, sm):
    """Bellman objective at one grid state for a continuous action (zeta, S_M)."""
    s = s_ambient * sm / (s_ambient + sm) if sm > 0 else 0.0
    p = zeta * math.exp(-zeta)
    h0, step, nv = v[0], v[1] - v[0], v.size
    total = lagrange * zeta * (1.0 + theta * sm)
    binom = 1.0
    for r in range(B + 1):
        if r > 0:
            binom = binom * (B - r + 1) / r
        prob = binom * p**r * (1.0 - p) ** (B - r)
        post = v[vi] / (1.0 + v[vi] * r * s)
        pos = (1.0 - alpha * (1.0 - post) - h0) / step
        lo = min(max(int(math.floor(pos)), 0), nv - 2)
        frac = min(max(pos - lo, 0.0), 1.0)
        total += prob * (post + w[lo] * (1.0 - frac) + w[lo + 1] * frac)
    return total


def _joint_refine(f, x0, bounds, restarts: int = 3):
    """Bounded Nelder-Mead polish of (zeta, log S_M); keeps ``x0`` unless strictly better.

    The objective has long flat valleys, so the search is restarted from its
    own result until a restart stops improving.
    """
    x, fx = np.asarray(x0, dtype=float), f(x0)
    for _ in range(restarts + 1):
        res = optimize.minimize(f, x, method="Nelder-Mead", bounds=bounds,
                                options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000})
        if res.fun >= fx - TIE_TOL:
            break
        x, fx = res.x, res.fun
    return x, fx


def dec_dp_solve(alpha: float, s_ambient: float, cost: CostModel, n_channels: int, lagrange: float,
                 iterations: int = 100, grid: DpGrid = DpGrid(), refine: bool = True) -> PolicyTable:
    """Decentralized-scheme DP; the action is (zeta, S_M) broadcast to every sensor.

    Successes follow the large-network binomial law with B trials and
    per-channel success probability ``zeta e^-zeta``. The stage cost is
    ``E[nu_hat(V, R s(S_M))] + lagrange * zeta * (1 + theta S_M)``.
    """
    if iterations < 1:
        raise ValueError("need at least one DP iteration")
    if lagrange < 0:
        raise ValueError("lagrange multiplier must be nonnegative")
    B, theta = n_channels, cost.theta
    v = grid.v_grid(alpha)
    zetas, sms = grid.zeta_grid(), grid.sm_grid()
    s_loc = s_ambient * sms / (s_ambient + sms)
    sm_cost = 1.0 + theta * sms
    pmf = binomial_success_matrix(zetas, B)
    w = np.zeros(v.size)
    out = np.empty(v.size)
    arg = np.zeros(v.size, dtype=np.int64)
    spans, gain, prev_inc = [], 0.0, None
    for _ in range(iterations):
        _dec_sweep(w, v, alpha, s_loc, zetas, sm_cost, pmf, lagrange, -1.0, out, arg)
        inc = out - w
        if prev_inc is not None:
            spans.append(inc.max() - inc.min())
        prev_inc = inc
        gain = float(out.mean() - w.mean())
        w = out - out.mean()
    _dec_sweep(w, v, alpha, s_loc, zetas, sm_cost, pmf, lagrange, TIE_TOL, out, arg)
    best = arg
    zi, si = np.divmod(best, sms.size)
    zeta, sm = zetas[zi].copy(), sms[si].copy()
    if refine:
        # polish (zeta, S_M) jointly within two grid cells; coordinate-wise polishing
        # leaves one-cell dips in zeta wherever the S_M grid index jumps
        for vi in range(v.size):
            if zeta[vi] == 0.0:
                sm[vi] = 0.0
                continue
            j, k = zi[vi], max(si[vi], 1)
            bounds = [(zetas[max(j - 2, 0)], zetas[min(j + 2, zetas.size - 1)]),
                      (math.log(sms[max(k - 2, 1)]), math.log(sms[min(k + 2, sms.size - 1)]))]

            def f(x, vi=vi):
                return _dec_point_value(vi, w, v, alpha, s_ambient, theta, B, lagrange, x[0], math.exp(x[1]))

            x, _ = _joint_refine(f, np.array([zeta[vi], math.log(sms[k])]), bounds)
            zeta[vi], sm[vi] = x[0], math.exp(x[1])
    params = dict(alpha=alpha, s_ambient=s_ambient, c_tx=cost.c_tx, phi=cost.phi,
                  n_channels=n_channels, lagrange=lagrange, iterations=iterations)
    actions = {"zeta": zeta, "s_measure": sm}
    return PolicyTable("dec", v, w, actions, params, gain, np.array(spans))
