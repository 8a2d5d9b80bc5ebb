"""Fusion-center Kalman filter on the scalar prior/posterior variance recursion.

Two equivalent representations of the posterior-variance path are kept:

* the scalar recursion ``V = 1 - alpha (1 - V_post)``, ``V_post = V / (1 + V L)``;
* the linear ratio form ``X_k = P_k X_{k-1}`` with ``X = (N, D)`` and
  ``V_post_k = N_k / D_k``, which makes derivatives with respect to the
  aggregate SNRs available in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def prior_update(v_post, alpha: float):
    """Prior variance of the next slot given the current posterior variance."""
    if np.ndim(v_post):
        return 1.0 - alpha * (1.0 - np.asarray(v_post, dtype=float))
    return 1.0 - alpha * (1.0 - v_post)


def posterior_update(v_prior, lambda_agg):
    """Posterior variance after fusing aggregate SNR ``lambda_agg``.

    ``lambda_agg = inf`` (noiseless report) gives 0. Clamped to [0, 1].
    """
    v = np.asarray(v_prior, dtype=float)
    lam = np.asarray(lambda_agg, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(np.isinf(lam), 0.0, v / (1.0 + v * lam))
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class FcBelief:
    """Posterior belief N(x_hat, v_post) at the end of a slot, with its prior variance."""

    x_hat: float = 0.0
    v_prior: float = 1.0
    v_post: float = 1.0

    def __post_init__(self):
        if self.v_post > self.v_prior + 1e-12:
            raise ValueError("posterior variance cannot exceed prior variance")


def fuse(belief: FcBelief, reports, alpha: float) -> FcBelief:
    """One FC slot: predict from ``belief`` and fuse successfully received reports.

    ``reports`` is an iterable of ``(y, gamma, local_snr)``. The weighted mean
    ``sum (S/gamma) y / sum S`` is the sufficient statistic; its precision is
    the aggregate SNR ``sum S``.
    """
    reports = list(reports)
    m = np.sqrt(alpha) * belief.x_hat
    v_prior = prior_update(belief.v_post, alpha)
    lam = 0.0
    weighted = 0.0
    for y, gamma, snr in reports:
        if snr <= 0:
            raise ValueError("received reports must carry a positive local SNR")
        lam += snr
        weighted += snr / gamma * y
    if lam == 0.0:
        return FcBelief(m, v_prior, v_prior)
    v_post = posterior_update(v_prior, lam)
    y_bar = weighted / lam
    return FcBelief(m + lam * v_post * (y_bar - m), v_prior, v_post)


def _recursion(v0: float, snrs: np.ndarray, alpha: float) -> np.ndarray:
    out = np.empty(snrs.size)
    v_prior = v0
    for k, lam in enumerate(snrs):
        v_post = v_prior / (1.0 + v_prior * lam)
        out[k] = v_post
        v_prior = 1.0 - alpha * (1.0 - v_post)
    return out


@dataclass(frozen=True)
class VarianceTrajectory:
    """Posterior-variance path with its ratio-form representation.

    ``n`` and ``d`` are the ratio-form components rescaled so that ``d`` is 1
    at every step; the dropped factors are accumulated in ``log_d`` so that
    ``N_k = n_k exp(log_d_k)`` and ``D_k = exp(log_d_k)``.
    """

    v0: float
    alpha: float
    snrs: np.ndarray
    v_post: np.ndarray
    n: np.ndarray
    log_d: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        return self.n

    @property
    def v_prior(self) -> np.ndarray:
        out = np.empty(self.v_post.size)
        out[0] = self.v0
        out[1:] = 1.0 - self.alpha * (1.0 - self.v_post[:-1])
        return out


def ratio_form(v0: float, snrs, alpha: float):
    """Propagate ``X_k = P_k X_{k-1}`` from ``X_{-1} = ((v0 - (1-alpha))/alpha, 1)``.

    Returns ``(n, log_d)`` with ``n_k = N_k / D_k`` and ``log_d_k = log D_k``.
    ``alpha = 0`` is handled by starting one step later from ``X_0 = (v0, 1 + v0 L_0)``.
    """
    snrs = np.asarray(snrs, dtype=float)
    n_out = np.empty(snrs.size)
    logd_out = np.empty(snrs.size)
    if alpha > 0:
        N, D = (v0 - (1.0 - alpha)) / alpha, 1.0
        start = 0
        log_scale = 0.0
    else:
        N, D = v0, 1.0 + v0 * snrs[0]
        log_scale = np.log(D)
        N, D = N / D, 1.0
        n_out[0], logd_out[0] = N, log_scale
        start = 1
    for k in range(start, snrs.size):
        lam = snrs[k]
        N, D = alpha * N + (1.0 - alpha) * D, alpha * lam * N + (1.0 + (1.0 - alpha) * lam) * D
        log_scale += np.log(D)
        N, D = N / D, 1.0
        n_out[k], logd_out[k] = N, log_scale
    return n_out, logd_out


def variance_trajectory(v0: float, snr_sequence, alpha: float, check: bool = True) -> VarianceTrajectory:
    """Posterior variances ``V_post_0..V_post_k`` under an aggregate-SNR sequence."""
    snrs = np.asarray(snr_sequence, dtype=float)
    if not 0.0 <= v0 <= 1.0:
        raise ValueError("v0 must lie in [0, 1]")
    if np.any(snrs < 0):
        raise ValueError("aggregate SNRs must be nonnegative")
    if snrs.size == 0:
        empty = np.empty(0)
        return VarianceTrajectory(v0, alpha, snrs, empty, empty, empty)
    v = _recursion(v0, snrs, alpha)
    n, log_d = ratio_form(v0, snrs, alpha)
    if check and np.abs(v - n).max() > 1e-12:
        raise ArithmeticError("ratio form and scalar recursion disagree")
    return VarianceTrajectory(v0, alpha, snrs, v, n, log_d)


def sample_average_mse(v0: float, snr_sequence, alpha: float) -> float:
    """Mean of the posterior-variance path over the horizon."""
    traj = variance_trajectory(v0, snr_sequence, alpha, check=False)
    return float(traj.v_post.mean()) if traj.v_post.size else float(v0)


def mse_floor(lambda_bar, alpha: float):
    """Steady-state posterior variance under a constant aggregate SNR.

    Unique fixed point of ``v -> V_post(V_prior(v), lambda_bar)``; written in
    the rationalized form ``2 (1-a) / (sqrt(A) + (1-a)(1+x))`` which equals the
    textbook expression for ``x > 0`` and stays finite at ``x = 0`` and ``a = 0``.
    """
    x = np.asarray(lambda_bar, dtype=float)
    if np.any(x < 0):
        raise ValueError("aggregate SNR must be nonnegative")
    a = alpha
    root = np.sqrt((1 - a) ** 2 * (1 + x**2) + 2 * (1 - a**2) * x)
    out = 2 * (1 - a) / (root + (1 - a) * (1 + x))
    out = np.where(np.isinf(x), 0.0, out)
    return out if out.ndim else float(out)


def mse_floor_textbook(x: float, alpha: float) -> float:
    if x == 0:
        return 1.0
    a = alpha
    return (np.sqrt((1 - a) ** 2 * (1 + x * x) + 2 * (1 - a * a) * x) - (1 - a) * (1 + x)) / (2 * a * x)


def trajectory_gradient(v0: float, snr_sequence, alpha: float, i: int, k: int | None = None) -> float:
    """d V_post_k / d L_i = -alpha^(k-i) N_i^2 / D_k^2 (zero for i > k)."""
    snrs = np.asarray(snr_sequence, dtype=float)
    k = snrs.size - 1 if k is None else k
    if not 0 <= i <= k < snrs.size:
        if 0 <= k < i:
            return 0.0
        raise IndexError("need 0 <= i <= k < len(snr_sequence)")
    n, log_d = ratio_form(v0, snrs[: k + 1], alpha)
    # N_i^2 / D_k^2 = n_i^2 exp(2 (log D_i - log D_k))
    return -(alpha ** (k - i)) * n[i] ** 2 * np.exp(2.0 * (log_d[i] - log_d[k]))


def trajectory_gradients(v0: float, snr_sequence, alpha: float) -> np.ndarray:
    """Full gradient of ``V_post_k`` (last slot) with respect to every ``L_i``."""
    snrs = np.asarray(snr_sequence, dtype=float)
    k = snrs.size - 1
    n, log_d = ratio_form(v0, snrs, alpha)
    i = np.arange(k + 1)
    return -(alpha ** (k - i)) * n**2 * np.exp(2.0 * (log_d - log_d[k]))


def trajectory_v0_derivative(v0: float, snr_sequence, alpha: float) -> float:
    """d V_post_k / d v0 = alpha^k / D_k^2."""
    snrs = np.asarray(snr_sequence, dtype=float)
    _, log_d = ratio_form(v0, snrs, alpha)
    k = snrs.size - 1
    return alpha**k * np.exp(-2.0 * log_d[k])


def mean_mse_gradient(v0: float, snr_sequence, alpha: float) -> np.ndarray:
    """Gradient of the sample-average MSE with respect to each aggregate SNR."""
    snrs = np.asarray(snr_sequence, dtype=float)
    T = snrs.size
    n, log_d = ratio_form(v0, snrs, alpha)
    grad = np.zeros(T)
    for i in range(T):
        k = np.arange(i, T)
        grad[i] = -np.sum(alpha ** (k - i) * n[i] ** 2 * np.exp(2.0 * (log_d[i] - log_d[k])))
    return grad / T


@dataclass(frozen=True)
class OutageConfig:
    v_threshold: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.v_threshold < 1.0:
            raise ValueError("outage threshold must lie in (0, 1)")


def outage_rate(trajectory, cfg: OutageConfig) -> float:
    """Fraction of slots whose posterior variance reaches the threshold."""
    v = trajectory.v_post if isinstance(trajectory, VarianceTrajectory) else np.asarray(trajectory)
    if v.size == 0:
        raise ValueError("empty trajectory")
    return float(np.mean(v >= cfg.v_threshold))
