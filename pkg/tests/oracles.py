"""Independent reference computations shared by the unit and acceptance tests."""

import itertools

import numpy as np


def fixed_point_floor(lam, alpha, iters=200_000):
    """Plain fixed-point iteration of the one-slot variance map."""
    v = 1.0
    for _ in range(iters):
        nxt = (1 - alpha * (1 - v)) / (1 + (1 - alpha * (1 - v)) * lam)
        if abs(nxt - v) < 1e-16:
            break
        v = nxt
    return v


def average_variance(snrs, alpha):
    """Sample-average posterior variance from V_0 = 1; ``snrs`` has shape (..., T+1)."""
    v = np.ones(snrs.shape[:-1])
    total = np.zeros_like(v)
    for k in range(snrs.shape[-1]):
        post = v / (1 + v * snrs[..., k])
        total += post
        v = 1 - alpha * (1 - post)
    return total / snrs.shape[-1]


def simplex_grid_search(lambda_bar, alpha, T, n=61, levels=12):
    """Zooming grid over {L >= 0, sum L = (T+1) lambda_bar}; returns (best value, best sequence)."""
    S = (T + 1) * lambda_bar
    if T == 0:
        return 1 / (1 + S), np.array([S])
    lo, hi = np.zeros(T), np.full(T, S)
    best = (np.inf, None)
    for _ in range(levels):
        axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, T)
        last = S - pts.sum(axis=1)
        keep = last >= 0
        seq = np.column_stack([pts[keep], last[keep]])
        val = average_variance(seq, alpha)
        i = int(np.argmin(val))
        if val[i] < best[0]:
            best = (float(val[i]), seq[i])
        step = (hi - lo) / (n - 1)
        centre = best[1][:T]
        lo = np.maximum(centre - 3 * step, 0.0)
        hi = np.minimum(centre + 3 * step, S)
    return best


def enumerate_success_pmf(q, N, B):
    """Every sensor is idle or on one of B channels; sum the weights of each outcome."""
    probs = np.zeros(B + 1)
    for choice in itertools.product(range(B + 1), repeat=N):
        active = [c for c in choice if c]
        w = q ** len(active) * (1 - q) ** (N - len(active)) / B ** len(active)
        r = sum(1 for c in set(active) if active.count(c) == 1)
        probs[r] += w
    return probs


def stationary_by_linear_solve(P):
    """Replace one balance equation by the normalization and solve."""
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    return np.linalg.solve(A, b)
