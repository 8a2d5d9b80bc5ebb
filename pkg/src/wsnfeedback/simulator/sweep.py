"""Trade-off sweeps, budget matching and curve comparisons."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, Iterable

import numpy as np

from ..policies.closed_form import max_snr_coordinated, max_snr_decentralized
from ..policies.dp import DpGrid, coord_dp_solve, dec_dp_solve
from .engine import CoordPolicy, DecPolicy, SimConfig, TradeoffPoint, run_episode

FAMILIES = ("coord-dp", "coord-snr", "dec-dp", "dec-snr", "idle")


def policy_factory(family: str, cfg: SimConfig, grid: DpGrid = DpGrid(), iterations: int = 100) -> Callable:
    """Map a knob value (lambda for DP families, budget for SNR families) to a policy."""
    c, B, S_A, a = cfg.cost, cfg.n_channels, cfg.s_ambient, cfg.alpha
    if family == "coord-dp":
        return lambda lam: CoordPolicy.from_table(coord_dp_solve(a, S_A, c, B, lam, iterations, grid))
    if family == "dec-dp":
        return lambda lam: DecPolicy.from_table(dec_dp_solve(a, S_A, c, B, lam, iterations, grid))
    if family == "coord-snr":
        return lambda eps: CoordPolicy.max_snr(max_snr_coordinated(eps, c, S_A, B))
    if family == "dec-snr":
        return lambda eps: DecPolicy.constant(*max_snr_decentralized(eps, c, S_A, B)[:2])
    if family == "idle":
        return lambda _: CoordPolicy.idle()
    raise ValueError(f"unknown policy family {family!r}; choose from {FAMILIES}")


def knob_kind(family: str) -> str:
    return "lambda" if family.endswith("-dp") else "epsilon"


def sweep_tradeoff(cfg: SimConfig, knobs: Iterable[float], family: str, seeds: Iterable[int] | None = None,
                   jobs: int = 1, grid: DpGrid = DpGrid(), iterations: int = 100) -> list[TradeoffPoint]:
    """One point per (knob, seed); the same seeds are reused across families.

    Episodes are independent, so they are spread over ``jobs`` worker threads
    and merged back in (knob, seed) order.
    """
    knobs = list(knobs)
    if not knobs:
        raise ValueError("empty knob grid")
    seeds = [cfg.seed] if seeds is None else list(seeds)
    make = policy_factory(family, cfg, grid, iterations)
    kind = knob_kind(family)

    def one_knob(value):
        policy = make(value)
        return [run_episode(replace(cfg, seed=s), policy, (kind, value)).point for s in seeds]

    if jobs <= 1:
        rows = [one_knob(v) for v in knobs]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one_knob, knobs))
    return [p for row in rows for p in row]


def match_budget(evaluate: Callable[[float], TradeoffPoint], target_network_cost: float,
                 lo: float = 1e-4, hi: float = 1e3, rel_tol: float = 0.01, max_iter: int = 40) -> TradeoffPoint:
    """Bisect the multiplier (in log scale) until the realized cost is within ``rel_tol``.

    Realized cost decreases in the multiplier. Returns the closest point seen
    if the tolerance is not met within ``max_iter`` evaluations.
    """
    best = None
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        p = evaluate(mid)
        err = p.network_cost / target_network_cost - 1.0
        if best is None or abs(err) < abs(best[0]):
            best = (err, p)
        if abs(err) <= rel_tol:
            return p
        if err > 0:
            lo = mid
        else:
            hi = mid
    return best[1]


def collision_stats(run) -> float:
    """Mean number of channels with two or more transmissions per slot."""
    if isinstance(run, TradeoffPoint):
        return run.collisions_per_slot
    return float(np.mean(run.collisions))


def _curve(points) -> tuple[np.ndarray, np.ndarray]:
    arr = np.array([(p.network_cost, p.mse) if isinstance(p, TradeoffPoint) else p for p in points], dtype=float)
    arr = arr[(arr[:, 0] > 0) & (arr[:, 1] < 1)]
    arr = arr[np.argsort(arr[:, 1])]
    return arr[:, 0], arr[:, 1]


def cost_at_mse(points, mse_levels) -> np.ndarray:
    """Log-log interpolated network cost of a curve at the given MSE levels (NaN outside)."""
    cost, mse = _curve(points)
    m = np.asarray(mse_levels, dtype=float)
    out = np.exp(np.interp(np.log(m), np.log(mse), np.log(cost)))
    out[(m < mse.min()) | (m > mse.max())] = np.nan
    return out


def savings_at_matched_mse(adaptive, reference) -> np.ndarray:
    """Relative cost saving of ``adaptive`` at each MSE level of ``reference``.

    Rows are (mse, reference cost, adaptive cost, saving) for reference
    points inside the MSE range spanned by ``adaptive``.
    """
    ref_cost, ref_mse = _curve(reference)
    ada = cost_at_mse(adaptive, ref_mse)
    keep = ~np.isnan(ada)
    return np.column_stack([ref_mse[keep], ref_cost[keep], ada[keep], 1 - ada[keep] / ref_cost[keep]])
