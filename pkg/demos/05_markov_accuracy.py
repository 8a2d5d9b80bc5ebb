"""Sensors whose accuracy wanders, and a censoring baseline.

Each sensor's gain gamma follows a Markov chain. SCDP schedules the most
accurate sensors; SDDP lets each sensor activate with a probability that
favours high gamma. In a dense network enough sensors sit at the best
accuracy that both approach the best-gamma performance. The second part
pits DEC-DP against genie-aided censoring at the same network cost.
"""

from wsnfeedback.policies import CostModel, DpGrid, coord_dp_solve, dec_dp_solve, scdp_gap_bound
from wsnfeedback.process import AccuracyChain
from wsnfeedback.simulator import (CoordPolicy, DecPolicy, Mod17Config, SimConfig, match_budget, mod17_tune,
                                   run_episode, run_mod17)

cost = CostModel(1.0, 0.25)
grid = DpGrid(n_v=501, n_zeta=101, n_sm=100)
chain = AccuracyChain.paper_v()
coord = coord_dp_solve(0.96, 20.0, cost, 5, 0.2, 100, grid)
dec = dec_dp_solve(0.96, 20.0, cost, 5, 0.3, 100, grid)

print(" N_S   SCDP gap    SDDP gap    bound")
for n in (20, 50, 100, 200):
    best = SimConfig(n_sensors=n)
    markov = SimConfig(n_sensors=n, scenario="markov-gamma", chain=chain)
    gaps = []
    for pol in (CoordPolicy.from_table(coord, "scdp"), DecPolicy.from_table(dec, "sddp")):
        gaps.append(run_episode(markov, pol).point.mse - run_episode(best, pol).point.mse)
    print(f"{n:4d}  {gaps[0]:9.2e}  {gaps[1]:9.2e}  {scdp_gap_bound(0.96, n, chain.pi_max, 5):9.2e}")

print("\nbudget  censoring MSE / collisions   DEC-DP MSE / collisions")
cfg = SimConfig(n_sensors=100, scenario="markov-gamma", chain=chain, slots=3000)
tables = {}


def dec_point(lam):
    if lam not in tables:
        tables[lam] = dec_dp_solve(0.96, 20.0, cost, 5, lam, 100, grid)
    return run_episode(cfg, DecPolicy.from_table(tables[lam], "sddp"), ("lambda", lam)).point


for eps in (5.0, 20.0):
    q, sm = mod17_tune(eps, cost, 20.0, 5, 100)
    base = run_mod17(cfg, Mod17Config.from_q(q, sm), 3000)
    ours = match_budget(dec_point, base.network_cost, lo=1e-3, hi=100.0)
    print(f"{eps:6.1f}  {base.mse:8.4f} / {base.collisions_per_slot:.3f}"
          f"          {ours.mse:8.4f} / {ours.collisions_per_slot:.3f}")
