"""What does the optimal decentralized policy look like?

The fusion center broadcasts its prior variance V; every sensor then
activates with probability zeta(V) B / N_S and measures at S_M(V). Solving
the average-cost DP shows the sensors stay silent while the estimate is good
and step up both load and measurement quality as V grows. The load never
exceeds one transmitter per channel.
"""

import time

import numpy as np

from wsnfeedback.policies import CostModel, DpGrid, dec_dp_solve

cost = CostModel(c_tx=1.0, phi=0.25)
grid = DpGrid(n_v=1001, n_zeta=101, n_sm=100)  # half resolution, a few seconds

for lam in (0.1, 1.0, 5.0):
    t0 = time.perf_counter()
    tab = dec_dp_solve(0.96, 20.0, cost, 5, lam, 100, grid)
    z, sm, v = tab.actions["zeta"], tab.actions["s_measure"], tab.v
    on = z > 0
    print(f"lambda={lam}: solved in {time.perf_counter() - t0:.1f} s, average cost {tab.gain:.4f}")
    if on.any():
        print(f"  silent for V < {v[on].min():.3f}; max load {z.max():.3f}; S_M range "
              f"{sm[on].min():.2f}..{sm[on].max():.2f}")
    else:
        print("  silent everywhere")
    for target in (0.1, 0.3, 0.5, 0.8, 1.0):
        i = int(np.argmin(np.abs(v - target)))
        print(f"    V={v[i]:.3f}  zeta={z[i]:.3f}  S_M={sm[i]:.3f}")
