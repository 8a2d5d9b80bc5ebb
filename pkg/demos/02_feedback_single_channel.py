"""Feedback pays off even with one channel and perfect sensors.

With B = 1 and noiseless sensing a successful report reveals the state, so
the fusion center only needs to know how long ago the last success was.
A non-adaptive load (NA) ignores that age; the adaptive one (AMP) raises the
load as uncertainty grows. Both are simulated and compared against their
closed forms, then the cost saving at matched MSE is read off the curves.
"""

import numpy as np

from wsnfeedback.policies import amp_stationary_metrics, na_closed_form
from wsnfeedback.simulator import run_amp, run_na, savings_at_matched_mse

ALPHA, N = 0.95, 1000

print("NA at zeta = 1")
sim = run_na(1.0, ALPHA, N, slots=500_000, seed=3)
cost, mse = na_closed_form(1.0, ALPHA, 1.0, N)
print(f"  simulated cost {sim.per_sn_cost:.3e}, MSE {sim.mse:.4f}; closed form {cost:.3e}, {mse:.4f}")

print("AMP at lambda = 0.1")
sim = run_amp(0.1, ALPHA, N, slots=500_000, seed=3)
cost, mse = amp_stationary_metrics(0.1, ALPHA, 1.0, N)
print(f"  simulated cost {sim.per_sn_cost:.3e}, MSE {sim.mse:.4f}; closed form {cost:.3e}, {mse:.4f}")

na = [run_na(z, ALPHA, N, slots=200_000, seed=1) for z in np.geomspace(0.01, 1.0, 25)]
amp = [run_amp(l, ALPHA, N, slots=200_000, seed=1) for l in np.geomspace(0.001, 0.95, 30)]
rows = savings_at_matched_mse(amp, na)
print("\n  MSE    NA cost    AMP cost   saving")
for m, c_na, c_amp, s in rows[::3]:
    print(f"{m:6.3f}  {c_na:9.4f}  {c_amp:9.4f}  {s:6.1%}")
print(f"peak saving {rows[:, 3].max():.1%}")
