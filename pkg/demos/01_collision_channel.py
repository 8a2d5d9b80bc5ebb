"""How many reports get through a slotted collision channel?

Each of N_S sensors transmits with probability q on one of B channels picked
uniformly at random; a report succeeds only when it is alone on its channel.
We compare the exact success-count distribution with full enumeration on a
small network, then watch it approach the large-network binomial limit.
"""

import numpy as np

from wsnfeedback.channel import ChannelConfig, binomial_approx_pmf, brute_force_pmf, exact_success_pmf

np.set_printoptions(precision=5, suppress=True)

cfg = ChannelConfig(n_sensors=6, n_channels=3)
for q in (0.2, 0.5, 0.9):
    exact = exact_success_pmf(q, cfg)
    brute = brute_force_pmf(q, cfg)
    print(f"q={q}: P(R=r) = {exact.probs}  TV to enumeration = {exact.total_variation(brute):.1e}")

# Keep the per-channel load zeta = q N_S / B fixed and grow the network.
B, zeta = 5, 1.0
limit = binomial_approx_pmf(zeta, B)
print(f"\nbinomial limit at zeta={zeta}: {limit.probs}")
for n in (10, 50, 200, 1000):
    pmf = exact_success_pmf(B * zeta / n, ChannelConfig(n, B))
    print(f"N_S={n:5d}: sup gap {np.abs(pmf.probs - limit.probs).max():.2e}, mean successes {pmf.mean:.4f}")

# Offered load beyond one transmitter per channel only adds collisions.
zetas = np.linspace(0.1, 3.0, 8)
print("\nzeta  expected successes (large network)")
for z in zetas:
    print(f"{z:4.2f}  {B * z * np.exp(-z):.4f}")
