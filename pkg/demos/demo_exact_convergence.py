"""The exponential rule meets the target exactly on average.

Its log-fee increments are proportional to the block-size deviation, so
summing them telescopes: G_N - T = T * (ln b_{N+1} - ln b_1) / (N ln(1+d)).
The gap is an identity, not an estimate, and decays like 1/N because the
fee stays bounded.
"""

import numpy as np

import feemarket as fm

dist = fm.ValuationDist(fm.DistKind.NORMAL, m=210.0, w=10.0)
market = fm.MarketParams(target=1.0, k=2, lam=4.0, valuation=dist)
mech = fm.MechanismSpec(fm.Rule.EXP1559, d=0.125)
cfg = fm.SimConfig(market=market, mechanism=mech, b0=1.0, n_skip=0, n_iter=128_000)

traj = fm.run(cfg)
gaps = fm.convergence_gap(traj, mech)

err = np.abs(gaps.measured - gaps.lower)
print(f"identity residual over {len(traj)} prefixes: max {err.max():.3e}")

print(f"\n{'N':>8} {'|G_N - T|':>12} {'ratio to previous':>18}")
prev = None
for k in range(8):
    n = 1000 * 2**k
    gap = abs(gaps.measured[n - 1])
    ratio = f"{gap / prev:18.4f}" if prev else f"{'--':>18}"
    print(f"{n:8d} {gap:12.3e} {ratio}")
    prev = gap

print("\nthe gap halves with each doubling of N: O(1/N) convergence,")
print("and the same telescoping brackets the linear rule's gap instead of")
print("pinning it (run fm.convergence_gap on an eip1559 trajectory to see).")
