"""One mean-field trajectory of the linear rule, plus where its average
lands inside the closed-form band.

Demand: normal valuations (mean 210, sigma 2.5), four arrivals per target
block. At d = 0.125 this market is chaotic — the fee never settles — yet
the long-run average block size stays within a 6.3% overshoot of target.
"""

import feemarket as fm

dist = fm.ValuationDist(fm.DistKind.NORMAL, m=210.0, w=10.0)
market = fm.MarketParams(target=1.0, k=2, lam=4.0, valuation=dist)
mech = fm.MechanismSpec(fm.Rule.EIP1559, d=0.125)
cfg = fm.SimConfig(market=market, mechanism=mech, b0=170.0)

b_star = fm.market_clearing_price(market)
print(f"market-clearing price b* = {b_star:.4f}")

traj = fm.run(cfg)  # records 100 steps after 200 burn-in
print(f"recorded heights {traj.heights[0]}..{traj.heights[-1]}")
print(f"fee range on the attractor: [{traj.base_fees.min():.3f}, "
      f"{traj.base_fees.max():.3f}]")
print(f"relative sizes: min {traj.relative_block_sizes().min():.3f}, "
      f"max {traj.relative_block_sizes().max():.3f}")

avg_fee, avg_size = fm.run_average(cfg, long_n=100_000)
band = fm.theorem1_upper_bound(mech.d, market.target)
print(f"\nlong-run average block size {avg_size:.5f} "
      f"(band [{band.lower_bound}, {band.upper_bound:.5f}])")
print(f"long-run average fee {avg_fee:.3f} -- slightly under b* = {b_star:.3f}")

# same market, stochastic Poisson arrivals: seeded, hence reproducible
stoch = fm.SimConfig(
    market=market,
    mechanism=mech,
    demand=fm.DemandMode.stochastic("poisson"),
    b0=170.0,
    seed=7,
)
avg_fee_s, avg_size_s = fm.run_average(stoch, long_n=50_000)
print(f"\nstochastic run (seed 7): average size {avg_size_s:.5f}, "
      f"average fee {avg_fee_s:.3f}")
print("rerunning with the same seed reproduces these numbers exactly:",
      fm.run_average(stoch, long_n=50_000).avg_block_size == avg_size_s)
