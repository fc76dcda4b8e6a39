"""All six update rules side by side on the same market, plus what the
properness checker reports about each.

The direction condition (fee moves with the sign of g - T) and bounded
relative steps are what make the average-block-size guarantees go through;
the welfare rules opt out of the direction goal by design, and the
effective-gas-price correction can refuse to lower the fee when included
transactions pay extreme tips.
"""

import numpy as np

import feemarket as fm

dist = fm.ValuationDist(fm.DistKind.UNIFORM, m=215.0, w=30.0)
market = fm.MarketParams(target=1.0, k=2, lam=2.0, valuation=dist)
b_star = fm.market_clearing_price(market)
print(f"uniform valuations on [200, 230], b* = {b_star:.1f}\n")

specs = {
    "eip1559": fm.MechanismSpec(fm.Rule.EIP1559, d=0.125),
    "exp1559": fm.MechanismSpec(fm.Rule.EXP1559, d=0.125),
    "amm": fm.MechanismSpec(fm.Rule.AMM, q=0.1),
    "wel": fm.MechanismSpec(fm.Rule.WEL, alpha_wel=0.5),
    "twel": fm.MechanismSpec(fm.Rule.TWEL, alpha_wel=0.5, delta=0.1),
    "egpcure": fm.MechanismSpec(fm.Rule.EGP_CURE, d=0.125, gamma=0.1,
                                intensity=0.5),
}

# one step from the same over-target state for every rule
state = fm.FeeState(base_fee=210.0)
g = fm.mean_field_block_size(210.0, market)
print(f"one step from b=210 (block size g={g:.3f} > T):")
for name, spec in specs.items():
    vals = [228.0, 224.0] if spec.rule in (fm.Rule.WEL, fm.Rule.TWEL) else None
    m_n = 212.0 if spec.rule is fm.Rule.EGP_CURE else None
    nxt = fm.step(state, g, spec, market, included_valuations=vals,
                  min_effective_price=m_n)
    print(f"  {name:8} -> {nxt.base_fee:9.4f}"
          + (f"  (excess gas {nxt.excess_gas:.3f})" if name == "amm" else ""))

# long-run averages: the linear rule overshoots a little, the exponential
# rule nails the target, the reserve rule undershoots toward it
print("\nlong-run average block size (mean-field, 20k steps):")
for name in ("eip1559", "exp1559", "amm"):
    cfg = fm.SimConfig(market=market, mechanism=specs[name], b0=100.0,
                       n_skip=200)
    avg = fm.run_average(cfg, long_n=20_000).avg_block_size
    print(f"  {name:8} -> {avg:.5f}")

print("\nproperness probes (direction / bounded steps):")
probes = list(np.geomspace(50.0, 500.0, 25))
for name, spec in specs.items():
    rep = fm.check_properness(spec, market, probes)
    a1 = {True: "pass", False: "FAIL", None: "n/a"}[rep.a1_ok]
    a2 = "pass" if rep.a2_ok else (
        "relaxed" if rep.a2_prime_ok else "FAIL")
    extra = ""
    if rep.a2_ok:
        extra = f" alpha={rep.alpha:.4f}"
    elif rep.a2_prime_ok:
        extra = f" alpha'={rep.a2_prime_alpha:.3f} beta'={rep.a2_prime_beta:.1f}"
    if rep.a1_violations:
        w = rep.a1_violations[0]
        extra += (f"  [witness: fee {w.fee:.0f}, g={w.block_size:.2f} < T, "
                  f"worst next fee {w.worst_case_fee:.1f}]")
    print(f"  {name:8} direction={a1:4}  steps={a2}{extra}")
