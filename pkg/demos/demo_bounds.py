"""Closed-form band on long-run average block sizes, and the logarithm
chord coefficients it is built from.

The linear update rule multiplies the fee by (1 + d*(g-T)/T) each block.
Taking logs and sandwiching ln(1+x) between its chord over [-d, d] and the
line y = x turns the fee recursion into a telescoping sum, which bounds the
average block size between T and a d-dependent multiple of 2T.
"""

import feemarket as fm

print(f"{'d':>6} {'upper/T':>10} {'factor of limit':>16} {'overshoot %':>12}")
for d in (0.01, 0.05, 0.1, 0.125, 0.2, 0.3, 0.4, 0.5):
    rep = fm.theorem1_upper_bound(d, T=1.0)
    print(
        f"{d:6.3f} {rep.upper_bound:10.5f} {rep.factor:16.5f} "
        f"{(rep.upper_bound - 1) * 100:12.2f}"
    )

print("\nchord of ln(1+x) over [-d, d]  (ln(1+x) >= alpha*x + beta there):")
for d in (0.05, 0.125, 0.25, 0.5):
    alpha, beta = fm.lemma2_coeffs(d)
    print(f"  d={d:<6} alpha={alpha:.6f}  beta={beta:+.6f}")

# the band at the protocol default, in limit-relative units
rep = fm.theorem1_upper_bound(0.125)
print(
    f"\nat d=0.125 a half-full target permits relative averages in "
    f"[0.5, {rep.factor:.4f}]"
)
