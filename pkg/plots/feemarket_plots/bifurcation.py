"""Four-panel bifurcation figure from sweep outputs.

Top row: raw attractor samples per grid value (fees left, relative block
sizes right).  Bottom row: long-run averages, with the bound curve overlaid
on the block-size panel.  Block-size axes run from 0 (empty) to 1 (full)
with the target marked at 0.5.
"""

import argparse

import matplotlib.pyplot as plt

from .common import column, read_rows, run_main, save

ATTRACTOR_COLUMNS = ["param_value", "sample_index", "base_fee", "block_size_rel"]
AVERAGE_COLUMNS = [
    "param_value",
    "avg_base_fee",
    "avg_block_size_rel",
    "theory_upper_rel",
]


def render(argv=None):
    ap = argparse.ArgumentParser(
        prog="plot-bifurcation",
        description="Render attractors.csv + averages.csv as a 4-panel figure.",
    )
    ap.add_argument("--attractors", required=True, help="attractors.csv path")
    ap.add_argument("--averages", required=True, help="averages.csv path")
    ap.add_argument("--out", required=True, help="output image (svg/png)")
    ap.add_argument(
        "--b-star",
        type=float,
        default=None,
        help="market-clearing price guide for the fee panels",
    )
    args = ap.parse_args(argv)

    att = read_rows(args.attractors, ATTRACTOR_COLUMNS)
    avg = read_rows(args.averages, AVERAGE_COLUMNS)

    a_param = column(att, "param_value")
    a_fee = column(att, "base_fee")
    a_rel = column(att, "block_size_rel")
    m_param = column(avg, "param_value")
    m_fee = column(avg, "avg_base_fee")
    m_rel = column(avg, "avg_block_size_rel")
    m_theory = column(avg, "theory_upper_rel", empty_as_none=True)

    fig, axes = plt.subplots(2, 2, figsize=(11, 7), sharex=True)
    (ax_tf, ax_ts), (ax_bf, ax_bs) = axes

    ax_tf.plot(a_param, a_fee, ",", color="tab:blue", alpha=0.5)
    ax_tf.set_ylabel("base fee")
    ax_tf.set_title("attractor samples: base fee")

    ax_ts.plot(a_param, a_rel, ",", color="tab:blue", alpha=0.5)
    ax_ts.set_ylim(0.0, 1.0)
    ax_ts.axhline(0.5, color="tab:red", lw=0.8, ls="--", label="target")
    ax_ts.set_ylabel("relative block size")
    ax_ts.set_title("attractor samples: block size")
    ax_ts.legend(loc="upper left", fontsize=8)

    ax_bf.plot(m_param, m_fee, ".-", color="tab:blue", ms=4)
    ax_bf.set_ylabel("average base fee")
    ax_bf.set_xlabel("parameter value")
    ax_bf.set_title("long-run average base fee")

    ax_bs.plot(m_param, m_rel, ".", color="tab:blue", ms=5, label="average")
    theory_pts = [(p, t) for p, t in zip(m_param, m_theory) if t is not None]
    if theory_pts:
        ax_bs.plot(
            *zip(*theory_pts), color="tab:red", lw=1.2, label="upper bound"
        )
    ax_bs.axhline(0.5, color="tab:red", lw=0.8, ls="--")
    ax_bs.set_ylim(0.0, 1.0)
    ax_bs.set_ylabel("relative block size")
    ax_bs.set_xlabel("parameter value")
    ax_bs.set_title("long-run average block size")
    ax_bs.legend(loc="upper left", fontsize=8)

    if args.b_star is not None:
        for ax in (ax_tf, ax_bf):
            ax.axhline(args.b_star, color="tab:red", lw=0.8, ls="--")

    fig.tight_layout()
    save(fig, args.out)


def main(argv=None):
    return run_main(render, argv)


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
