"""Average block sizes against the closed-form upper bound.

A scatter of avg_block_size_rel per grid value with the theory_upper_rel
curve overlaid; tight markets hug the curve from below.
"""

import argparse

import matplotlib.pyplot as plt

from .common import column, read_rows, run_main, save

AVERAGE_COLUMNS = [
    "param_value",
    "avg_base_fee",
    "avg_block_size_rel",
    "theory_upper_rel",
]


def render(argv=None):
    ap = argparse.ArgumentParser(
        prog="plot-bound-tightness",
        description="Render averages.csv against the bound curve.",
    )
    ap.add_argument("--averages", required=True, help="averages.csv path")
    ap.add_argument("--out", required=True, help="output image (svg/png)")
    args = ap.parse_args(argv)

    rows = read_rows(args.averages, AVERAGE_COLUMNS)
    param = column(rows, "param_value")
    rel = column(rows, "avg_block_size_rel")
    theory = column(rows, "theory_upper_rel", empty_as_none=True)

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(param, rel, "o", color="tab:blue", ms=4, label="average block size")
    theory_pts = [(p, t) for p, t in zip(param, theory) if t is not None]
    if theory_pts:
        ax.plot(*zip(*theory_pts), color="tab:red", lw=1.4, label="upper bound")
    ax.axhline(0.5, color="gray", lw=0.8, ls="--", label="target")
    ax.set_xlabel("parameter value")
    ax.set_ylabel("relative block size")
    ax.set_title("bound tightness")
    ax.legend(loc="upper left", fontsize=9)
    fig.tight_layout()
    save(fig, args.out)


def main(argv=None):
    return run_main(render, argv)


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
