"""Historical batch averages with the theoretical band and the report's
summary numbers embedded verbatim.

X axis: first block per batch; Y axis: target-relative size (twice the
limit-relative batch average, so 1.0 is exactly on target).  The band and
the pre/post means come straight from report.json; every number shown is a
string-identical copy of a value in the inputs.
"""

import argparse
import json

import matplotlib.pyplot as plt

from .common import InputError, column, read_rows, run_main, save

BATCH_COLUMNS = ["batch_index", "first_block", "avg_relative_size", "count"]


def _load_report(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from None
    required = {"mean_relative", "overshoot_pct", "band", "in_band"}
    missing = sorted(required - set(doc))
    if missing:
        raise InputError(f"{path}: missing report fields: {', '.join(missing)}")
    return doc


def render(argv=None):
    ap = argparse.ArgumentParser(
        prog="plot-batches",
        description="Render batches.csv with the report.json band overlay.",
    )
    ap.add_argument("--batches", required=True, help="batches.csv path")
    ap.add_argument("--report", required=True, help="report.json path")
    ap.add_argument("--out", required=True, help="output image (svg/png)")
    args = ap.parse_args(argv)

    rows = read_rows(args.batches, BATCH_COLUMNS)
    report = _load_report(args.report)

    first = column(rows, "first_block")
    rel_target = [2.0 * v for v in column(rows, "avg_relative_size")]
    band_lo, band_hi = report["band"]

    fig, ax = plt.subplots(figsize=(9, 5))
    ax.axhspan(band_lo, band_hi, color="tab:green", alpha=0.15,
               label=f"band [{band_lo}, {band_hi}]")
    ax.plot(first, rel_target, "-", color="tab:blue", lw=1.0,
            label="batch average")
    ax.axhline(1.0, color="gray", lw=0.8, ls="--")

    # pre/post means drawn exactly as reported (target-relative)
    for key, color in (("pre", "tab:red"), ("post", "tab:green")):
        split = report.get(key)
        if split:
            ax.axhline(
                2.0 * split["mean_relative"],
                color=color,
                lw=1.0,
                ls=":",
                label=f"{key} mean_relative={split['mean_relative']}",
            )

    summary = (
        f"mean_relative={report['mean_relative']}\n"
        f"overshoot_pct={report['overshoot_pct']}\n"
        f"in_band={report['in_band']}"
    )
    ax.text(
        0.985,
        0.03,
        summary,
        transform=ax.transAxes,
        ha="right",
        va="bottom",
        fontsize=8,
        family="monospace",
        bbox=dict(boxstyle="round", fc="white", ec="gray", alpha=0.9),
    )

    ax.set_xlabel("first block of batch")
    ax.set_ylabel("target-relative block size")
    ax.set_title("batch averages vs. theoretical band")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    save(fig, args.out)


def main(argv=None):
    return run_main(render, argv)


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
