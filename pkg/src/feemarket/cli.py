"""Command-line front end.

Subcommands::

    feemarket simulate CONFIG --out traj.csv [overrides]
    feemarket sweep CONFIG --out-dir DIR [--threads N]
    feemarket bound --d 0.125 [--T 1.0]
    feemarket analyze DATA.csv --batch 5000 --d 0.125 [--split H] [--strict]
    feemarket check-proper CONFIG [--probes ...]

Machine summaries go to stdout as JSON; series data goes to CSV files.
Exit codes: 0 ok, 2 configuration error, 3 runtime error, 4 bound violation
(``analyze --strict`` only).  Flags override config-file values; defaults
apply only to absent keys.  ``--threads`` caps sweep workers, with the
``FEEMARKET_THREADS`` environment variable as fallback and all cores as the
default.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, chaindata, engine, sweep as sweep_mod
from .core import (
    DistKind,
    MarketParams,
    MechanismSpec,
    Rule,
    ValuationDist,
    check_properness,
)
from .demand import ArrivalKind, DemandMode, Mode, market_clearing_price
from .engine import SimConfig
from .errors import ConfigError, FeeMarketError


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


# --------------------------------------------------------------------------
# Config file handling
# --------------------------------------------------------------------------

_MARKET_DEFAULTS = {"target": 1.0, "k": 2, "lambda": 4.0}
_VALUATION_DEFAULTS = {"kind": "normal", "m": 210.0, "w": 10.0, "a": 1.0}
_MECHANISM_DEFAULTS = {"rule": "eip1559"}
_TOP_DEFAULTS = {"b0": 100.0, "n_skip": 200, "n_iter": 100, "seed": 0}

_PARAM_ALIASES = {
    "d": sweep_mod.SweepParameter.ADJUSTMENT_QUOTIENT,
    "adjustment_quotient": sweep_mod.SweepParameter.ADJUSTMENT_QUOTIENT,
    "w": sweep_mod.SweepParameter.VALUATION_WIDTH,
    "valuation_width": sweep_mod.SweepParameter.VALUATION_WIDTH,
}


def _check_keys(doc: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return doc


def build_sim_config(doc: dict, overrides: Optional[dict] = None) -> SimConfig:
    """Construct a run configuration from a JSON document, rejecting
    unknown keys; ``overrides`` (from flags) take precedence."""
    _check_keys(
        doc,
        {"market", "mechanism", "demand", "b0", "n_skip", "n_iter", "seed", "sweep"},
        "config",
    )
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    mdoc = dict(_MARKET_DEFAULTS) | dict(doc.get("market", {}))
    _check_keys(mdoc, {"target", "k", "lambda", "valuation"}, "market")
    vdoc = dict(_VALUATION_DEFAULTS) | dict(mdoc.pop("valuation", {}))
    _check_keys(vdoc, {"kind", "m", "w", "a"}, "market.valuation")

    hdoc = dict(_MECHANISM_DEFAULTS) | dict(doc.get("mechanism", {}))
    _check_keys(
        hdoc,
        {"rule", "d", "q", "alpha", "delta", "gamma", "intensity", "fee_floor"},
        "mechanism",
    )
    if "d" in overrides:
        hdoc["d"] = overrides["d"]

    ddoc = dict(doc.get("demand", {}))
    _check_keys(ddoc, {"mode", "arrivals"}, "demand")

    try:
        valuation = ValuationDist(
            kind=DistKind(vdoc["kind"]),
            m=float(vdoc["m"]),
            w=float(vdoc["w"]),
            a=float(vdoc["a"]),
        )
        market = MarketParams(
            target=float(mdoc["target"]),
            k=int(mdoc["k"]),
            lam=float(mdoc["lambda"]),
            valuation=valuation,
        )
        mech_kwargs = {"rule": Rule(hdoc["rule"])}
        for src, dst in (
            ("d", "d"),
            ("q", "q"),
            ("alpha", "alpha_wel"),
            ("delta", "delta"),
            ("gamma", "gamma"),
            ("intensity", "intensity"),
            ("fee_floor", "fee_floor"),
        ):
            if src in hdoc:
                mech_kwargs[dst] = float(hdoc[src])
        mechanism = MechanismSpec(**mech_kwargs)
        demand = DemandMode(
            Mode(ddoc.get("mode", "mean_field")),
            ArrivalKind(ddoc.get("arrivals", "poisson")),
        )
        return SimConfig(
            market=market,
            mechanism=mechanism,
            demand=demand,
            b0=float(overrides.get("b0", doc.get("b0", _TOP_DEFAULTS["b0"]))),
            n_skip=int(
                overrides.get("n_skip", doc.get("n_skip", _TOP_DEFAULTS["n_skip"]))
            ),
            n_iter=int(
                overrides.get("n_iter", doc.get("n_iter", _TOP_DEFAULTS["n_iter"]))
            ),
            seed=int(overrides.get("seed", doc.get("seed", _TOP_DEFAULTS["seed"]))),
        )
    except ConfigError:
        raise
    except (FeeMarketError, ValueError) as e:
        raise ConfigError(str(e)) from None


def build_sweep_spec(doc: dict, base: SimConfig) -> sweep_mod.SweepSpec:
    sdoc = doc.get("sweep")
    if not isinstance(sdoc, dict):
        raise ConfigError("sweep config requires a 'sweep' object")
    _check_keys(
        sdoc,
        {
            "parameter",
            "grid",
            "start",
            "stop",
            "count",
            "emit_attractors",
            "emit_averages",
            "long_n",
        },
        "sweep",
    )
    raw_param = sdoc.get("parameter", "d")
    param = _PARAM_ALIASES.get(raw_param)
    if param is None:
        raise ConfigError(
            f"sweep.parameter must be one of {sorted(_PARAM_ALIASES)}, "
            f"got {raw_param!r}"
        )
    if "grid" in sdoc:
        grid = tuple(float(v) for v in sdoc["grid"])
    elif {"start", "stop", "count"} <= set(sdoc):
        grid = tuple(
            np.linspace(float(sdoc["start"]), float(sdoc["stop"]), int(sdoc["count"]))
        )
    else:
        grid = (
            sweep_mod.default_d_grid()
            if param is sweep_mod.SweepParameter.ADJUSTMENT_QUOTIENT
            else sweep_mod.default_w_grid()
        )
    try:
        return sweep_mod.SweepSpec(
            parameter=param,
            grid=grid,
            base_config=base,
            emit_attractors=bool(sdoc.get("emit_attractors", True)),
            emit_averages=bool(sdoc.get("emit_averages", True)),
            long_n=int(sdoc.get("long_n", engine.DEFAULT_LONG_N)),
        )
    except FeeMarketError as e:
        raise ConfigError(str(e)) from None


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def _write_trajectory_csv(traj, path) -> None:
    kT = traj.market.block_limit
    rel = traj.block_sizes / kT
    running = np.cumsum(rel) / np.arange(1, len(traj) + 1)
    with open(path, "w", newline="") as fh:
        fh.write("n,base_fee,block_size,block_size_rel,running_avg_rel\n")
        for h, b, g, r, ra in zip(
            traj.heights, traj.base_fees, traj.block_sizes, rel, running
        ):
            fh.write(f"{h},{_fmt(b)},{_fmt(g)},{_fmt(r)},{_fmt(ra)}\n")


def cmd_simulate(args) -> int:
    doc = load_config(args.config)
    cfg = build_sim_config(
        doc,
        overrides={
            "seed": args.seed,
            "b0": args.b0,
            "d": args.d,
            "n_iter": args.n_iter,
            "n_skip": args.n_skip,
        },
    )
    traj = engine.run(cfg)
    _write_trajectory_csv(traj, args.out)

    avg = float(np.mean(traj.block_sizes))
    T = cfg.market.target
    summary = {
        "rule": cfg.mechanism.rule.value,
        "n_iter": cfg.n_iter,
        "avg_base_fee": float(np.mean(traj.base_fees)),
        "avg_block_size": avg,
        "avg_block_size_rel": avg / cfg.market.block_limit,
        "band": None,
        "in_band": None,
        "out": str(args.out),
    }
    if cfg.mechanism.rule in (Rule.EIP1559, Rule.EXP1559, Rule.EGP_CURE):
        report = analysis.theorem1_upper_bound(cfg.mechanism.d, T)
        summary["band"] = [report.lower_bound, report.upper_bound]
        summary["in_band"] = bool(
            report.lower_bound - 1e-9 <= avg <= report.upper_bound + 1e-9
        )
    print(json.dumps(summary))
    return 0


def cmd_sweep(args) -> int:
    doc = load_config(args.config)
    base = build_sim_config(doc, overrides={"seed": args.seed})
    spec = build_sweep_spec(doc, base)
    dataset = sweep_mod.run_sweep(spec, workers=args.threads)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if spec.emit_attractors:
        path = out_dir / "attractors.csv"
        sweep_mod.write_attractors_csv(dataset, path)
        written.append(str(path))
    if spec.emit_averages:
        path = out_dir / "averages.csv"
        sweep_mod.write_averages_csv(dataset, path)
        written.append(str(path))
    print(
        json.dumps(
            {
                "parameter": spec.parameter.value,
                "grid_points": len(spec.grid),
                "files": written,
            }
        )
    )
    return 0


def cmd_bound(args) -> int:
    if not (0.0 < args.d < 1.0):
        raise ConfigError(f"d must lie in (0,1), got {args.d}")
    if not (args.T > 0):
        raise ConfigError(f"T must be positive, got {args.T}")
    report = analysis.theorem1_upper_bound(args.d, args.T)
    print(json.dumps(report.to_json_dict()))
    return 0


def cmd_analyze(args) -> int:
    if not (0.0 < args.d < 1.0):
        raise ConfigError(f"d must lie in (0,1), got {args.d}")
    if args.batch < 1:
        raise ConfigError(f"--batch must be >= 1, got {args.batch}")
    schema = chaindata.ColumnMap(
        number=args.number_col,
        gas_used=args.gas_used_col,
        gas_limit=args.gas_limit_col,
    )
    records = chaindata.ingest_csv(args.data, schema)
    summaries = chaindata.batch_averages(records, args.batch)
    report = chaindata.bound_comparison(
        summaries,
        d=args.d,
        split_height=args.split,
        include_partial=args.include_partial,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    chaindata.write_batches_csv(summaries, out_dir / "batches.csv")
    report_path = out_dir / "report.json"
    with open(report_path, "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2)
        fh.write("\n")
    print(json.dumps(report.to_json_dict()))
    if args.strict and 2.0 * report.mean_relative > report.band[1] + chaindata.BAND_SLACK:
        print(
            f"bound violation: {2.0 * report.mean_relative:.6f} above "
            f"band edge {report.band[1]:.6f}",
            file=sys.stderr,
        )
        return 4
    return 0


def cmd_check_proper(args) -> int:
    doc = load_config(args.config)
    cfg = build_sim_config(doc, overrides={"d": args.d})
    if args.probes:
        try:
            probes = [float(tok) for tok in args.probes.split(",") if tok.strip()]
        except ValueError:
            raise ConfigError("--probes must be comma-separated numbers") from None
    else:
        b_star = market_clearing_price(cfg.market)
        probes = list(np.geomspace(max(b_star * 1e-3, 1e-6), 4.0 * b_star, 33))
    report = check_properness(cfg.mechanism, cfg.market, probes)
    print(json.dumps(report.to_json_dict()))
    return 0


# --------------------------------------------------------------------------
# Parser / entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="feemarket",
        description="Simulate and analyze base-fee update rules.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one trajectory, emit CSV + summary")
    sim.add_argument("config", help="JSON config file")
    sim.add_argument("--out", default="trajectory.csv", help="output CSV path")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--b0", type=float, default=None)
    sim.add_argument("--d", type=float, default=None)
    sim.add_argument("--n-iter", dest="n_iter", type=int, default=None)
    sim.add_argument("--n-skip", dest="n_skip", type=int, default=None)
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="bifurcation sweep, emit attractors/averages")
    sw.add_argument("config", help="JSON config file with a 'sweep' section")
    sw.add_argument("--out-dir", default="sweep_out")
    sw.add_argument("--seed", type=int, default=None)
    sw.add_argument("--threads", type=int, default=None, help="worker cap")
    sw.set_defaults(func=cmd_sweep)

    bd = sub.add_parser("bound", help="closed-form average block-size band")
    bd.add_argument("--d", type=float, required=True)
    bd.add_argument("--T", type=float, default=1.0)
    bd.set_defaults(func=cmd_bound)

    an = sub.add_parser("analyze", help="batch-average historical gas data")
    an.add_argument("data", help="CSV of number,gas_used,gas_limit rows")
    an.add_argument("--batch", type=int, default=5000)
    an.add_argument("--d", type=float, default=0.125)
    an.add_argument("--split", type=int, default=None, help="pre/post split height")
    an.add_argument("--out-dir", default="analyze_out")
    an.add_argument("--include-partial", action="store_true")
    an.add_argument("--strict", action="store_true", help="exit 4 when above band")
    an.add_argument("--number-col", default="number")
    an.add_argument("--gas-used-col", default="gas_used")
    an.add_argument("--gas-limit-col", default="gas_limit")
    an.set_defaults(func=cmd_analyze)

    cp = sub.add_parser("check-proper", help="probe a rule's properness conditions")
    cp.add_argument("config", help="JSON config file (market + mechanism)")
    cp.add_argument("--probes", default=None, help="comma-separated probe fees")
    cp.add_argument("--d", type=float, default=None)
    cp.set_defaults(func=cmd_check_proper)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except FeeMarketError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
