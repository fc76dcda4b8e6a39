"""Bifurcation-diagram sweeps: run a grid of configurations that vary the
adjustment quotient or the valuation width, collecting attractor samples
(post-burn-in fee/size pairs) and long-horizon averages with the
closed-form upper bound attached.

Grid points are independent work items; with ``workers > 1`` they are
evaluated in a process pool, and results are assembled in grid order either
way, so the output is a pure function of the sweep specification.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from . import analysis, engine
from .core import Rule
from .engine import SimConfig
from .errors import DomainError

ENV_THREADS = "FEEMARKET_THREADS"


class SweepParameter(str, Enum):
    ADJUSTMENT_QUOTIENT = "adjustment_quotient"
    VALUATION_WIDTH = "valuation_width"


@dataclass(frozen=True)
class SweepSpec:
    """Grid sweep over one bifurcation parameter.

    Adjustment-quotient grids are restricted to (0, 0.5]: larger step sizes
    are of no practical interest and smaller ones are inadmissible.
    """

    parameter: SweepParameter
    grid: tuple[float, ...]
    base_config: SimConfig
    emit_attractors: bool = True
    emit_averages: bool = True
    long_n: int = engine.DEFAULT_LONG_N

    def __post_init__(self):
        object.__setattr__(self, "parameter", SweepParameter(self.parameter))
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        if not self.grid:
            raise DomainError("sweep grid must be nonempty")
        if self.parameter is SweepParameter.ADJUSTMENT_QUOTIENT:
            if any(not (0.0 < v <= 0.5) for v in self.grid):
                raise DomainError(
                    "adjustment-quotient grid values must lie in (0, 0.5]"
                )
        else:
            if any(v <= 0.0 for v in self.grid):
                raise DomainError("valuation-width grid values must be positive")


def default_d_grid() -> tuple[float, ...]:
    """d in {0.005, 0.010, ..., 0.500}."""
    return tuple(round(0.005 * i, 10) for i in range(1, 101))


def default_w_grid() -> tuple[float, ...]:
    """w in {0.2, 0.4, ..., 20.0}."""
    return tuple(round(0.2 * i, 10) for i in range(1, 101))


@dataclass(frozen=True, eq=False)
class GridPoint:
    """Results at one grid value.  ``theory_upper`` is the closed-form
    upper bound on the average block size at the effective adjustment
    quotient, or ``nan`` for rules without one."""

    param_value: float
    attractor_fees: np.ndarray
    attractor_sizes: np.ndarray
    avg_base_fee: float
    avg_block_size: float
    theory_upper: float


@dataclass(frozen=True, eq=False)
class SweepDataset:
    spec: SweepSpec
    points: tuple[GridPoint, ...]

    @property
    def block_limit(self) -> float:
        return self.spec.base_config.market.block_limit


def _config_at(spec: SweepSpec, value: float) -> SimConfig:
    base = spec.base_config
    if spec.parameter is SweepParameter.ADJUSTMENT_QUOTIENT:
        return replace(base, mechanism=replace(base.mechanism, d=value))
    market = base.market
    return replace(
        base,
        market=replace(market, valuation=replace(market.valuation, w=value)),
    )


def _effective_d(config: SimConfig) -> Optional[float]:
    if config.mechanism.rule in (Rule.EIP1559, Rule.EXP1559, Rule.EGP_CURE):
        return config.mechanism.d
    return None


def _eval_point(args) -> GridPoint:
    spec, index, value = args
    config = _config_at(spec, value)
    if spec.emit_attractors:
        traj = engine.run(config, stream_id=index)
        fees = traj.base_fees
        sizes = traj.block_sizes
    else:
        fees = np.empty(0)
        sizes = np.empty(0)
    if spec.emit_averages:
        avgs = engine.run_average(config, long_n=spec.long_n, stream_id=index)
        avg_fee, avg_size = avgs
    else:
        avg_fee = math.nan
        avg_size = math.nan
    d_eff = _effective_d(config)
    theory = (
        analysis.theorem1_upper_bound(d_eff, config.market.target).upper_bound
        if d_eff is not None
        else math.nan
    )
    return GridPoint(
        param_value=value,
        attractor_fees=fees,
        attractor_sizes=sizes,
        avg_base_fee=avg_fee,
        avg_block_size=avg_size,
        theory_upper=theory,
    )


def default_workers() -> int:
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"{ENV_THREADS} must be an integer, got {env!r}")
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, workers: Optional[int] = None) -> SweepDataset:
    """Evaluate every grid point; results are assembled in grid order
    regardless of the number of workers."""
    if workers is None:
        workers = default_workers()
    jobs = [(spec, i, v) for i, v in enumerate(spec.grid)]
    if workers <= 1 or len(jobs) == 1:
        points = [_eval_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            points = list(pool.map(_eval_point, jobs))
    return SweepDataset(spec=spec, points=tuple(points))


# --------------------------------------------------------------------------
# CSV emission
# --------------------------------------------------------------------------


def _fmt(x: float) -> str:
    """Locale-independent, 12 significant digits."""
    return format(float(x), ".12g")


def write_attractors_csv(dataset: SweepDataset, path) -> None:
    """param_value,sample_index,base_fee,block_size_rel rows, one per
    post-burn-in sample; sizes normalized to [0,1] by the block limit."""
    kT = dataset.block_limit
    with open(path, "w", newline="") as fh:
        fh.write("param_value,sample_index,base_fee,block_size_rel\n")
        for pt in dataset.points:
            pv = _fmt(pt.param_value)
            for i, (b, g) in enumerate(zip(pt.attractor_fees, pt.attractor_sizes)):
                fh.write(f"{pv},{i},{_fmt(b)},{_fmt(g / kT)}\n")


def write_averages_csv(dataset: SweepDataset, path) -> None:
    """param_value,avg_base_fee,avg_block_size_rel,theory_upper_rel rows;
    the theory column is empty for rules without an adjustment quotient."""
    kT = dataset.block_limit
    with open(path, "w", newline="") as fh:
        fh.write("param_value,avg_base_fee,avg_block_size_rel,theory_upper_rel\n")
        for pt in dataset.points:
            theory = "" if math.isnan(pt.theory_upper) else _fmt(pt.theory_upper / kT)
            fh.write(
                f"{_fmt(pt.param_value)},{_fmt(pt.avg_base_fee)},"
                f"{_fmt(pt.avg_block_size / kT)},{theory}\n"
            )
