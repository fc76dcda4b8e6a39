"""Trajectory runner: composes demand and mechanism stepping with burn-in,
recording and per-trajectory RNG streams.

Runs are pure functions of their configuration.  Stochastic runs draw from
a counter-based Philox generator keyed by ``(seed, stream_id)`` through
``numpy.random.SeedSequence(seed, spawn_key=(stream_id,))``, so concurrent
trajectories get independent, reproducible streams and the draw sequence
does not depend on how many steps are recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import demand as demand_mod
from . import mechanisms
from .core import MarketParams, MechanismSpec, Rule, Trajectory
from .demand import DemandMode, MEAN_FIELD
from .errors import DomainError

DEFAULT_N_SKIP = 200
DEFAULT_N_ITER = 100
DEFAULT_LONG_N = 100_000


@dataclass(frozen=True)
class SimConfig:
    """Everything a run needs: market, mechanism, demand mode, initial fee,
    burn-in length, recorded length and RNG seed."""

    market: MarketParams
    mechanism: MechanismSpec
    demand: DemandMode = MEAN_FIELD
    b0: float = 100.0
    n_skip: int = DEFAULT_N_SKIP
    n_iter: int = DEFAULT_N_ITER
    seed: int = 0

    def __post_init__(self):
        if not (self.b0 > 0):
            raise DomainError(f"b0 must be positive, got {self.b0}")
        if self.n_iter < 1:
            raise DomainError(f"n_iter must be >= 1, got {self.n_iter}")
        if self.n_skip < 0:
            raise DomainError(f"n_skip must be >= 0, got {self.n_skip}")


def make_rng(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Independent counter-based stream for trajectory ``stream_id``."""
    seq = np.random.SeedSequence(seed, spawn_key=(stream_id,))
    return np.random.Generator(np.random.Philox(seq))


class RunAverages(NamedTuple):
    avg_base_fee: float
    avg_block_size: float


def _block_at(b, market, mode, rng, surv, lam_T, kT):
    """(block_size, included_valuations, min_effective_price) at fee b."""
    if rng is None:
        g = lam_T * surv(b)
        if g > kT:
            g = kT
        return g, None, b
    draw = demand_mod.stochastic_block_size(b, market, mode, rng)
    return draw.block_size, draw.included_valuations, draw.min_effective_price


def _advance(b, x, g, vals, m_n, rule, spec, market, T, kT, floor):
    """One mechanism update; returns (next_fee, next_excess)."""
    if rule is Rule.EIP1559:
        return mechanisms.step_eip1559(b, g, spec.d, T, floor), x
    if rule is Rule.EXP1559:
        return mechanisms.step_exp1559(b, g, spec.d, T, floor), x
    if rule is Rule.AMM:
        x_next = x + g - T
        if x_next < 0.0:
            x_next = 0.0
        b_next = spec.q * math.exp(spec.q * x_next)
        return (b_next if b_next > floor else floor), x_next
    if rule is Rule.WEL:
        if vals is None:
            return (
                mechanisms.step_wel_mean_field(b, g, market, spec.alpha_wel, floor),
                x,
            )
        return mechanisms.step_wel(b, vals, spec.alpha_wel, kT, floor), x
    if rule is Rule.TWEL:
        if vals is None:
            return (
                mechanisms.step_twel_mean_field(
                    b, g, market, spec.alpha_wel, spec.delta, floor
                ),
                x,
            )
        return (
            mechanisms.step_twel(b, vals, g, spec.alpha_wel, spec.delta, kT, floor),
            x,
        )
    # Rule.EGP_CURE
    return (
        mechanisms.step_egpcure(
            b, g, m_n, spec.d, spec.intensity, spec.gamma, T, floor
        ),
        x,
    )


def run(config: SimConfig, record_all: bool = False, stream_id: int = 0) -> Trajectory:
    """Execute ``n_skip + n_iter`` steps from ``b0`` and record the last
    ``n_iter`` of them (all of them with ``record_all``).

    Each step realizes the block at the current fee, records
    ``(height, fee, block_size)`` if inside the recording window, then
    applies the mechanism update.  The trajectory's ``final_fee`` is the fee
    after the last update.
    """
    market = config.market
    spec = config.mechanism
    rule = spec.rule
    T = market.target
    kT = market.block_limit
    lam_T = market.lam * T
    floor = spec.fee_floor
    mode = config.demand
    rng = None if mode.is_mean_field else make_rng(config.seed, stream_id)
    surv = demand_mod.survival_fn(market.valuation)

    total = config.n_skip + config.n_iter
    n_rec = total if record_all else config.n_iter
    first_rec = 0 if record_all else config.n_skip
    heights = np.empty(n_rec, dtype=np.int64)
    fees = np.empty(n_rec)
    sizes = np.empty(n_rec)

    b = config.b0 if config.b0 > floor else floor
    x = 0.0
    idx = 0
    for n in range(total):
        g, vals, m_n = _block_at(b, market, mode, rng, surv, lam_T, kT)
        if n >= first_rec:
            heights[idx] = n
            fees[idx] = b
            sizes[idx] = g
            idx += 1
        b, x = _advance(b, x, g, vals, m_n, rule, spec, market, T, kT, floor)

    return Trajectory(
        heights=heights,
        base_fees=fees,
        block_sizes=sizes,
        market=market,
        mechanism=spec,
        seed=config.seed,
        final_fee=b,
    )


def run_average(
    config: SimConfig, long_n: int = DEFAULT_LONG_N, stream_id: int = 0
) -> RunAverages:
    """Average fee and block size over a long horizon, after burn-in.

    Runs ``long_n`` total steps from ``b0`` and averages the steps beyond
    ``config.n_skip``, without materializing the trajectory.
    """
    if long_n < config.n_skip + 1:
        raise DomainError(
            f"long_n must exceed n_skip, got long_n={long_n}, "
            f"n_skip={config.n_skip}"
        )
    market = config.market
    spec = config.mechanism
    rule = spec.rule
    T = market.target
    kT = market.block_limit
    lam_T = market.lam * T
    floor = spec.fee_floor
    mode = config.demand
    rng = None if mode.is_mean_field else make_rng(config.seed, stream_id)
    surv = demand_mod.survival_fn(market.valuation)

    b = config.b0 if config.b0 > floor else floor
    x = 0.0
    fee_sum = 0.0
    size_sum = 0.0
    count = 0
    skip = config.n_skip
    for n in range(long_n):
        g, vals, m_n = _block_at(b, market, mode, rng, surv, lam_T, kT)
        if n >= skip:
            fee_sum += b
            size_sum += g
            count += 1
        b, x = _advance(b, x, g, vals, m_n, rule, spec, market, T, kT, floor)
    return RunAverages(fee_sum / count, size_sum / count)
