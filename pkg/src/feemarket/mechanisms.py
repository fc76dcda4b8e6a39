"""The concrete base-fee update rules, each as a pure one-step function.

All rules clamp the next fee to ``fee_floor`` after the update, so the fee
process stays strictly positive.  Quantities: ``b`` current base fee, ``g``
realized block size, ``T`` target block size, ``kT`` block limit.

* linear rule:       ``b' = b * (1 + d*(g-T)/T)``
* exponential rule:  ``b' = b * (1+d)**((g-T)/T)``
* reserve (AMM) rule: excess gas ``x' = max(0, x + g - T)``,
  ``b' = q * exp(q*x')``
* welfare rule:      ``b' = (alpha/kT) * sum(v_i) + (1-alpha)*b``
* truncated welfare: as above with each ``v_i`` capped at ``(1+delta)*b``,
  and a flat ``alpha*(1+delta)*b + (1-alpha)*b`` when the block is full
* effective-gas-price correction: the linear rule plus
  ``intensity * max(0, m - (1+gamma)*b)`` where ``m`` is the block's
  minimum effective gas price
"""

from __future__ import annotations

import math
from typing import Sequence

from .core import DEFAULT_FEE_FLOOR, FeeState, MarketParams
from .errors import DomainError

#: relative tolerance of the reserve rule's closed-form self-check
_AMM_CONSISTENCY_RTOL = 1e-9


def step_eip1559(
    b: float, g: float, d: float, T: float, fee_floor: float = DEFAULT_FEE_FLOOR
) -> float:
    """Linear update: the fee moves by a fraction ``d`` of the normalized
    block-size deviation ``(g-T)/T``."""
    b_next = b * (1.0 + d * (g - T) / T)
    return b_next if b_next > fee_floor else fee_floor


def step_exp1559(
    b: float, g: float, d: float, T: float, fee_floor: float = DEFAULT_FEE_FLOOR
) -> float:
    """Exponential update: multiplies the fee by ``(1+d)**((g-T)/T)``.

    The linear rule is this rule's first-order Taylor approximation; the
    exponential update is always weakly less aggressive in the same
    direction.
    """
    b_next = b * (1.0 + d) ** ((g - T) / T)
    return b_next if b_next > fee_floor else fee_floor


def step_amm(
    state: FeeState,
    g: float,
    q: float,
    T: float,
    fee_floor: float = DEFAULT_FEE_FLOOR,
) -> FeeState:
    """Reserve-style update driven by accumulated excess gas.

    The primary form prices off the running excess ``x``; whenever the
    incoming state already satisfies ``b == q*exp(q*x)`` the equivalent
    closed form ``b' = b * exp(q*max(-x, g-T))`` must agree, and both are
    computed and cross-checked to 1e-9 relative.
    """
    if not (q > 0):
        raise DomainError(f"q must be positive, got {q}")
    x = state.excess_gas
    x_next = x + g - T
    if x_next < 0.0:
        x_next = 0.0
    b_next = q * math.exp(q * x_next)

    b = state.base_fee
    if abs(b - q * math.exp(q * x)) <= _AMM_CONSISTENCY_RTOL * b:
        closed = b * math.exp(q * max(-x, g - T))
        if abs(closed - b_next) > _AMM_CONSISTENCY_RTOL * max(b_next, closed):
            raise ArithmeticError(
                f"reserve-rule forms disagree: {b_next} vs {closed}"
            )

    if b_next < fee_floor:
        b_next = fee_floor
    return FeeState(base_fee=b_next, height=state.height + 1, excess_gas=x_next)


def step_wel(
    b: float,
    included_valuations: Sequence[float],
    alpha_wel: float,
    kT: float,
    fee_floor: float = DEFAULT_FEE_FLOOR,
) -> float:
    """Welfare-based update: mixes the per-capacity sum of included
    valuations into the fee with weight ``alpha_wel``."""
    total = math.fsum(included_valuations)
    b_next = alpha_wel / kT * total + (1.0 - alpha_wel) * b
    return b_next if b_next > fee_floor else fee_floor


def step_twel(
    b: float,
    included_valuations: Sequence[float],
    g: float,
    alpha_wel: float,
    delta: float,
    kT: float,
    fee_floor: float = DEFAULT_FEE_FLOOR,
) -> float:
    """Truncated welfare-based update.

    A full block short-circuits to a flat ``(1+delta)``-premium move;
    otherwise each included valuation is capped at ``(1+delta)*b`` before
    the welfare mixing.
    """
    if g >= kT:
        b_next = alpha_wel * (1.0 + delta) * b + (1.0 - alpha_wel) * b
    else:
        cap = (1.0 + delta) * b
        total = math.fsum(v if v < cap else cap for v in included_valuations)
        b_next = alpha_wel / kT * total + (1.0 - alpha_wel) * b
    return b_next if b_next > fee_floor else fee_floor


def step_egpcure(
    b: float,
    g: float,
    m_n: float,
    d: float,
    intensity: float,
    gamma: float,
    T: float,
    fee_floor: float = DEFAULT_FEE_FLOOR,
) -> float:
    """Linear update plus a correction that fires when the block's minimum
    effective gas price ``m_n`` exceeds ``(1+gamma)*b``, i.e. under
    first-price-auction conditions.  With the correction inert this
    degenerates to the linear rule."""
    correction = m_n - (1.0 + gamma) * b
    if correction < 0.0:
        correction = 0.0
    b_next = b * (1.0 + d * (g - T) / T) + intensity * correction
    return b_next if b_next > fee_floor else fee_floor


# --------------------------------------------------------------------------
# Mean-field forms of the valuation-conditioned rules
# --------------------------------------------------------------------------
#
# The welfare rules are defined on realized valuations; under mean-field
# demand the sum over included transactions is approximated by
# g * E[v | v >= b] (capped at (1+delta)*b for the truncated rule), with the
# conditional expectations evaluated by adaptive Simpson quadrature.


def step_wel_mean_field(
    b: float,
    g: float,
    market: MarketParams,
    alpha_wel: float,
    fee_floor: float = DEFAULT_FEE_FLOOR,
) -> float:
    from . import demand

    kT = market.block_limit
    total = g * demand.truncated_mean(market.valuation, b) if g > 0.0 else 0.0
    b_next = alpha_wel / kT * total + (1.0 - alpha_wel) * b
    return b_next if b_next > fee_floor else fee_floor


def step_twel_mean_field(
    b: float,
    g: float,
    market: MarketParams,
    alpha_wel: float,
    delta: float,
    fee_floor: float = DEFAULT_FEE_FLOOR,
) -> float:
    from . import demand

    kT = market.block_limit
    if g >= kT:
        b_next = alpha_wel * (1.0 + delta) * b + (1.0 - alpha_wel) * b
    else:
        cap = (1.0 + delta) * b
        total = (
            g * demand.truncated_capped_mean(market.valuation, b, cap)
            if g > 0.0
            else 0.0
        )
        b_next = alpha_wel / kT * total + (1.0 - alpha_wel) * b
    return b_next if b_next > fee_floor else fee_floor
