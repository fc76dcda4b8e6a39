"""Closed-form bounds on long-run average block sizes, the logarithm chord
coefficients behind them, time averages, convergence-gap predictions and the
reserve-rule steady state.

The central closed form: for the linear update rule with adjustment
quotient ``d``, the long-run average block size lies in

    ``[T,  (1 - ln(1+d)/ln(1-d))**-1 * 2T]``.

The upper bound follows from sandwiching ``ln(1 + d*y)`` between its chord
over ``[-d, d]`` and the line ``y``, then telescoping the log-fee
increments.  For the exponential rule the same telescoping is an exact
identity, so the average converges to the target at rate O(1/N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MechanismSpec, Rule, Trajectory
from .errors import DomainError, EmptyWindow, UnsupportedRule


@dataclass(frozen=True)
class BoundReport:
    """Long-run average block-size band for the linear rule.

    ``factor`` is the upper bound expressed relative to the block limit
    ``2T`` (so 0.5 means exactly on target, 1.0 a permanently full block).
    """

    d: float
    lower_bound: float
    upper_bound: float
    factor: float

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "factor": self.factor,
        }


def theorem1_upper_bound(d: float, T: float = 1.0) -> BoundReport:
    """Band [T, (1 - ln(1+d)/ln(1-d))**-1 * 2T] for the linear rule."""
    if not (0.0 < d < 1.0):
        raise DomainError(f"d must lie in (0,1), got {d}")
    if not (T > 0):
        raise DomainError(f"T must be positive, got {T}")
    factor = 1.0 / (1.0 - math.log(1.0 + d) / math.log(1.0 - d))
    return BoundReport(
        d=d, lower_bound=T, upper_bound=factor * 2.0 * T, factor=factor
    )


def lemma2_coeffs(d: float) -> tuple[float, float]:
    """Chord of ln(1+x) over [-d, d]: slope alpha and intercept beta.

    By concavity ``ln(1+x) >= alpha*x + beta`` for all ``|x| <= d``, with
    equality at the endpoints.
    """
    if not (0.0 < d < 1.0):
        raise DomainError(f"d must lie in (0,1), got {d}")
    alpha = (math.log(1.0 + d) - math.log(1.0 - d)) / (2.0 * d)
    beta = (math.log(1.0 + d) + math.log(1.0 - d)) / 2.0
    return alpha, beta


def time_average(traj: Trajectory, skip: int = 0) -> float:
    """Mean block size over the records after the first ``skip``."""
    if skip < 0:
        raise DomainError(f"skip must be >= 0, got {skip}")
    if len(traj) <= skip:
        raise EmptyWindow(
            f"trajectory has {len(traj)} records, skip={skip} leaves none"
        )
    return float(np.mean(traj.block_sizes[skip:]))


@dataclass(frozen=True, eq=False)
class GapSeries:
    """Measured and predicted deviation of the running average from target.

    ``measured[i] = G_{n[i]} - T``.  For the exponential rule ``lower`` and
    ``upper`` coincide: the telescoped identity
    ``G_N - T = T*(ln b_{N+1} - ln b_1) / (N * ln(1+d))``, where ``b_{N+1}``
    is the fee after the N-th update.  For the linear rule they bracket the
    gap via the logarithm chord.
    """

    rule: Rule
    n: np.ndarray
    measured: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


def convergence_gap(traj: Trajectory, mechanism: MechanismSpec) -> GapSeries:
    """Per-prefix gap G_N - T with its telescoped prediction (exponential
    rule) or bracket (linear rule)."""
    rule = mechanism.rule
    if rule not in (Rule.EIP1559, Rule.EXP1559):
        raise UnsupportedRule(
            f"convergence gaps are defined for the linear and exponential "
            f"rules, not {rule.value}"
        )
    if len(traj) == 0:
        raise EmptyWindow("empty trajectory")
    T = traj.market.target
    d = mechanism.d
    n = np.arange(1, len(traj) + 1, dtype=np.int64)
    measured = np.cumsum(traj.block_sizes - T) / n

    # fee after each update: the next record's fee, then the final fee
    b_after = np.concatenate([traj.base_fees[1:], [traj.final_fee]])
    delta_ln = np.log(b_after) - math.log(traj.base_fees[0])

    if rule is Rule.EXP1559:
        pred = T * delta_ln / (n * math.log(1.0 + d))
        return GapSeries(rule=rule, n=n, measured=measured, lower=pred, upper=pred)

    alpha, beta = lemma2_coeffs(d)
    lower = T * delta_ln / (n * d)
    upper = T * delta_ln / (n * alpha * d) + T * (-beta) / (alpha * d)
    return GapSeries(rule=rule, n=n, measured=measured, lower=lower, upper=upper)


def amm_sufficient_condition(market, d: float) -> bool:
    """Whether ``lam * Fbar((d/T) * e**d) > 1``: enough demand above the
    reserve rule's low-excess price range to keep blocks above target there,
    which forces convergence of the average to the target."""
    from . import demand

    if not (d > 0):
        raise DomainError(f"d must be positive, got {d}")
    threshold = d / market.target * math.exp(d)
    return market.lam * demand.survival(market.valuation, threshold) > 1.0


def amm_steady_excess_gas(q: float, b_star: float) -> float:
    """Excess gas at which the reserve rule prices at ``b_star``:
    ``q**-1 * ln(b_star / q)``."""
    if not (q > 0):
        raise DomainError(f"q must be positive, got {q}")
    if not (b_star > q):
        raise DomainError(
            f"b_star must exceed q for a positive steady state, got "
            f"b_star={b_star}, q={q}"
        )
    return math.log(b_star / q) / q
