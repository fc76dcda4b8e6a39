"""Domain types shared by all modules, plus the one-step dispatcher and the
properness checker for base-fee update rules.

A fee market is described by three value objects:

* :class:`MarketParams` -- the demand side: target block size ``T``, block
  limit ``k*T``, arrival intensity ``lam`` (expected arrivals per block as a
  multiple of ``T``) and the valuation distribution.
* :class:`MechanismSpec` -- which update rule runs and its parameters.
* :class:`FeeState` -- the evolving state: base fee, block height and (for
  the reserve-style rule) the accumulated excess gas.

All quantities are 64-bit floats; integer/wei protocol semantics are out of
scope (see README).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InvalidBlockSize, MissingValuations

DEFAULT_FEE_FLOOR = 1e-9


class Rule(str, Enum):
    """Available base-fee update rules."""

    EIP1559 = "eip1559"
    EXP1559 = "exp1559"
    AMM = "amm"
    WEL = "wel"
    TWEL = "twel"
    EGP_CURE = "egpcure"


class DistKind(str, Enum):
    """Valuation distribution families."""

    UNIFORM = "uniform"
    NORMAL = "normal"
    SHIFTED_GAMMA = "shifted_gamma"
    SHIFTED_EXPONENTIAL = "shifted_exponential"


@dataclass(frozen=True)
class ValuationDist:
    """User valuation distribution, parameterized by location ``m`` and
    width ``w`` (plus shape ``a`` for the gamma family).

    * uniform: support ``[m - w/2, m + w/2]``, mean ``m``, variance ``w^2/12``
    * normal: mean ``m``, standard deviation ``w/4`` (variance ``w^2/16``)
    * shifted_gamma: shift ``m - a*w``, shape ``a``, scale ``w``, so the mean
      is ``m`` and the variance ``a*w^2``
    * shifted_exponential: alias for shifted_gamma with ``a = 1`` (support
      ``[m - w, inf)``, standard deviation ``w``)
    """

    kind: DistKind
    m: float
    w: float
    a: float = 1.0

    def __post_init__(self):
        kind = DistKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is DistKind.SHIFTED_EXPONENTIAL:
            object.__setattr__(self, "a", 1.0)
        if not (self.m > 0):
            raise DomainError(f"valuation location m must be positive, got {self.m}")
        if not (self.w > 0):
            raise DomainError(f"valuation width w must be positive, got {self.w}")
        if not (self.a > 0):
            raise DomainError(f"gamma shape a must be positive, got {self.a}")

    @property
    def shift(self) -> float:
        """Lower support endpoint of the gamma families."""
        return self.m - self.a * self.w

    @property
    def sigma(self) -> float:
        if self.kind is DistKind.UNIFORM:
            return self.w / math.sqrt(12.0)
        if self.kind is DistKind.NORMAL:
            return self.w / 4.0
        return math.sqrt(self.a) * self.w

    def support(self) -> tuple[float, float]:
        """(lower, upper) support endpoints; upper may be ``inf``."""
        if self.kind is DistKind.UNIFORM:
            return (self.m - self.w / 2.0, self.m + self.w / 2.0)
        if self.kind is DistKind.NORMAL:
            return (-math.inf, math.inf)
        return (self.shift, math.inf)


@dataclass(frozen=True)
class MarketParams:
    """Demand side of the fee market.

    ``target`` is the target block size T (gas units), the block limit is
    ``k * target``, and ``lam`` is the expected number of arrivals per block
    expressed as a multiple of T.  ``lam > 1`` is required so that a
    market-clearing price exists; only when ``lam > k`` can mean-field demand
    actually fill a block to the limit.
    """

    target: float
    k: int
    lam: float
    valuation: ValuationDist

    def __post_init__(self):
        if not (self.target > 0):
            raise DomainError(f"target must be positive, got {self.target}")
        if not (isinstance(self.k, int) and self.k >= 1):
            raise DomainError(f"k must be an integer >= 1, got {self.k!r}")
        if not (self.lam > 1):
            raise DomainError(f"lam must exceed 1, got {self.lam}")

    @property
    def block_limit(self) -> float:
        return self.k * self.target


@dataclass(frozen=True)
class MechanismSpec:
    """Update rule selection plus parameters.

    Only the parameters relevant to ``rule`` are consulted:

    ========  =========================================
    rule      parameters
    ========  =========================================
    eip1559   d (adjustment quotient), fee_floor
    exp1559   d, fee_floor
    amm       q (reserve quotient), fee_floor
    wel       alpha_wel (mixing weight), fee_floor
    twel      alpha_wel, delta (truncation premium), fee_floor
    egpcure   d, gamma (trigger threshold), intensity, fee_floor
    ========  =========================================
    """

    rule: Rule
    d: float = 0.125
    q: float = 0.1
    alpha_wel: float = 0.5
    delta: float = 0.1
    gamma: float = 0.1
    intensity: float = 1.0
    fee_floor: float = DEFAULT_FEE_FLOOR

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule(self.rule))
        if not (self.fee_floor > 0):
            raise DomainError(f"fee_floor must be positive, got {self.fee_floor}")
        rule = self.rule
        if rule in (Rule.EIP1559, Rule.EXP1559, Rule.EGP_CURE):
            if not (0.0 < self.d < 1.0):
                raise DomainError(f"d must lie in (0,1), got {self.d}")
        if rule is Rule.AMM and not (self.q > 0):
            raise DomainError(f"q must be positive, got {self.q}")
        if rule in (Rule.WEL, Rule.TWEL):
            if not (0.0 < self.alpha_wel <= 1.0):
                raise DomainError(
                    f"alpha_wel must lie in (0,1], got {self.alpha_wel}"
                )
        if rule is Rule.TWEL and not (self.delta > 0):
            raise DomainError(f"delta must be positive, got {self.delta}")
        if rule is Rule.EGP_CURE:
            if not (self.gamma > 0):
                raise DomainError(f"gamma must be positive, got {self.gamma}")
            if self.intensity < 0:
                raise DomainError(
                    f"intensity must be non-negative, got {self.intensity}"
                )


@dataclass(frozen=True)
class FeeState:
    """Mechanism state after ``height`` blocks: base fee and, for the
    reserve rule, the non-negative excess gas."""

    base_fee: float
    height: int = 0
    excess_gas: float = 0.0

    def __post_init__(self):
        if not (self.base_fee > 0):
            raise DomainError(f"base_fee must be positive, got {self.base_fee}")
        if self.height < 0:
            raise DomainError(f"height must be >= 0, got {self.height}")
        if self.excess_gas < 0:
            raise DomainError(f"excess_gas must be >= 0, got {self.excess_gas}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded run of a fee mechanism.

    ``heights[i]`` is the block index at which the fee was ``base_fees[i]``
    and the realized block size ``block_sizes[i]``.  ``final_fee`` is the fee
    *after* the last recorded update; the telescoping identities in
    :mod:`feemarket.analysis` need it.
    """

    heights: np.ndarray
    base_fees: np.ndarray
    block_sizes: np.ndarray
    market: MarketParams
    mechanism: MechanismSpec
    seed: int
    final_fee: float

    def __post_init__(self):
        n = len(self.heights)
        if len(self.base_fees) != n or len(self.block_sizes) != n:
            raise DomainError("trajectory arrays must have equal length")
        if n:
            steps = np.diff(self.heights)
            if steps.size and not np.all(steps == 1):
                raise DomainError("trajectory heights must increase by 1")
            kT = self.market.block_limit
            if np.any(self.block_sizes < 0) or np.any(self.block_sizes > kT):
                raise DomainError("block sizes must lie in [0, k*T]")

    def __len__(self) -> int:
        return len(self.heights)

    @property
    def records(self) -> list[tuple[int, float, float]]:
        """(height, base_fee, block_size) tuples, in block order."""
        return list(
            zip(
                (int(h) for h in self.heights),
                (float(b) for b in self.base_fees),
                (float(g) for g in self.block_sizes),
            )
        )

    def relative_block_sizes(self) -> np.ndarray:
        """Block sizes normalized by the block limit (0 empty, 1 full)."""
        return self.block_sizes / self.market.block_limit

    def running_averages(self) -> np.ndarray:
        """G_N over the recorded window: mean block size of the first N records."""
        return np.cumsum(self.block_sizes) / np.arange(1, len(self) + 1)


def step(
    state: FeeState,
    block_size: float,
    spec: MechanismSpec,
    market: MarketParams,
    included_valuations: Optional[Sequence[float]] = None,
    min_effective_price: Optional[float] = None,
) -> FeeState:
    """Advance the fee state by one block.

    ``included_valuations`` must be supplied (possibly empty) for the
    valuation-conditioned rules (wel/twel); ``min_effective_price`` is the
    smallest effective gas price among included transactions, consulted only
    by egpcure (defaults to the current fee, which disables the correction).

    Raises :class:`InvalidBlockSize` if ``block_size`` is outside
    ``[0, k*T]`` and :class:`MissingValuations` if a valuation-conditioned
    rule is stepped without a valuation list.
    """
    from . import mechanisms

    kT = market.block_limit
    if not (0.0 <= block_size <= kT):
        raise InvalidBlockSize(
            f"block_size {block_size} outside [0, {kT}] at height {state.height}"
        )
    b = state.base_fee
    T = market.target
    rule = spec.rule

    if rule is Rule.AMM:
        nxt = mechanisms.step_amm(state, block_size, spec.q, T, spec.fee_floor)
        return nxt

    if rule is Rule.EIP1559:
        b_next = mechanisms.step_eip1559(b, block_size, spec.d, T, spec.fee_floor)
    elif rule is Rule.EXP1559:
        b_next = mechanisms.step_exp1559(b, block_size, spec.d, T, spec.fee_floor)
    elif rule in (Rule.WEL, Rule.TWEL):
        if included_valuations is None:
            raise MissingValuations(
                f"rule {rule.value} requires the included valuations"
            )
        if rule is Rule.WEL:
            b_next = mechanisms.step_wel(
                b, included_valuations, spec.alpha_wel, kT, spec.fee_floor
            )
        else:
            b_next = mechanisms.step_twel(
                b,
                included_valuations,
                block_size,
                spec.alpha_wel,
                spec.delta,
                kT,
                spec.fee_floor,
            )
    else:  # Rule.EGP_CURE; the enum is exhaustive
        m_n = b if min_effective_price is None else min_effective_price
        if m_n < b:
            raise DomainError(
                f"min_effective_price {m_n} below the base fee {b}"
            )
        b_next = mechanisms.step_egpcure(
            b, block_size, m_n, spec.d, spec.intensity, spec.gamma, T, spec.fee_floor
        )

    return FeeState(
        base_fee=b_next, height=state.height + 1, excess_gas=state.excess_gas
    )


# --------------------------------------------------------------------------
# Properness checking
# --------------------------------------------------------------------------

#: relative slack for direction comparisons (pure float rounding)
_DIR_TOL = 1e-12


@dataclass(frozen=True)
class ProbePoint:
    """Properness diagnostics at a single probe fee.

    ``next_fee`` is the update under mean-field demand; ``worst_case_fee``
    (egpcure only) is the update when the minimum effective gas price takes
    its largest admissible value, i.e. the valuation bound.
    """

    fee: float
    block_size: float
    next_fee: float
    ratio: float
    direction_ok: Optional[bool]
    worst_case_fee: Optional[float] = None
    worst_case_ok: Optional[bool] = None


@dataclass(frozen=True)
class PropernessReport:
    """Result of :func:`check_properness`.

    ``alpha`` is the tightest two-sided relative-difference constant
    observed over the probes (``max(alpha_up, alpha_down)`` with
    ``alpha_up = max h(b)/b`` and ``alpha_down = max b/h(b)``).  For rules
    whose update carries an additive term, ``a2_prime_alpha/beta`` are the
    analytic constants of the relaxed bounded-relative-differences
    condition, derived under the valuation bound ``valuation_bound``.
    """

    rule: Rule
    probes: tuple[ProbePoint, ...]
    a1_applicable: bool
    a1_ok: Optional[bool]
    a1_violations: tuple[ProbePoint, ...]
    alpha_up: float
    alpha_down: float
    alpha: float
    a2_ok: bool
    a2_prime_alpha: Optional[float] = None
    a2_prime_beta: Optional[float] = None
    a2_prime_ok: Optional[bool] = None
    valuation_bound: Optional[float] = None

    def to_json_dict(self) -> dict:
        def _probe(p: ProbePoint) -> dict:
            return {
                "fee": p.fee,
                "block_size": p.block_size,
                "next_fee": p.next_fee,
                "ratio": p.ratio,
                "direction_ok": p.direction_ok,
                "worst_case_fee": p.worst_case_fee,
                "worst_case_ok": p.worst_case_ok,
            }

        return {
            "rule": self.rule.value,
            "a1_applicable": self.a1_applicable,
            "a1_ok": self.a1_ok,
            "a1_violations": [_probe(p) for p in self.a1_violations],
            "alpha_up": self.alpha_up,
            "alpha_down": self.alpha_down,
            "alpha": self.alpha,
            "a2_ok": self.a2_ok,
            "a2_prime_alpha": self.a2_prime_alpha,
            "a2_prime_beta": self.a2_prime_beta,
            "a2_prime_ok": self.a2_prime_ok,
            "valuation_bound": self.valuation_bound,
            "probes": [_probe(p) for p in self.probes],
        }


def _effective_valuation_bound(dist: ValuationDist) -> float:
    """Upper valuation bound; for unbounded families, the 1e-12 upper quantile."""
    from . import demand

    lo, hi = dist.support()
    if math.isfinite(hi):
        return hi
    return demand.inverse_survival(dist, 1e-12)


def check_properness(
    spec: MechanismSpec,
    market: MarketParams,
    probe_fees: Sequence[float],
) -> PropernessReport:
    """Probe an update rule for non-divergence and bounded relative differences.

    At each probe fee ``b`` the mean-field block size fixes the demand
    response; non-divergence holds at the probe when the update moves with
    the sign of ``g(b) - T``.  For egpcure the check is repeated with the
    minimum effective gas price pushed to the valuation bound: whenever that
    correction fires on an under-target block, the rule refuses to lower the
    fee and the probe is recorded as a violation.  Welfare-based rules
    (wel/twel) target welfare rather than the block-size target, so the
    direction condition is reported as not applicable.
    """
    from . import demand, mechanisms

    probe_fees = [float(b) for b in probe_fees]
    if not probe_fees:
        raise DomainError("probe_fees must be nonempty")
    if any(b <= 0 for b in probe_fees):
        raise DomainError("probe fees must be positive")

    rule = spec.rule
    T = market.target
    kT = market.block_limit
    dist = market.valuation
    bound = _effective_valuation_bound(dist)

    a1_applicable = rule not in (Rule.WEL, Rule.TWEL)
    probes: list[ProbePoint] = []
    violations: list[ProbePoint] = []
    alpha_up = 1.0
    alpha_down = 1.0

    for b in sorted(probe_fees):
        g = demand.mean_field_block_size(b, market)
        worst_fee = None
        worst_ok = None

        if rule is Rule.EIP1559:
            nxt = mechanisms.step_eip1559(b, g, spec.d, T, spec.fee_floor)
        elif rule is Rule.EXP1559:
            nxt = mechanisms.step_exp1559(b, g, spec.d, T, spec.fee_floor)
        elif rule is Rule.AMM:
            # evaluate on the reserve manifold consistent with the probe fee
            x = max(0.0, math.log(b / spec.q) / spec.q) if b > spec.q else 0.0
            st = FeeState(base_fee=b, height=0, excess_gas=x)
            nxt = mechanisms.step_amm(st, g, spec.q, T, spec.fee_floor).base_fee
        elif rule is Rule.WEL:
            nxt = mechanisms.step_wel_mean_field(
                b, g, market, spec.alpha_wel, spec.fee_floor
            )
        elif rule is Rule.TWEL:
            nxt = mechanisms.step_twel_mean_field(
                b, g, market, spec.alpha_wel, spec.delta, spec.fee_floor
            )
        else:  # egpcure: mean-field convention m_n = b, correction inert
            nxt = mechanisms.step_egpcure(
                b, g, b, spec.d, spec.intensity, spec.gamma, T, spec.fee_floor
            )
            if g > 0 and bound > b:
                m_worst = bound
                worst_fee = mechanisms.step_egpcure(
                    b,
                    g,
                    m_worst,
                    spec.d,
                    spec.intensity,
                    spec.gamma,
                    T,
                    spec.fee_floor,
                )
                if g < T:
                    worst_ok = worst_fee <= b * (1.0 + _DIR_TOL)
                else:
                    worst_ok = worst_fee >= b * (1.0 - _DIR_TOL)

        ratio = nxt / b
        if a1_applicable:
            if g > T:
                direction_ok = nxt >= b * (1.0 - _DIR_TOL)
            elif g < T:
                direction_ok = nxt <= b * (1.0 + _DIR_TOL)
            else:
                direction_ok = True
        else:
            direction_ok = None

        point = ProbePoint(
            fee=b,
            block_size=g,
            next_fee=nxt,
            ratio=ratio,
            direction_ok=direction_ok,
            worst_case_fee=worst_fee,
            worst_case_ok=worst_ok,
        )
        probes.append(point)
        if direction_ok is False or worst_ok is False:
            violations.append(point)
        alpha_up = max(alpha_up, ratio)
        alpha_down = max(alpha_down, b / nxt if nxt > 0 else math.inf)

    alpha = max(alpha_up, alpha_down)
    a1_ok = (not violations) if a1_applicable else None

    a2_prime_alpha = None
    a2_prime_beta = None
    a2_prime_ok = None
    if rule is Rule.EGP_CURE:
        a2_prime_alpha = 1.0 + spec.d + spec.intensity * (1.0 + spec.gamma)
        a2_prime_beta = spec.intensity * bound
        a2_prime_ok = True
        a2_ok = False  # the correction term breaks the multiplicative bound
    elif rule in (Rule.WEL, Rule.TWEL):
        if spec.alpha_wel < 1.0:
            a2_prime_alpha = 1.0 / (1.0 - spec.alpha_wel)
            a2_prime_beta = spec.alpha_wel * bound
            a2_prime_ok = True
        a2_ok = False
    else:
        a2_ok = math.isfinite(alpha)

    return PropernessReport(
        rule=rule,
        probes=tuple(probes),
        a1_applicable=a1_applicable,
        a1_ok=a1_ok,
        a1_violations=tuple(violations),
        alpha_up=alpha_up,
        alpha_down=alpha_down,
        alpha=alpha,
        a2_ok=a2_ok,
        a2_prime_alpha=a2_prime_alpha,
        a2_prime_beta=a2_prime_beta,
        a2_prime_ok=a2_prime_ok,
        valuation_bound=bound,
    )
