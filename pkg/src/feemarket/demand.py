"""Demand side: survival functions, market-clearing price and block-size
generation in mean-field and stochastic modes.

Mean-field demand replaces the stochastic arrival process by its
expectation: a block at fee ``b`` uses ``min(k*T, lam*T*Fbar(b))`` gas,
where ``Fbar`` is the survival function of the valuation distribution.  The
market-clearing price ``b*`` solves ``Fbar(b*) = 1/lam``, so that the
mean-field block exactly meets the target.

Stochastic mode draws an arrival count (deterministic ``round(lam*T)`` or
Poisson with that mean), samples i.i.d. valuations, and includes every
arrival whose valuation covers the fee, capped at the block limit with the
highest valuations winning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

from .core import DistKind, MarketParams, ValuationDist
from .errors import DomainError, NoClearingPrice

_SQRT2 = math.sqrt(2.0)

#: relative tolerance of the clearing-price bisection
CLEARING_RTOL = 1e-10

#: adaptive-Simpson tolerance for truncated-mean integrals
SIMPSON_TOL = 1e-8


class Mode(str, Enum):
    MEAN_FIELD = "mean_field"
    STOCHASTIC = "stochastic"


class ArrivalKind(str, Enum):
    DETERMINISTIC = "deterministic"
    POISSON = "poisson"


@dataclass(frozen=True)
class DemandMode:
    """Demand realization mode.  Mean-field ignores ``arrivals`` and the RNG."""

    mode: Mode = Mode.MEAN_FIELD
    arrivals: ArrivalKind = ArrivalKind.POISSON

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "arrivals", ArrivalKind(self.arrivals))

    @property
    def is_mean_field(self) -> bool:
        return self.mode is Mode.MEAN_FIELD

    @classmethod
    def mean_field(cls) -> "DemandMode":
        return cls(Mode.MEAN_FIELD)

    @classmethod
    def stochastic(cls, arrivals: str = "poisson") -> "DemandMode":
        return cls(Mode.STOCHASTIC, ArrivalKind(arrivals))


MEAN_FIELD = DemandMode.mean_field()


def survival(dist: ValuationDist, x: float) -> float:
    """P(v >= x) for a valuation drawn from ``dist``; non-increasing in x."""
    return survival_fn(dist)(x)


@lru_cache(maxsize=128)
def survival_fn(dist: ValuationDist) -> Callable[[float], float]:
    """Specialized survival closure for hot loops (no per-call dispatch)."""
    if dist.kind is DistKind.UNIFORM:
        lo = dist.m - dist.w / 2.0
        hi = dist.m + dist.w / 2.0
        inv_w = 1.0 / dist.w

        def _surv_uniform(x: float) -> float:
            if x <= lo:
                return 1.0
            if x >= hi:
                return 0.0
            return (hi - x) * inv_w

        return _surv_uniform
    if dist.kind is DistKind.NORMAL:
        m = dist.m
        inv = 1.0 / (dist.w / 4.0 * _SQRT2)
        erfc = math.erfc

        def _surv_normal(x: float) -> float:
            return 0.5 * erfc((x - m) * inv)

        return _surv_normal
    shift = dist.shift
    a = dist.a
    inv_w = 1.0 / dist.w
    gammaincc = special.gammaincc

    def _surv_gamma(x: float) -> float:
        z = x - shift
        if z <= 0:
            return 1.0
        return float(gammaincc(a, z * inv_w))

    return _surv_gamma


def pdf(dist: ValuationDist, x: float) -> float:
    """Density of the valuation distribution at x."""
    if dist.kind is DistKind.UNIFORM:
        lo = dist.m - dist.w / 2.0
        hi = dist.m + dist.w / 2.0
        return 1.0 / dist.w if lo <= x <= hi else 0.0
    if dist.kind is DistKind.NORMAL:
        sd = dist.w / 4.0
        z = (x - dist.m) / sd
        return math.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))
    z = x - dist.shift
    if z <= 0:
        return 0.0
    zs = z / dist.w
    a = dist.a
    return math.exp((a - 1.0) * math.log(zs) - zs - math.lgamma(a)) / dist.w


def inverse_survival(dist: ValuationDist, p: float) -> float:
    """x with survival(dist, x) == p, for p in (0, 1)."""
    if not (0.0 < p < 1.0):
        raise DomainError(f"survival level must lie in (0,1), got {p}")
    if dist.kind is DistKind.UNIFORM:
        hi = dist.m + dist.w / 2.0
        return hi - p * dist.w
    if dist.kind is DistKind.NORMAL:
        return dist.m + (dist.w / 4.0) * float(special.ndtri(1.0 - p))
    return dist.shift + dist.w * float(special.gammainccinv(dist.a, p))


def sample(dist: ValuationDist, rng: np.random.Generator, n: int) -> np.ndarray:
    """n i.i.d. valuations."""
    if dist.kind is DistKind.UNIFORM:
        return rng.uniform(dist.m - dist.w / 2.0, dist.m + dist.w / 2.0, n)
    if dist.kind is DistKind.NORMAL:
        return rng.normal(dist.m, dist.w / 4.0, n)
    return dist.shift + rng.gamma(dist.a, dist.w, n)


def market_clearing_price(market: MarketParams) -> float:
    """Fee at which mean-field demand exactly meets the target.

    Solved by bisection of ``Fbar(b) = 1/lam`` on
    ``[fee_floor, m + 10 w]`` to relative tolerance ``CLEARING_RTOL``.
    Raises :class:`NoClearingPrice` when the level is not bracketed.
    """
    dist = market.valuation
    level = 1.0 / market.lam
    lo = 1e-9
    hi = dist.m + 10.0 * dist.w
    f_lo = survival(dist, lo) - level
    f_hi = survival(dist, hi) - level
    if f_lo < 0.0 or f_hi > 0.0:
        raise NoClearingPrice(
            f"survival does not attain {level} on [{lo}, {hi}]"
        )
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = survival(dist, mid) - level
        if f_mid == 0.0:
            return mid
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= CLEARING_RTOL * max(abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


def mean_field_block_size(b: float, market: MarketParams) -> float:
    """min(k*T, lam*T*Fbar(b)) -- deterministic block size at fee b."""
    if not (b > 0):
        raise DomainError(f"fee must be positive, got {b}")
    g = market.lam * market.target * survival(market.valuation, b)
    kT = market.block_limit
    return kT if g > kT else g


class BlockDraw(NamedTuple):
    """One stochastic block: size, included valuations (descending) and the
    minimum included valuation (the fee itself when the block is empty)."""

    block_size: float
    included_valuations: np.ndarray
    min_effective_price: float


def stochastic_block_size(
    b: float,
    market: MarketParams,
    mode: DemandMode,
    rng: np.random.Generator,
) -> BlockDraw:
    """Draw one block at fee ``b`` under the stochastic arrival process.

    Arrivals whose valuation is at least ``b`` are included (ties included),
    capped at the block limit with the highest valuations winning.  The cap
    is ``floor(k*T)`` transactions since each uses one gas unit.
    """
    if mode.is_mean_field:
        raise DomainError("stochastic_block_size requires a stochastic mode")
    mean_arrivals = market.lam * market.target
    if mode.arrivals is ArrivalKind.DETERMINISTIC:
        n = int(round(mean_arrivals))
    else:
        n = int(rng.poisson(mean_arrivals))
    if n == 0:
        return BlockDraw(0.0, np.empty(0), b)
    vals = sample(market.valuation, rng, n)
    eligible = vals[vals >= b]
    cap = int(market.block_limit)
    if eligible.size > cap:
        included = np.sort(eligible)[::-1][:cap]
    else:
        included = np.sort(eligible)[::-1]
    g = float(included.size)
    m_n = float(included[-1]) if included.size else b
    return BlockDraw(g, included, m_n)


# --------------------------------------------------------------------------
# Truncated means (adaptive Simpson)
# --------------------------------------------------------------------------


def _adaptive_simpson(f, a, b, tol):
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    half = 0.5 * tol
    return _simpson_rec(f, a, m, fa, flm, fm, left, half, depth - 1) + _simpson_rec(
        f, m, b, fm, frm, fb, right, half, depth - 1
    )


def _upper_cut(dist: ValuationDist) -> float:
    lo, hi = dist.support()
    if math.isfinite(hi):
        return hi
    return inverse_survival(dist, 1e-16)


def _mean_integral(dist: ValuationDist, a_pt: float, b_pt: float) -> float:
    """integral of x * pdf(x) over [a_pt, b_pt] by adaptive Simpson.

    For the gamma families the pdf has an x**(a-1) endpoint singularity
    when a < 1; substituting z = u**(1/a) (z the distance from the shift)
    turns z**(a-1) dz into du/a and removes it.
    """
    if b_pt <= a_pt:
        return 0.0
    if dist.kind in (DistKind.SHIFTED_GAMMA, DistKind.SHIFTED_EXPONENTIAL):
        shape = dist.a
        shift = dist.shift
        w = dist.w
        log_norm = math.lgamma(shape) + shape * math.log(w)
        inv_shape = 1.0 / shape

        def integrand(u: float) -> float:
            z = u**inv_shape
            return (shift + z) * math.exp(-z / w - log_norm) * inv_shape

        u_lo = max(a_pt - shift, 0.0) ** shape
        u_hi = (b_pt - shift) ** shape
        if u_hi <= u_lo:
            return 0.0
        est = (u_hi - u_lo) * integrand(0.5 * (u_lo + u_hi))
        tol = SIMPSON_TOL * max(1.0, abs(est))
        return _adaptive_simpson(integrand, u_lo, u_hi, tol)

    integrand = lambda x: x * pdf(dist, x)
    est = (b_pt - a_pt) * integrand(0.5 * (a_pt + b_pt))
    tol = SIMPSON_TOL * max(1.0, abs(est))
    return _adaptive_simpson(integrand, a_pt, b_pt, tol)


def truncated_mean(dist: ValuationDist, lo: float) -> float:
    """E[v | v >= lo]; requires survival(lo) > 0."""
    sbar = survival(dist, lo)
    if sbar <= 0.0:
        raise DomainError(f"no valuation mass at or above {lo}")
    lower, _ = dist.support()
    a = max(lo, lower) if math.isfinite(lower) else lo
    hi = _upper_cut(dist)
    if a >= hi:
        # truncation beyond the numerical tail cut: the conditional mass
        # sits at the truncation point
        return a
    return _mean_integral(dist, a, hi) / sbar


def truncated_capped_mean(dist: ValuationDist, lo: float, cap: float) -> float:
    """E[min(v, cap) | v >= lo]; requires survival(lo) > 0 and cap >= lo."""
    if cap < lo:
        raise DomainError(f"cap {cap} below truncation point {lo}")
    sbar = survival(dist, lo)
    if sbar <= 0.0:
        raise DomainError(f"no valuation mass at or above {lo}")
    lower, _ = dist.support()
    a = max(lo, lower) if math.isfinite(lower) else lo
    hi = min(cap, _upper_cut(dist))
    if a >= hi:
        return cap
    body = _mean_integral(dist, a, hi)
    return (body + cap * survival(dist, cap)) / sbar
