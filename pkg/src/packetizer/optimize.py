"""Stable-interval search and delay-minimal packetization interval.

The expected-delay curve is treated as unimodal over the stable range but
never trusted to be: a coarse scan brackets the minimum for a golden
section search, and any hint of multiple local minima falls back to a
dense grid plus local refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import EmptyStableRangeError, InstabilityError
from .model import expected_delay, stability_report
from .params import DelayBreakdown, Mode, SystemParams

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# Searches over a range open at zero are floored here (relative to 1/lambda);
# the delay curve is flat approaching 0, so the floor is immaterial.
_ZERO_FLOOR_FACTOR = 1e-6
_LOG_TOL = 1e-4
_COARSE_POINTS = 64
_FALLBACK_POINTS = 2048


@dataclass(frozen=True)
class StableRange:
    """Open interval of packetization intervals with a stable queue.

    lower == 0.0 means every sufficiently small interval is stable;
    upper == inf means arbitrarily large intervals are stable.
    """

    lower: float
    upper: float

    def contains(self, interval: float) -> bool:
        return self.lower < interval < self.upper


class SearchMethod(Enum):
    UNIMODAL_SEARCH = "unimodal_search"
    GRID_FALLBACK = "grid_fallback"


@dataclass(frozen=True)
class OptimizationResult:
    t_star: float
    delay_at_t_star: DelayBreakdown
    stable_range: StableRange
    method: SearchMethod
    evaluations: int


def _rho(params: SystemParams, interval: float) -> float:
    return stability_report(params.with_interval(interval)).utilization


def _rho_limit_small_t(params: SystemParams) -> float:
    # Efficient mode only: packets shrink to single symbols, so rho tends to
    # lambda (N_eff + H_eff) / (R * header_success * symbol_success).
    f = params.link_factors()
    return (
        params.arrival_rate
        * (f.symbol_bits_eff + f.header_bits_eff)
        / (params.channel_rate * f.header_success * f.symbol_success)
    )


def _rho_limit_large_t(params: SystemParams) -> float | None:
    # Without error-driven retransmission growth the utilization settles at
    # lambda N_eff / (R * header_success); with growth it diverges (None).
    f = params.link_factors()
    if f.symbol_success < 1.0:
        return None
    return params.arrival_rate * f.symbol_bits_eff / (
        params.channel_rate * f.header_success
    )


def _bisect_boundary(
    params: SystemParams, t_unstable: float, t_stable: float
) -> float:
    """Find the stability boundary between an unstable and a stable interval."""
    for _ in range(200):
        mid = math.sqrt(t_unstable * t_stable)  # geometric midpoint
        if _rho(params, mid) < 1.0:
            t_stable = mid
        else:
            t_unstable = mid
        if abs(t_stable - t_unstable) <= 1e-12 * t_stable:
            break
    return t_stable


def _find_stable_seed(params: SystemParams, ladder: list[float]) -> float | None:
    """Some interval with rho < 1, or None if the minimum of rho is >= 1."""
    for t in ladder:
        if _rho(params, t) < 1.0:
            return t
    # The utilization is unimodal in log T but its dip may be narrower than
    # the ladder spacing; chase the minimum before declaring emptiness.
    values = [_rho(params, t) for t in ladder]
    best = min(range(len(ladder)), key=lambda i: values[i])
    lo = ladder[max(best - 1, 0)]
    hi = ladder[min(best + 1, len(ladder) - 1)]
    t_min = _golden_min(lambda t: _rho(params, t), lo, hi)
    return t_min if _rho(params, t_min) < 1.0 else None


def stable_interval_range(params: SystemParams) -> StableRange:
    """The set of packetization intervals with utilization below one.

    The interval field of params is ignored.  Raises EmptyStableRangeError
    when no interval is stable (for an error-free channel this is exactly
    the case R <= N * lambda).
    """
    t_ref = 1.0 / params.arrival_rate
    ladder = [t_ref * 1e-8 * 2.0**j for j in range(96)]
    seed = _find_stable_seed(params, ladder)
    if seed is None:
        raise EmptyStableRangeError(
            "no packetization interval yields a stable queue; "
            "increase the channel rate or reduce the load"
        )

    # Upper endpoint: march up from the seed until instability (with error
    # growth this always happens), else consult the large-T asymptote.
    asymptote = _rho_limit_large_t(params)
    upper = math.inf
    if asymptote is None or asymptote >= 1.0:
        t = seed
        t_stable = seed
        for _ in range(220):
            t *= 2.0
            if _rho(params, t) >= 1.0:
                upper = _bisect_boundary(params, t, t_stable)
                break
            t_stable = t

    # Lower endpoint: march down from the seed until instability; if the
    # small-T side never destabilizes the range is open at zero.
    lower = 0.0
    limit_ok = (
        params.mode is Mode.EFFICIENT and _rho_limit_small_t(params) <= 1.0
    )
    if not limit_ok:
        t = seed
        t_stable = seed
        lower = t_ref * 1e-30
        for _ in range(220):
            t /= 2.0
            if _rho(params, t) >= 1.0:
                lower = _bisect_boundary(params, t, t_stable)
                break
            t_stable = t

    return StableRange(lower=lower, upper=upper)


def _search_bounds(params: SystemParams, rng: StableRange, delay) -> tuple[float, float]:
    t_ref = 1.0 / params.arrival_rate
    lo = rng.lower if rng.lower > 0.0 else min(_ZERO_FLOOR_FACTOR * t_ref, 1.0)
    if math.isfinite(rng.upper):
        return lo, rng.upper * (1.0 - 1e-9)
    # Unbounded range: expand geometrically until the delay has increased
    # for eight consecutive probes, then use the last probe as the cap.
    t = max(t_ref, 2.0 * lo)
    prev = delay(t)
    increases = 0
    while increases < 8:
        t *= 2.0
        cur = delay(t)
        if not math.isfinite(cur):
            break
        increases = increases + 1 if cur > prev else 0
        prev = cur
    return lo, t


def _golden_min(f, lo: float, hi: float) -> float:
    """Golden-section minimization in log space, |delta log| < _LOG_TOL."""
    a, b = math.log(lo), math.log(hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    while b - a > _LOG_TOL:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(math.exp(d))
    return math.exp((a + b) / 2.0)


def _log_grid(lo: float, hi: float, count: int) -> list[float]:
    la, lb = math.log(lo), math.log(hi)
    if count == 1:
        return [lo]
    return [math.exp(la + (lb - la) * i / (count - 1)) for i in range(count)]


def _count_local_minima(values: list[float]) -> int:
    signs = []
    for a, b in zip(values, values[1:]):
        if b != a:
            signs.append(1 if b > a else -1)
    flips = sum(1 for s, t in zip(signs, signs[1:]) if s == -1 and t == 1)
    if signs and signs[0] == 1:
        flips += 1  # decreasing was never seen first: minimum at the left edge
    return max(flips, 1)


def optimal_interval(params: SystemParams) -> OptimizationResult:
    """Delay-minimizing packetization interval over the stable range.

    The interval field of params is a placeholder; the search replaces it.
    """
    rng = stable_interval_range(params)
    evals = 0

    def delay(t: float) -> float:
        nonlocal evals
        evals += 1
        try:
            return expected_delay(params.with_interval(t)).total
        except (InstabilityError, OverflowError):
            return math.inf

    lo, hi = _search_bounds(params, rng, delay)
    grid = _log_grid(lo, hi, _COARSE_POINTS)
    values = [delay(t) for t in grid]
    best = min(range(len(grid)), key=lambda i: values[i])

    if _count_local_minima(values) <= 1:
        method = SearchMethod.UNIMODAL_SEARCH
        bracket_lo = grid[max(best - 1, 0)]
        bracket_hi = grid[min(best + 1, len(grid) - 1)]
        t_star = _golden_min(delay, bracket_lo, bracket_hi)
    else:
        method = SearchMethod.GRID_FALLBACK
        dense = _log_grid(lo, hi, _FALLBACK_POINTS)
        dense_vals = [delay(t) for t in dense]
        best = min(range(len(dense)), key=lambda i: dense_vals[i])
        bracket_lo = dense[max(best - 1, 0)]
        bracket_hi = dense[min(best + 1, len(dense) - 1)]
        t_star = _golden_min(delay, bracket_lo, bracket_hi)

    return OptimizationResult(
        t_star=t_star,
        delay_at_t_star=expected_delay(params.with_interval(t_star)),
        stable_range=rng,
        method=method,
        evaluations=evals,
    )
