"""Energy per delivered information bit and delay-constrained minimization.

A packet carrying k symbols spends r (kN + H) channel bits for kN
information bits, so the energy consumption rating is

    ECR(T) = E[r (kN + H) / (kN)] * P_t / R   [joule per information bit]

with k zero-truncated Poisson and r geometric in the packet success
probability.  Averaging yields a closed form whose header term involves
the exponential integral.  Minimizing ECR under an expected-delay cap
E[d](T) <= d_max reduces to comparing the unconstrained minimizer with the
two corner points where the delay constraint binds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import InfeasibleConstraintError, InstabilityError
from .model import expected_delay
from .optimize import _golden_min, _log_grid, optimal_interval
from .params import Mode, SystemParams
from .special import _ei_series_tail

_EXP_LIMIT = 709.0


class Binding(Enum):
    INTERIOR = "interior"
    LEFT_CORNER = "left_corner"
    RIGHT_CORNER = "right_corner"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class EnergyResult:
    """Outcome of an energy minimization.

    t_star_unconstrained is inf when ECR decreases monotonically (error
    free channel) and only an infimum exists; ecr_at_star then carries the
    limiting value.  evaluations counts model-function calls made while
    searching.
    """

    t_star_unconstrained: float
    ecr_at_star: float
    t_star_constrained: float
    ecr_at_constrained: float
    binding: Binding
    corner_points: tuple[float, float]
    evaluations: int = 0


def ecr(params: SystemParams) -> float:
    """Expected transmit energy per delivered information bit (J/bit).

    Closed form for the efficient (zero-truncated) mode of an uncoded link:

        ECR(T) = (e^x - 1 + eta * (Ei(x) - ln x - gamma)) /
                 (alpha^H (e^mu - 1)) * P_t / R,   x = mu * alpha^(-N).
    """
    if params.mode is not Mode.EFFICIENT:
        raise ValueError(
            "the energy model is defined for the efficient mode only "
            "(slotted-mode dummy packets are out of scope)"
        )
    if params.coding is not None:
        raise ValueError("the energy model covers the uncoded link only")
    mu = params.mean_symbols_per_interval
    alpha = params.bit_success_prob
    n = params.symbol_bits
    x = mu * alpha ** (-n)
    if x > _EXP_LIMIT or mu > _EXP_LIMIT:
        raise OverflowError(
            f"ECR exponent mu * alpha^(-N) = {x:.6g} exceeds float64 range"
        )
    numerator = math.expm1(x) + params.header_ratio * _ei_series_tail(x)
    denominator = alpha**params.header_bits * math.expm1(mu)
    return numerator / denominator * params.transmit_power / params.channel_rate


def _ecr_limit_large_t(params: SystemParams) -> float:
    # beta = 0 only: the header amortizes away and every channel bit is an
    # information bit, leaving P_t / R.
    return params.transmit_power / params.channel_rate


def unconstrained_ecr_minimizer(params: SystemParams) -> tuple[float, float, int]:
    """(t_star, ecr, evaluations) minimizing ECR alone.

    On an error-free channel ECR strictly decreases with the interval, so
    there is no finite minimizer and (inf, limit, 0) is returned.
    Otherwise retransmission growth turns ECR back up and a floor/expansion
    bracket plus golden section finds the minimum (which may sit at the
    tiny-interval floor when there is no header to amortize).
    """
    if params.bit_error_prob == 0.0:
        return math.inf, _ecr_limit_large_t(params), 0

    evals = 0

    def objective(t: float) -> float:
        nonlocal evals
        evals += 1
        try:
            return ecr(params.with_interval(t))
        except OverflowError:
            return math.inf

    t_ref = 1.0 / params.arrival_rate
    lo = 1e-9 * t_ref
    hi = t_ref
    prev = objective(hi)
    increases = 0
    while increases < 8:
        hi *= 2.0
        cur = objective(hi)
        if not math.isfinite(cur):
            break  # ECR has blown past float range; the bracket is closed
        increases = increases + 1 if cur > prev else 0
        prev = cur
    grid = _log_grid(lo, hi, 64)
    values = [objective(t) for t in grid]
    best = min(range(len(grid)), key=lambda i: values[i])
    t_star = _golden_min(
        objective, grid[max(best - 1, 0)], grid[min(best + 1, len(grid) - 1)]
    )
    return t_star, objective(t_star), evals


def minimize_ecr_in_window(
    params: SystemParams, window: tuple[float, float]
) -> EnergyResult:
    """Minimize ECR over a closed interval of packetization intervals.

    Implements the corner-point shortcut: the optimum is either the
    unconstrained ECR minimizer (when it falls inside the window) or
    whichever window edge has the lower ECR.
    """
    t_lo, t_hi = window
    if not 0.0 < t_lo <= t_hi:
        raise ValueError("window must satisfy 0 < lower <= upper")
    t_unc, ecr_unc, evals = unconstrained_ecr_minimizer(params)
    if t_lo < t_unc < t_hi:
        return EnergyResult(
            t_star_unconstrained=t_unc,
            ecr_at_star=ecr_unc,
            t_star_constrained=t_unc,
            ecr_at_constrained=ecr_unc,
            binding=Binding.INTERIOR,
            corner_points=(t_lo, t_hi),
            evaluations=evals,
        )
    ecr_left = ecr(params.with_interval(t_lo))
    ecr_right = ecr(params.with_interval(t_hi))
    if ecr_left <= ecr_right:
        chosen, value, binding = t_lo, ecr_left, Binding.LEFT_CORNER
    else:
        chosen, value, binding = t_hi, ecr_right, Binding.RIGHT_CORNER
    return EnergyResult(
        t_star_unconstrained=t_unc,
        ecr_at_star=ecr_unc,
        t_star_constrained=chosen,
        ecr_at_constrained=value,
        binding=binding,
        corner_points=(t_lo, t_hi),
        evaluations=evals + 2,
    )


def _delay_total(params: SystemParams, t: float) -> float:
    try:
        return expected_delay(params.with_interval(t)).total
    except (InstabilityError, OverflowError):
        return math.inf


def _feasible_delay_window(
    params: SystemParams, d_max: float
) -> tuple[float, float, int]:
    opt = optimal_interval(params)
    if not d_max > opt.delay_at_t_star.total:
        raise InfeasibleConstraintError(
            f"delay bound {d_max:.6g} s is below the minimum achievable "
            f"expected delay {opt.delay_at_t_star.total:.6g} s"
        )
    evals = opt.evaluations

    def delay(t: float) -> float:
        nonlocal evals
        evals += 1
        return _delay_total(params, t)

    def crossing(t_inside: float, t_outside: float) -> float:
        for _ in range(200):
            mid = math.sqrt(t_inside * t_outside)
            if delay(mid) <= d_max:
                t_inside = mid
            else:
                t_outside = mid
            if abs(t_inside - t_outside) <= 1e-8 * t_inside:
                break
        return t_inside

    t_star = opt.t_star
    rng = opt.stable_range
    floor = rng.lower if rng.lower > 0.0 else 1e-9 / params.arrival_rate

    # Left corner.
    t_out = t_star
    left = floor
    for _ in range(200):
        t_out /= 2.0
        if t_out <= floor:
            if delay(floor) > d_max:
                left = crossing(t_star, floor)
            break
        if delay(t_out) > d_max:
            left = crossing(t_star, t_out)
            break

    # Right corner: the delay eventually exceeds any bound (formation delay
    # alone grows like T/2).
    t_out = t_star
    while delay(t_out) <= d_max:
        t_out *= 2.0
    right = crossing(t_star, t_out)
    return left, right, evals


def feasible_delay_window(params: SystemParams, d_max: float) -> tuple[float, float]:
    """The interval of T values with expected delay at most d_max.

    By unimodality of the delay curve this is a single interval around the
    delay-optimal T.  Raises InfeasibleConstraintError when d_max is below
    the minimum achievable delay.
    """
    left, right, _ = _feasible_delay_window(params, d_max)
    return left, right


def optimize_energy_under_delay(params: SystemParams, d_max: float) -> EnergyResult:
    """Most energy-efficient interval subject to E[d](T) <= d_max.

    The interval field of params is a placeholder; the search replaces it.
    """
    if not d_max > 0:
        raise InfeasibleConstraintError("delay bound must be positive")
    left, right, window_evals = _feasible_delay_window(params, d_max)
    result = minimize_ecr_in_window(params, (left, right))
    return replace(result, evaluations=result.evaluations + window_evals)
