"""Combinatorial identities and special functions behind the closed forms.

The link model repeatedly needs expectations of the shape E[k^n / z^k],
E[h(k) / z^k] and E[1 / (k z^k)] where k is Poisson (possibly conditioned
on k >= 1) and h is the unit step.  The first reduces to Stirling numbers
of the second kind through the falling-factorial expansion
k^n = sum_i S2(n, i) k_(i), the last to the exponential integral Ei.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Euler-Mascheroni constant, fixed literal (not computed).
EULER_GAMMA = 0.57721566490153286060651209

# math.exp overflows just above this; exponents past it have no float64 value.
_EXP_LIMIT = 709.0

# Module-level triangular table of S2(n, i), grown on demand.
_S2_ROWS: list[list[int]] = [[1]]


@dataclass(frozen=True)
class StirlingTable:
    """Triangular table of Stirling numbers of the second kind.

    entries[n][i] = S2(n, i) for 0 <= i <= n <= max_n.
    """

    max_n: int
    entries: tuple[tuple[int, ...], ...]

    def value(self, n: int, i: int) -> int:
        if i > n:
            return 0
        return self.entries[n][i]


def _grow_rows(max_n: int) -> None:
    while len(_S2_ROWS) <= max_n:
        prev = _S2_ROWS[-1]
        n = len(_S2_ROWS)
        row = [0] * (n + 1)
        for i in range(1, n):
            # S2(n, i) = i*S2(n-1, i) + S2(n-1, i-1)
            row[i] = i * prev[i] + prev[i - 1]
        row[n] = 1
        _S2_ROWS.append(row)


def stirling_table(max_n: int) -> StirlingTable:
    """Build the table of partition counts S2(n, i) up to n = max_n."""
    if max_n < 0:
        raise ValueError("max_n must be nonnegative")
    _grow_rows(max_n)
    rows = tuple(tuple(r) for r in _S2_ROWS[: max_n + 1])
    return StirlingTable(max_n=max_n, entries=rows)


def stirling2(n: int, i: int) -> int:
    """Number of partitions of an n-element set into i nonempty blocks.

    Total on n, i >= 0: returns 0 for i > n and for (i = 0, n > 0),
    and 1 for n = i = 0.
    """
    if n < 0 or i < 0:
        raise ValueError("stirling2 arguments must be nonnegative")
    if i > n:
        return 0
    _grow_rows(n)
    return _S2_ROWS[n][i]


def poisson_power_moment(mu: float, zeta: float, n: int) -> float:
    """E[k^n / zeta^k] for k ~ Poisson(mu).

    Closed form: exp(-mu (1 - 1/zeta)) * sum_{i=1..n} S2(n, i) (mu/zeta)^i.
    """
    if mu <= 0 or zeta <= 0:
        raise ValueError("mu and zeta must be positive")
    if n < 1:
        raise ValueError("n must be a positive integer")
    ratio = mu / zeta
    exponent = -mu * (1.0 - 1.0 / zeta)
    if exponent > _EXP_LIMIT:
        raise OverflowError(
            f"poisson_power_moment exponent mu/zeta - mu = {exponent:.3g} "
            "exceeds float64 range"
        )
    _grow_rows(n)
    acc = 0.0
    power = 1.0
    for i in range(1, n + 1):
        power *= ratio
        acc += _S2_ROWS[n][i] * power
    return math.exp(exponent) * acc


def zero_deleted_step_expectation(mu: float, zeta: float) -> float:
    """E[h(k) / zeta^k] for k ~ Poisson(mu), h the unit step at k >= 1.

    Equals exp(-mu) * (exp(mu/zeta) - 1).  For zeta >= 1 the value lies in
    (0, 1); smaller zeta amplifies the tail and the value may exceed 1.
    """
    if mu <= 0 or zeta <= 0:
        raise ValueError("mu and zeta must be positive")
    exponent = mu / zeta - mu
    if exponent > _EXP_LIMIT:
        raise OverflowError(
            f"zero_deleted_step_expectation exponent {exponent:.3g} "
            "exceeds float64 range"
        )
    # e^{-mu}(e^{mu/zeta} - 1) = e^{mu/zeta - mu} - e^{-mu}
    return math.exp(exponent) - math.exp(-mu)


def _ei_series_tail(x: float) -> float:
    """sum_{k>=1} x^k / (k * k!), i.e. Ei(x) - ln(x) - gamma for x > 0.

    All terms are positive, so the sum is run to its float64 fixed point
    (adding the next term no longer changes the accumulator) once past the
    largest term near k = x.
    """
    if x > _EXP_LIMIT:
        raise OverflowError(f"Ei series argument {x:.3g} exceeds float64 range")
    total = 0.0
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= x / k
        updated = total + term / k
        if updated == total and k > x:
            return total
        total = updated


def exponential_integral(x: float) -> float:
    """Exponential integral Ei(x) for x > 0 (Cauchy principal value).

    Evaluated through the convergent series gamma + ln(x) + sum x^k/(k*k!),
    which is exact on the positive axis; monotone increasing.
    """
    if x <= 0:
        raise ValueError("exponential_integral requires x > 0")
    return EULER_GAMMA + math.log(x) + _ei_series_tail(x)


def zero_truncated_inverse_moment(mu: float, xi: float) -> float:
    """E[1 / (k xi^k)] for zero-truncated Poisson k (k >= 1, mean-mu base).

    Closed form (Ei(mu/xi) - ln(mu/xi) - gamma) / (e^mu - 1); evaluated via
    the series for the numerator so small arguments do not cancel.
    """
    if mu <= 0 or xi <= 0:
        raise ValueError("mu and xi must be positive")
    if mu > _EXP_LIMIT:
        raise OverflowError(f"zero_truncated_inverse_moment: mu = {mu:.3g} too large")
    return _ei_series_tail(mu / xi) / math.expm1(mu)
