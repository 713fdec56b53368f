"""Special-function and combinatorial identities against brute-force oracles."""

import math

import pytest
from scipy.special import expi

from packetizer import (
    EULER_GAMMA,
    exponential_integral,
    poisson_power_moment,
    stirling2,
    stirling_table,
    zero_deleted_step_expectation,
    zero_truncated_inverse_moment,
)


def count_partitions(n: int, blocks: int) -> int:
    """Brute-force: enumerate all set partitions of {0..n-1}, count by block count."""
    def partitions(items):
        if not items:
            yield []
            return
        head, rest = items[0], items[1:]
        for part in partitions(rest):
            for i in range(len(part)):
                yield part[:i] + [part[i] + [head]] + part[i + 1:]
            yield part + [[head]]

    return sum(1 for p in partitions(list(range(n))) if len(p) == blocks)


def poisson_pmf(k: int, mu: float) -> float:
    return math.exp(k * math.log(mu) - mu - math.lgamma(k + 1))


def series_power_moment(mu: float, zeta: float, n: int) -> float:
    total = 0.0
    for k in range(0, 4000):
        add = (k**n) / zeta**k * poisson_pmf(k, mu)
        updated = total + add
        if updated == total and k > mu * max(1.0, 1.0 / zeta) + n:
            break
        total = updated
    return total


def series_zero_deleted(mu: float, zeta: float) -> float:
    total = 0.0
    for k in range(1, 4000):
        add = poisson_pmf(k, mu) / zeta**k
        updated = total + add
        if updated == total and k > mu * max(1.0, 1.0 / zeta):
            break
        total = updated
    return total


def series_zero_truncated_inverse(mu: float, xi: float) -> float:
    norm = -math.expm1(-mu)
    total = 0.0
    for k in range(1, 4000):
        add = poisson_pmf(k, mu) / (k * xi**k)
        updated = total + add
        if updated == total and k > mu * max(1.0, 1.0 / xi):
            break
        total = updated
    return total / norm


def series_ei(x: float) -> float:
    # gamma + ln x + sum_k x^k/(k*k!), summed to its float64 fixed point with
    # the same multiply-then-accumulate order as the library so the two sums
    # agree bitwise (at x = 30 the sum is ~4e11; any reordering costs ~1e-5).
    gamma = 0.57721566490153286060651209
    total = 0.0
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= x / k
        updated = total + term / k
        if updated == total and k > x:
            break
        total = updated
    return gamma + math.log(x) + total


class TestStirling:
    def test_special_cases(self):
        assert stirling2(2, 1) == 1
        assert stirling2(2, 2) == 1
        assert stirling2(0, 0) == 1
        assert stirling2(5, 0) == 0
        assert stirling2(3, 7) == 0

    @pytest.mark.parametrize("n,i", [(4, 2), (4, 1), (4, 3), (5, 2), (5, 3), (6, 3)])
    def test_against_enumeration(self, n, i):
        assert stirling2(n, i) == count_partitions(n, i)

    def test_table_recurrence_exhaustive(self):
        table = stirling_table(20)
        assert table.max_n == 20
        for n in range(1, 21):
            assert table.value(n, 0) == 0
            assert table.value(n, n) == 1
            assert table.value(n, 1) == 1
            for i in range(1, n):
                expected = i * table.value(n - 1, i) + table.value(n - 1, i - 1)
                assert table.value(n, i) == expected

    def test_negative_arguments_rejected(self):
        with pytest.raises(ValueError):
            stirling2(-1, 0)


class TestPoissonPowerMoment:
    def test_poisson_mean(self):
        assert poisson_power_moment(1.0, 1.0, 1) == pytest.approx(1.0, rel=1e-14)

    def test_poisson_second_moment(self):
        # E[k^2] = mu + mu^2 = 6 at mu = 2
        assert poisson_power_moment(2.0, 1.0, 2) == pytest.approx(6.0, rel=1e-14)

    def test_against_series(self):
        assert poisson_power_moment(3.0, 1.5, 2) == pytest.approx(
            series_power_moment(3.0, 1.5, 2), rel=1e-12
        )

    @pytest.mark.parametrize("mu", [0.1, 0.5, 1.0, 2.0, 5.0])
    @pytest.mark.parametrize("zeta", [1.0, 1.2, 2.0])
    @pytest.mark.parametrize("n", list(range(1, 11)))
    def test_series_grid(self, mu, zeta, n):
        oracle = series_power_moment(mu, zeta, n)
        assert poisson_power_moment(mu, zeta, n) == pytest.approx(oracle, rel=1e-10)

    def test_domain(self):
        with pytest.raises(ValueError):
            poisson_power_moment(-1.0, 1.0, 1)
        with pytest.raises(ValueError):
            poisson_power_moment(1.0, 1.0, 0)

    def test_overflow_signal(self):
        with pytest.raises(OverflowError):
            poisson_power_moment(10.0, 1e-5, 2)


class TestZeroDeletedStep:
    def test_vanishes_with_no_arrivals(self):
        assert zero_deleted_step_expectation(1e-12, 2.0) < 1e-9

    def test_probability_of_nonzero(self):
        # zeta = 1 reduces to P(k >= 1) = 1 - e^{-mu}
        assert zero_deleted_step_expectation(1.0, 1.0) == pytest.approx(
            1.0 - math.exp(-1.0), rel=1e-14
        )

    def test_against_series(self):
        assert zero_deleted_step_expectation(2.0, 3.0) == pytest.approx(
            series_zero_deleted(2.0, 3.0), rel=1e-12
        )

    @pytest.mark.parametrize("mu", [0.1, 0.5, 1.0, 2.0, 5.0])
    @pytest.mark.parametrize("zeta", [0.5, 1.0, 1.2, 2.0])
    def test_series_grid(self, mu, zeta):
        oracle = series_zero_deleted(mu, zeta)
        assert zero_deleted_step_expectation(mu, zeta) == pytest.approx(oracle, rel=1e-10)


class TestExponentialIntegral:
    def test_series_vanishes_at_origin(self):
        x = 1e-12
        assert abs(exponential_integral(x) - math.log(x) - EULER_GAMMA) < 1e-9

    def test_reference_value(self):
        assert exponential_integral(1.0) == pytest.approx(1.8951178163559368, rel=1e-12)

    @pytest.mark.parametrize("x", [0.01, 0.1, 1.0, 2.0, 5.0, 10.0, 30.0])
    def test_matches_series_oracle(self, x):
        assert abs(exponential_integral(x) - series_ei(x)) <= 1e-9

    @pytest.mark.parametrize("x", [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0])
    def test_matches_scipy(self, x):
        assert exponential_integral(x) == pytest.approx(float(expi(x)), rel=1e-12)

    def test_monotone_increasing(self):
        xs = [0.01, 0.05, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 30.0]
        values = [exponential_integral(x) for x in xs]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_domain_error(self):
        with pytest.raises(ValueError):
            exponential_integral(0.0)
        with pytest.raises(ValueError):
            exponential_integral(-1.0)


class TestZeroTruncatedInverseMoment:
    def test_against_series(self):
        assert zero_truncated_inverse_moment(1.0, 1.0) == pytest.approx(
            series_zero_truncated_inverse(1.0, 1.0), rel=1e-12
        )
        assert zero_truncated_inverse_moment(0.5, 2.0) == pytest.approx(
            series_zero_truncated_inverse(0.5, 2.0), rel=1e-12
        )

    @pytest.mark.parametrize("mu", [0.1, 0.5, 1.0, 2.0, 5.0])
    @pytest.mark.parametrize("xi", [0.5, 1.0, 1.2, 2.0])
    def test_series_grid(self, mu, xi):
        oracle = series_zero_truncated_inverse(mu, xi)
        assert zero_truncated_inverse_moment(mu, xi) == pytest.approx(oracle, rel=1e-10)

    def test_concentrates_at_inverse_mean(self):
        # mass concentrates near k = mu, so E[1/k] -> 1/mu
        assert zero_truncated_inverse_moment(200.0, 1.0) * 200.0 == pytest.approx(
            1.0, rel=0.02
        )

    def test_domain(self):
        with pytest.raises(ValueError):
            zero_truncated_inverse_moment(0.0, 1.0)
