"""Stable-range search and delay-optimal interval certificates."""

import math

import numpy as np
import pytest

from packetizer import (
    CodingProfile,
    EmptyStableRangeError,
    Mode,
    SearchMethod,
    SimConfig,
    SystemParams,
    expected_delay,
    optimal_interval,
    run_simulation,
    stability_report,
    stable_interval_range,
)
from conftest import symbols_for_packets


def make(n=16, h=30, lam=10.0, rate=300.0, beta=1e-3, t=1.0, mode=Mode.EFFICIENT,
         coding=None):
    return SystemParams(n, h, lam, rate, beta, t, mode=mode, coding=coding)


class TestStableRange:
    def test_open_range_above_upper_bound(self):
        rng = stable_interval_range(make(beta=0.0, rate=470.0))
        assert rng.lower == 0.0
        assert rng.upper == math.inf

    def test_open_range_at_exact_upper_bound(self):
        rng = stable_interval_range(make(beta=0.0, rate=460.0))
        assert rng.lower == 0.0
        assert rng.upper == math.inf

    def test_empty_below_lower_bound(self):
        with pytest.raises(EmptyStableRangeError):
            stable_interval_range(make(beta=0.0, rate=150.0))
        with pytest.raises(EmptyStableRangeError):
            stable_interval_range(make(beta=0.0, rate=160.0))

    def test_intermediate_rate_lower_bounded(self):
        rng = stable_interval_range(make(beta=0.0, rate=300.0))
        assert rng.lower > 0.0
        assert rng.upper == math.inf
        assert not stability_report(make(beta=0.0, rate=300.0, t=rng.lower * 0.9)).is_stable
        assert stability_report(make(beta=0.0, rate=300.0, t=rng.lower * 1.1)).is_stable

    def test_error_rate_bounds_range_above(self):
        rng = stable_interval_range(make(beta=1e-3, rate=300.0))
        assert 0.0 < rng.lower < rng.upper < math.inf
        assert stability_report(make(rate=300.0, t=rng.upper * 0.98)).is_stable
        assert not stability_report(make(rate=300.0, t=rng.upper * 1.02)).is_stable

    def test_slotted_always_lower_bounded(self):
        rng = stable_interval_range(make(beta=0.0, rate=1e5, mode=Mode.SLOTTED))
        assert rng.lower > 0.0

    def test_contains(self):
        rng = stable_interval_range(make(beta=1e-3, rate=300.0))
        assert rng.contains((rng.lower + rng.upper) / 2)
        assert not rng.contains(rng.lower)


class TestOptimalInterval:
    def test_result_is_self_consistent(self):
        opt = optimal_interval(make())
        assert opt.stable_range.contains(opt.t_star)
        total = opt.delay_at_t_star.total
        for probe in (opt.t_star * (1 - 1e-3), opt.t_star * (1 + 1e-3)):
            assert total <= expected_delay(make(t=probe)).total * (1 + 1e-6)

    def test_fast_channel_prefers_tiny_intervals(self):
        opt = optimal_interval(make(beta=0.0, rate=10**6))
        assert opt.t_star < 0.1  # below one mean inter-symbol gap

    def test_grid_certificate(self):
        p = make(rate=640.0, beta=1e-3)
        opt = optimal_interval(p)
        rng = opt.stable_range
        lo = rng.lower * 1.000001 if rng.lower > 0 else 1e-7
        hi = rng.upper * 0.999999 if math.isfinite(rng.upper) else 50.0
        grid = np.exp(np.linspace(math.log(lo), math.log(hi), 512))
        best = min(expected_delay(p.with_interval(float(t))).total for t in grid)
        assert opt.delay_at_t_star.total <= best * 1.001

    def test_matches_independent_dense_grid(self):
        p = make(rate=300.0, beta=1e-3)
        opt = optimal_interval(p)
        assert opt.method is SearchMethod.UNIMODAL_SEARCH
        rng = opt.stable_range
        grid = np.exp(np.linspace(math.log(rng.lower * 1.0001),
                                  math.log(rng.upper * 0.9999), 4096))
        vals = [expected_delay(p.with_interval(float(t))).total for t in grid]
        t_grid = float(grid[int(np.argmin(vals))])
        assert opt.t_star == pytest.approx(t_grid, rel=0.01)

    def test_evaluation_count_reported(self):
        opt = optimal_interval(make())
        assert opt.evaluations > 10

    def test_propagates_empty_range(self):
        with pytest.raises(EmptyStableRangeError):
            optimal_interval(make(beta=0.0, rate=100.0))

    def test_interval_grows_with_header(self):
        t_stars = [
            optimal_interval(make(n=8, h=h, lam=10.0, rate=400.0, beta=1e-3)).t_star
            for h in (8, 16, 24, 32, 40)
        ]
        assert all(a <= b for a, b in zip(t_stars, t_stars[1:]))

    def test_coded_link_prefers_longer_interval(self):
        # rate-1/2 coding with a 10x better BER doubles packet air time and
        # tames retransmissions; both effects favor a larger interval
        uncoded = optimal_interval(make(n=8, h=40, lam=10.0, rate=400.0, beta=1e-2))
        coded = optimal_interval(
            make(n=8, h=40, lam=10.0, rate=400.0, beta=1e-2,
                 coding=CodingProfile(0.5, 0.5, 1e-3, 1e-3))
        )
        assert coded.t_star > uncoded.t_star

    def test_near_minimizer_of_simulated_delay(self):
        p = make(rate=300.0, beta=1e-3)
        opt = optimal_interval(p)
        ts = np.exp(np.linspace(math.log(opt.t_star / 2.5),
                                math.log(opt.t_star * 2.5), 11))
        sims = []
        for i, t in enumerate(ts):
            q = p.with_interval(float(t))
            res = run_simulation(q, SimConfig(num_symbols=symbols_for_packets(q, 50_000),
                                              seed=300 + i))
            sims.append(res.mean_total)
        at_star = run_simulation(
            p.with_interval(opt.t_star),
            SimConfig(num_symbols=symbols_for_packets(p.with_interval(opt.t_star), 50_000),
                      seed=350),
        ).mean_total
        assert at_star <= min(sims) * 1.10
