"""Link, traffic and protocol parameters plus small result containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple


class Mode(Enum):
    """Packetization mode.

    EFFICIENT: packet formation skips empty intervals; packet inter-arrival
    is a geometric multiple of the interval.
    SLOTTED: one packet per interval; an empty interval emits a header-only
    dummy packet that occupies the channel but carries no symbols.
    """

    EFFICIENT = "efficient"
    SLOTTED = "slotted"


@dataclass(frozen=True)
class CodingProfile:
    """Separate coding rates / residual bit error rates for payload and header.

    data_rate and header_rate are code rates in (0, 1]; the residual BERs
    apply to coded bits.  The identity profile (rates 1, BERs equal to the
    channel BER) reproduces the uncoded system exactly.
    """

    data_rate: float
    header_rate: float
    data_ber: float
    header_ber: float

    def __post_init__(self) -> None:
        if not 0.0 < self.data_rate <= 1.0:
            raise ValueError("data_rate must be in (0, 1]")
        if not 0.0 < self.header_rate <= 1.0:
            raise ValueError("header_rate must be in (0, 1]")
        if not 0.0 <= self.data_ber < 1.0:
            raise ValueError("data_ber must be in [0, 1)")
        if not 0.0 <= self.header_ber < 1.0:
            raise ValueError("header_ber must be in [0, 1)")


class LinkFactors(NamedTuple):
    """Per-packet channel-bit accounting used by the closed forms.

    symbol_bits_eff  channel bits spent per payload symbol (N / data rate)
    header_bits_eff  channel bits spent on the header (H / header rate)
    header_success   probability the whole header survives one transmission
    symbol_success   probability one symbol's channel bits all survive
    """

    symbol_bits_eff: float
    header_bits_eff: float
    header_success: float
    symbol_success: float


@dataclass(frozen=True)
class SystemParams:
    """All physical, traffic and protocol parameters of the link.

    symbol_bits      N, bits per input symbol (>= 1)
    header_bits      H, header bits per packet (>= 0)
    arrival_rate     lambda, Poisson symbol arrival rate in symbols/sec
    channel_rate     R, channel transmission rate in bits/sec
    bit_error_prob   beta, independent bit error probability in [0, 1)
    interval         T, packetization interval in seconds
    mode             EFFICIENT or SLOTTED
    transmit_power   P_t in watts (used only by the energy model)
    coding           optional CodingProfile; None means uncoded
    """

    symbol_bits: int
    header_bits: int
    arrival_rate: float
    channel_rate: float
    bit_error_prob: float
    interval: float
    mode: Mode = Mode.EFFICIENT
    transmit_power: float = 1.0
    coding: CodingProfile | None = None

    def __post_init__(self) -> None:
        if int(self.symbol_bits) != self.symbol_bits or self.symbol_bits < 1:
            raise ValueError("symbol_bits must be an integer >= 1")
        if int(self.header_bits) != self.header_bits or self.header_bits < 0:
            raise ValueError("header_bits must be an integer >= 0")
        if not self.arrival_rate > 0:
            raise ValueError("arrival_rate must be positive")
        if not self.channel_rate > 0:
            raise ValueError("channel_rate must be positive")
        if not 0.0 <= self.bit_error_prob < 1.0:
            raise ValueError("bit_error_prob must be in [0, 1)")
        if not self.interval > 0:
            raise ValueError("interval must be positive")
        if not isinstance(self.mode, Mode):
            raise ValueError("mode must be a Mode value")
        if not self.transmit_power > 0:
            raise ValueError("transmit_power must be positive")

    # Derived quantities are computed on demand, never stored, so they can
    # not drift out of sync with the primary fields.

    @property
    def mean_symbols_per_interval(self) -> float:
        """mu = lambda * T, the mean symbol count per interval."""
        return self.arrival_rate * self.interval

    @property
    def bit_success_prob(self) -> float:
        """alpha = 1 - beta."""
        return 1.0 - self.bit_error_prob

    @property
    def header_ratio(self) -> float:
        """eta = H / N."""
        return self.header_bits / self.symbol_bits

    @property
    def empty_interval_prob(self) -> float:
        """P0 = exp(-mu), probability an interval collects no symbols."""
        return math.exp(-self.mean_symbols_per_interval)

    def with_interval(self, interval: float) -> "SystemParams":
        return replace(self, interval=interval)

    def link_factors(self) -> LinkFactors:
        n = self.symbol_bits
        h = self.header_bits
        if self.coding is None:
            a = self.bit_success_prob
            return LinkFactors(
                symbol_bits_eff=float(n),
                header_bits_eff=float(h),
                header_success=a**h,
                symbol_success=a**n,
            )
        c = self.coding
        return LinkFactors(
            symbol_bits_eff=n / c.data_rate,
            header_bits_eff=h / c.header_rate,
            header_success=(1.0 - c.header_ber) ** h,
            symbol_success=(1.0 - c.data_ber) ** n,
        )


@dataclass(frozen=True)
class Moments:
    """First two moments of a nonnegative random quantity."""

    mean: float
    second_moment: float
    variance: float
    cv2: float

    @classmethod
    def from_mean_second(cls, mean: float, second_moment: float) -> "Moments":
        # Clip the tiny negative variances produced by float cancellation.
        variance = max(0.0, second_moment - mean * mean)
        cv2 = variance / (mean * mean) if mean > 0 else 0.0
        return cls(mean=mean, second_moment=second_moment, variance=variance, cv2=cv2)


@dataclass(frozen=True)
class DelayBreakdown:
    """Expected per-symbol delay split into its three components (seconds)."""

    formation: float
    waiting: float
    service: float

    @property
    def total(self) -> float:
        return self.formation + self.waiting + self.service


@dataclass(frozen=True)
class StabilityReport:
    """Queue stability diagnosis for one parameter point.

    utilization            rho = E[service] / E[inter-arrival]
    is_stable              rho < 1
    min_channel_rate       smallest channel rate stabilizing this interval
    asymptotic_rate_bounds (low, high): below low no interval is stable for
                           an error-free channel, at or above high every
                           interval is
    """

    utilization: float
    is_stable: bool
    min_channel_rate: float
    asymptotic_rate_bounds: tuple[float, float]
