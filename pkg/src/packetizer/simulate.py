"""Discrete-event Monte-Carlo oracle for the analytical link model.

Generates Poisson symbol arrivals, bundles them into packets on the fixed
interval grid (skipping or padding empty intervals per mode), draws ARQ
transmission counts, and drives the FCFS queue through the Lindley
recursion w_n = max(0, w_{n-1} + s_{n-1} - tau_n).  Everything except the
serial Lindley recursion is vectorized.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, RetransmissionGuardError
from .model import log_packet_success_prob
from .params import Mode, Moments, SystemParams


@dataclass(frozen=True)
class SimConfig:
    """Replication settings.

    warmup_symbols = None means the default 10% of num_symbols is discarded
    before statistics are collected.
    """

    num_symbols: int
    warmup_symbols: int | None = None
    seed: int = 0
    max_retransmissions_guard: int = 10**6

    def __post_init__(self) -> None:
        if self.num_symbols < 1:
            raise ValueError("num_symbols must be >= 1")
        warmup = self.resolved_warmup
        if not 0 <= warmup < self.num_symbols:
            raise ValueError("warmup_symbols must be in [0, num_symbols)")
        if self.max_retransmissions_guard < 1:
            raise ValueError("max_retransmissions_guard must be >= 1")

    @property
    def resolved_warmup(self) -> int:
        if self.warmup_symbols is None:
            return self.num_symbols // 10
        return self.warmup_symbols


@dataclass(frozen=True)
class PacketRecord:
    """One packet event of a replication."""

    index: int
    formation_epoch: float
    interarrival: float
    interval_count: int
    symbol_count: int
    length_bits: float
    retransmissions: int
    service: float
    waiting: float


@dataclass
class PacketLog:
    """Struct-of-arrays trace of every packet in formation order."""

    formation_epoch: np.ndarray
    interarrival: np.ndarray
    interval_count: np.ndarray
    symbol_count: np.ndarray
    length_bits: np.ndarray
    retransmissions: np.ndarray
    service: np.ndarray
    waiting: np.ndarray
    warmup_packets: int = 0

    def __len__(self) -> int:
        return len(self.formation_epoch)

    def record(self, n: int) -> PacketRecord:
        return PacketRecord(
            index=n,
            formation_epoch=float(self.formation_epoch[n]),
            interarrival=float(self.interarrival[n]),
            interval_count=int(self.interval_count[n]),
            symbol_count=int(self.symbol_count[n]),
            length_bits=float(self.length_bits[n]),
            retransmissions=int(self.retransmissions[n]),
            service=float(self.service[n]),
            waiting=float(self.waiting[n]),
        )

    def tail(self, start: int) -> "PacketLog":
        return PacketLog(
            formation_epoch=self.formation_epoch[start:],
            interarrival=self.interarrival[start:],
            interval_count=self.interval_count[start:],
            symbol_count=self.symbol_count[start:],
            length_bits=self.length_bits[start:],
            retransmissions=self.retransmissions[start:],
            service=self.service[start:],
            waiting=self.waiting[start:],
        )


@dataclass
class SymbolLog:
    """Per-symbol delays; waiting and service are shared packet values."""

    arrival: np.ndarray
    formation_delay: np.ndarray
    waiting: np.ndarray
    service: np.ndarray
    total: np.ndarray
    packet_index: np.ndarray
    warmup_symbols: int = 0


@dataclass(frozen=True)
class SimulationResult:
    """Post-warmup sample statistics of one replication."""

    n_symbols: int
    n_packets: int
    mean_formation: float
    mean_waiting: float
    mean_service: float
    mean_total: float
    stderr_total: float
    mean_retransmissions: float
    empirical_utilization: float
    diverged: bool


# Waiting times this far above the mean service time, sustained over the
# final 10% of packets, mark a replication as divergent.
_DIVERGENCE_FACTOR = 1.0e4
_BATCH_COUNT = 20


def _draw_retransmissions(
    params: SystemParams,
    symbol_counts: np.ndarray,
    rng: np.random.Generator,
    guard: int,
) -> np.ndarray:
    """Geometric transmission counts via inverse transform, vectorized.

    P(r = j) = p (1-p)^(j-1) with p the packet success probability; the
    inverse transform 1 + floor(log(1-U)/log(1-p)) is exact for tiny p.
    """
    f = params.link_factors()
    log_success = math.log(f.header_success) + symbol_counts * math.log(
        f.symbol_success
    )
    fail = -np.expm1(log_success)
    r = np.ones(len(symbol_counts), dtype=np.int64)
    errored = fail > 0.0
    if errored.any():
        u = rng.random(int(errored.sum()))
        draws = 1 + np.floor(np.log1p(-u) / np.log(fail[errored]))
        r[errored] = draws.astype(np.int64)
    if (r >= guard).any():
        raise RetransmissionGuardError(
            f"a packet needed >= {guard} transmissions; "
            "parameters are far outside the stable regime"
        )
    return r


def _lindley_waits(service: np.ndarray, interarrival: np.ndarray) -> np.ndarray:
    s = service.tolist()
    tau = interarrival.tolist()
    waits = [0.0] * len(s)
    w = 0.0
    for n in range(1, len(s)):
        w = w + s[n - 1] - tau[n]
        if w < 0.0:
            w = 0.0
        waits[n] = w
    return np.asarray(waits)


def simulate(
    params: SystemParams, cfg: SimConfig
) -> tuple[SimulationResult, PacketLog, SymbolLog]:
    """Run one replication and return statistics plus full event logs."""
    rng = np.random.default_rng(cfg.seed)
    lam = params.arrival_rate
    t_int = params.interval
    f = params.link_factors()

    arrivals = np.cumsum(rng.exponential(1.0 / lam, cfg.num_symbols))
    interval_idx = np.floor(arrivals / t_int).astype(np.int64)

    if params.mode is Mode.EFFICIENT:
        occupied, packet_of_symbol, counts = np.unique(
            interval_idx, return_inverse=True, return_counts=True
        )
        symbol_counts = counts.astype(np.int64)
        epochs = (occupied + 1.0) * t_int
    else:
        n_intervals = int(interval_idx[-1]) + 1
        symbol_counts = np.bincount(interval_idx, minlength=n_intervals)
        epochs = (np.arange(n_intervals) + 1.0) * t_int
        packet_of_symbol = interval_idx

    interarrival = np.diff(epochs, prepend=0.0)
    interval_count = np.rint(interarrival / t_int).astype(np.int64)
    lengths = f.header_bits_eff + symbol_counts * f.symbol_bits_eff
    retrans = _draw_retransmissions(
        params, symbol_counts, rng, cfg.max_retransmissions_guard
    )
    service = retrans * lengths / params.channel_rate
    waits = _lindley_waits(service, interarrival)

    formation = epochs[packet_of_symbol] - arrivals
    waiting_sym = waits[packet_of_symbol]
    service_sym = service[packet_of_symbol]
    total = formation + waiting_sym + service_sym

    warmup = cfg.resolved_warmup
    first_packet = int(packet_of_symbol[warmup]) if warmup > 0 else 0

    packets = PacketLog(
        formation_epoch=epochs,
        interarrival=interarrival,
        interval_count=interval_count,
        symbol_count=symbol_counts,
        length_bits=lengths,
        retransmissions=retrans,
        service=service,
        waiting=waits,
        warmup_packets=first_packet,
    )
    symbols = SymbolLog(
        arrival=arrivals,
        formation_delay=formation,
        waiting=waiting_sym,
        service=service_sym,
        total=total,
        packet_index=packet_of_symbol,
        warmup_symbols=warmup,
    )
    result = _summarize(packets, symbols)
    return result, packets, symbols


def run_simulation(params: SystemParams, cfg: SimConfig) -> SimulationResult:
    """Run one replication and return only its sample statistics."""
    result, _, _ = simulate(params, cfg)
    return result


def _batch_stderr(values: np.ndarray) -> float:
    n = len(values)
    if n < _BATCH_COUNT:
        return math.nan
    per = n // _BATCH_COUNT
    trimmed = values[: per * _BATCH_COUNT]
    means = trimmed.reshape(_BATCH_COUNT, per).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(_BATCH_COUNT))


def _summarize(packets: PacketLog, symbols: SymbolLog) -> SimulationResult:
    kept_sym = slice(symbols.warmup_symbols, None)
    kept_pkt = slice(packets.warmup_packets, None)

    total = symbols.total[kept_sym]
    service = packets.service[kept_pkt]
    epochs = packets.formation_epoch[kept_pkt]
    span = epochs[-1] - epochs[0] + packets.interarrival[kept_pkt][0]

    # Divergence: waiting exceeds _DIVERGENCE_FACTOR * mean service over the
    # whole final 10% of packets.  An unstable queue has no stationary mean,
    # so this is flagged rather than raised to let sweeps chart the boundary.
    waits = packets.waiting[kept_pkt]
    tail = waits[int(0.9 * len(waits)):]
    threshold = _DIVERGENCE_FACTOR * float(service.mean())
    diverged = len(tail) > 0 and float(tail.min()) > threshold

    return SimulationResult(
        n_symbols=len(total),
        n_packets=len(service),
        mean_formation=float(symbols.formation_delay[kept_sym].mean()),
        mean_waiting=float(symbols.waiting[kept_sym].mean()),
        mean_service=float(symbols.service[kept_sym].mean()),
        mean_total=float(total.mean()),
        stderr_total=_batch_stderr(total),
        mean_retransmissions=float(packets.retransmissions[kept_pkt].mean()),
        empirical_utilization=float(service.sum() / span),
        diverged=diverged,
    )


def empirical_moments(packets: PacketLog) -> tuple[Moments, Moments]:
    """Sample moments of packet inter-arrival and service times.

    Requires at least 1000 records for the second moments to mean anything.
    """
    if len(packets) < 1000:
        raise InsufficientDataError(
            f"need >= 1000 packet records, got {len(packets)}"
        )

    def _moments(x: np.ndarray) -> Moments:
        return Moments.from_mean_second(float(x.mean()), float((x * x).mean()))

    return _moments(packets.interarrival), _moments(packets.service)


def kernel_step(params: SystemParams, w_prev: float, rng) -> float:
    """One transition of the embedded waiting-time Markov chain.

    Draws an inter-arrival (geometric multiple of T in efficient mode,
    constant T in slotted mode) and a service time from the service pmf,
    then applies the Lindley map.  Consumes uniforms from rng.random() in
    the order: inter-arrival (efficient mode only), symbol count, then the
    transmission count (only when the packet can fail), so a scripted stub
    generator can force any outcome.
    """
    if w_prev < 0:
        raise ValueError("w_prev must be nonnegative")
    mu = params.mean_symbols_per_interval
    t_int = params.interval
    f = params.link_factors()

    if params.mode is Mode.EFFICIENT:
        p0 = params.empty_interval_prob
        intervals = 1 + int(math.log1p(-rng.random()) / math.log(p0))
        tau = intervals * t_int
        k_start = 1
        norm = -math.expm1(-mu)
    else:
        tau = t_int
        k_start = 0
        norm = 1.0

    # Symbol count by cdf inversion over the (possibly zero-truncated) Poisson.
    u = rng.random()
    k = k_start
    pmf = math.exp(k_start * math.log(mu) - mu - math.lgamma(k_start + 1)) / norm
    cdf = pmf
    while cdf < u and k < 200 + 20 * mu:
        k += 1
        pmf *= mu / k
        cdf += pmf

    log_success = log_packet_success_prob(params, k)
    fail = -math.expm1(log_success)
    if fail > 0.0:
        r = 1 + int(math.log1p(-rng.random()) / math.log(fail))
    else:
        r = 1
    length = f.header_bits_eff + k * f.symbol_bits_eff
    service = r * length / params.channel_rate
    return max(0.0, w_prev + service - tau)


TRACE_COLUMNS = (
    "packet",
    "formation_epoch",
    "interarrival",
    "symbols",
    "length_bits",
    "transmissions",
    "service",
    "waiting",
)


def write_packet_trace(packets: PacketLog, path: str) -> None:
    """Write the per-packet event log as CSV with a fixed column order."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRACE_COLUMNS)
        for n in range(len(packets)):
            rec = packets.record(n)
            writer.writerow(
                [
                    n,
                    f"{rec.formation_epoch:.12g}",
                    f"{rec.interarrival:.12g}",
                    rec.symbol_count,
                    f"{rec.length_bits:.12g}",
                    rec.retransmissions,
                    f"{rec.service:.12g}",
                    f"{rec.waiting:.12g}",
                ]
            )
