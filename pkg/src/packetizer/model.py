"""Closed-form link model: distributions, moments, stability and delay.

Symbols arrive as a Poisson stream and are bundled once per interval T into
packets of length H + kN bits (k symbols plus a header).  Packets queue
FCFS and are retransmitted until error-free, so the per-packet service time
is r * l / R with r geometric in the packet success probability.  The
expected per-symbol delay decomposes into

    E[d] = E[formation] + E[waiting] + E[service]
         = T/2 + Kingman(G/G/1) + E[s],

all available in closed form as functions of T.
"""

from __future__ import annotations

import math

from .errors import InstabilityError
from .params import DelayBreakdown, Mode, Moments, StabilityReport, SystemParams

_EXP_LIMIT = 709.0


def packet_length_pmf(params: SystemParams, k: int) -> float:
    """Probability that a packet carries exactly k symbols.

    Efficient mode: zero-truncated Poisson over k >= 1 (empty intervals
    produce no packet).  Slotted mode: plain Poisson over k >= 0.
    """
    mu = params.mean_symbols_per_interval
    if params.mode is Mode.EFFICIENT:
        if k < 1:
            raise ValueError("efficient mode packets carry at least one symbol")
        log_norm = math.log(-math.expm1(-mu))
    else:
        if k < 0:
            raise ValueError("symbol count must be nonnegative")
        log_norm = 0.0
    log_p = k * math.log(mu) - mu - math.lgamma(k + 1) - log_norm
    return math.exp(log_p)


def log_packet_success_prob(params: SystemParams, k: int) -> float:
    """log of the probability that a k-symbol packet survives one transmission."""
    f = params.link_factors()
    if f.header_success == 0.0 or (k > 0 and f.symbol_success == 0.0):
        return -math.inf
    return math.log(f.header_success) + k * math.log(f.symbol_success)


def effective_length_and_per(params: SystemParams, k: int) -> tuple[float, float]:
    """Channel bits and packet error probability of a k-symbol packet.

    Uncoded: l = H + kN and per = 1 - alpha^l.  With coding, payload and
    header bits are expanded by their code rates and each part survives
    with its own residual BER; the identity profile reproduces the uncoded
    values exactly.
    """
    if k < 0:
        raise ValueError("symbol count must be nonnegative")
    f = params.link_factors()
    length = f.header_bits_eff + k * f.symbol_bits_eff
    per = -math.expm1(log_packet_success_prob(params, k))
    return length, per


def expected_retransmissions(params: SystemParams, length_bits: float) -> float:
    """Mean number of transmissions of an l-bit packet, alpha^(-l).

    Geometric mean 1/p with per-transmission success p = alpha^l; equals 1
    on an error-free channel.
    """
    if length_bits <= 0:
        raise ValueError("length_bits must be positive")
    alpha = params.bit_success_prob
    exponent = -length_bits * math.log(alpha)
    if exponent > _EXP_LIMIT:
        raise OverflowError(
            f"expected retransmissions alpha^(-l) overflows for l = {length_bits:.6g}"
        )
    return math.exp(exponent)


def interarrival_moments(params: SystemParams) -> Moments:
    """Moments of the packet inter-arrival time.

    Slotted mode is deterministic (mean T, zero variance).  Efficient mode
    skips empty intervals, so the inter-arrival is T times a geometric
    count with failure probability P0 = exp(-mu); its squared coefficient
    of variation is exactly P0.
    """
    t = params.interval
    if params.mode is Mode.SLOTTED:
        return Moments.from_mean_second(t, t * t)
    p0 = params.empty_interval_prob
    live = -math.expm1(-params.mean_symbols_per_interval)  # 1 - P0
    mean = t / live
    second = t * t * (1.0 + p0) / (live * live)
    return Moments.from_mean_second(mean, second)


def service_pmf(params: SystemParams, r: int, k: int) -> float:
    """Probability of the service-time atom s = r * l(k) / R.

    Joint mass of "packet carries k symbols" and "takes r transmissions";
    conditioned on k the transmission count is geometric, across k the
    weights are (possibly zero-truncated) Poisson, which interlaces into
    the comb-shaped service pmf.
    """
    if r < 1:
        raise ValueError("transmission count starts at 1")
    p_k = packet_length_pmf(params, k)
    log_success = log_packet_success_prob(params, k)
    per = -math.expm1(log_success)
    if per == 0.0:
        return p_k if r == 1 else 0.0
    geo = math.exp(log_success + (r - 1) * math.log(per))
    return geo * p_k


def _weighted_quadratic(h_eff: float, n_eff: float, y: float) -> float:
    # E[(h(k) H_eff + k N_eff)^2 / z^k] / e^{mu(1/z - 1)} terms with y = mu/z,
    # for the zero-step part only (the h(k)^2 piece is added by the caller).
    return 2.0 * h_eff * n_eff * y + n_eff * n_eff * (y + y * y)


def service_moments(params: SystemParams) -> Moments:
    """Closed-form first two moments of the per-packet service time.

    Derived from E[k^n / z^k] identities with z the per-symbol success
    probability; exponential factors are assembled from net exponents so
    moderate mu / alpha^(2N) combinations stay inside float64 range.
    """
    mu = params.mean_symbols_per_interval
    rate = params.channel_rate
    f = params.link_factors()
    n_eff, h_eff = f.symbol_bits_eff, f.header_bits_eff
    a_h, zeta = f.header_success, f.symbol_success

    y1 = mu / zeta
    y2 = mu / (zeta * zeta)
    x1 = y1 - mu  # net exponent of e^{-mu} e^{mu/z}
    x2 = y2 - mu
    log_a_h = math.log(a_h)
    if x2 - 2.0 * log_a_h > _EXP_LIMIT:
        raise OverflowError(
            "service moments overflow: mu / symbol_success^2 = "
            f"{y2:.6g} is beyond float64 range for these parameters"
        )
    e1 = math.exp(x1)
    e2 = math.exp(x2)
    em = math.exp(-mu)

    if params.mode is Mode.EFFICIENT:
        live = -math.expm1(-mu)  # 1 - e^{-mu}
        first = (h_eff * (e1 - em) + n_eff * y1 * e1) / (rate * a_h * live)
        q1 = h_eff * h_eff * (e1 - em) + _weighted_quadratic(h_eff, n_eff, y1) * e1
        q2 = h_eff * h_eff * (e2 - em) + _weighted_quadratic(h_eff, n_eff, y2) * e2
        second = (2.0 * q2 / (a_h * a_h) - q1 / a_h) / (rate * rate * live)
    else:
        first = (h_eff + n_eff * y1) * e1 / (rate * a_h)
        q1 = (h_eff * h_eff + _weighted_quadratic(h_eff, n_eff, y1)) * e1
        q2 = (h_eff * h_eff + _weighted_quadratic(h_eff, n_eff, y2)) * e2
        second = (2.0 * q2 / (a_h * a_h) - q1 / a_h) / (rate * rate)

    if not (math.isfinite(first) and math.isfinite(second)):
        raise OverflowError("service moments overflow for these parameters")
    return Moments.from_mean_second(first, second)


def formation_delay_mean(params: SystemParams) -> float:
    """Expected per-symbol packet formation delay, T/2 in both modes.

    Conditioned on its interval, each symbol arrival is uniform over the
    interval, so its distance to the interval end averages to T/2.
    """
    return params.interval / 2.0


def _utilization(params: SystemParams) -> float:
    return service_moments(params).mean / interarrival_moments(params).mean


def waiting_time_kingman(params: SystemParams) -> float:
    """Kingman G/G/1 approximation of the mean FCFS waiting time.

    E[w] ~= rho/(1-rho) * E[s] * (C^2[s] + C^2[tau]) / 2 with C^2[tau] =
    exp(-mu) in efficient mode and 0 in slotted mode.  Raises
    InstabilityError when rho >= 1.
    """
    service = service_moments(params)
    arrival = interarrival_moments(params)
    rho = service.mean / arrival.mean
    if rho >= 1.0:
        raise InstabilityError(
            f"utilization {rho:.6g} >= 1 at interval {params.interval:.6g}; "
            f"channel rate of at least {rho * params.channel_rate:.6g} bit/s needed"
        )
    return rho / (1.0 - rho) * service.mean * (service.cv2 + arrival.cv2) / 2.0


def expected_delay(params: SystemParams) -> DelayBreakdown:
    """Expected per-symbol delay, split into formation/waiting/service."""
    return DelayBreakdown(
        formation=formation_delay_mean(params),
        waiting=waiting_time_kingman(params),
        service=service_moments(params).mean,
    )


def stability_report(params: SystemParams) -> StabilityReport:
    """Utilization, stability verdict and channel-rate requirements.

    The minimum stabilizing channel rate for the given interval is rho * R
    (service time scales as 1/R).  The asymptotic bounds bracket the
    error-free system: below symbol-rate * symbol-bits no interval is
    stable, at or above the same with header bits included every interval
    is.
    """
    f = params.link_factors()
    lam = params.arrival_rate
    bounds = (f.symbol_bits_eff * lam, (f.symbol_bits_eff + f.header_bits_eff) * lam)
    try:
        rho = _utilization(params)
    except OverflowError:
        return StabilityReport(
            utilization=math.inf,
            is_stable=False,
            min_channel_rate=math.inf,
            asymptotic_rate_bounds=bounds,
        )
    return StabilityReport(
        utilization=rho,
        is_stable=rho < 1.0,
        min_channel_rate=rho * params.channel_rate,
        asymptotic_rate_bounds=bounds,
    )


def approx_delay_large_mu(params: SystemParams) -> float:
    """Large-mu, near-error-free approximation of the expected delay.

    Keeps the dominant exp(mu N beta) retransmission growth and drops the
    vanishing empty-interval corrections; intended for mu >> 1 with alpha
    near 1 (uncoded).
    """
    n = params.symbol_bits
    h = params.header_bits
    mu = params.mean_symbols_per_interval
    t = params.interval
    rate = params.channel_rate
    alpha = params.bit_success_prob
    beta = params.bit_error_prob

    growth = mu * n * beta
    if growth > _EXP_LIMIT:
        raise OverflowError("retransmission growth factor overflows")
    loaded = n * mu * math.exp(growth) / (rate * alpha ** (h + n))
    denom = 2.0 * t * rate * alpha ** (h + n) - 2.0 * n * mu * math.exp(growth)
    if denom <= 0.0:
        raise InstabilityError(
            "large-mu approximation denominator nonpositive (queue unstable)"
        )
    waiting_factor = (1.0 + 4.0 * n * beta) * n * mu * math.exp(growth) / denom
    return loaded * (waiting_factor + 1.0) + t / 2.0


def approx_delay_small_mu(params: SystemParams) -> float:
    """Small-mu, near-error-free approximation of the expected delay.

    Packets shrink to single symbols of H + N bits and the packet stream
    approaches the Poisson symbol stream; the formation term is taken as T
    (the T/2 (1 + exp(-mu)) small-mu variant).  Requires the denominator
    R alpha^H - lambda (N+H) exp(-mu) to stay positive.
    """
    n = params.symbol_bits
    h = params.header_bits
    mu = params.mean_symbols_per_interval
    lam = params.arrival_rate
    rate = params.channel_rate
    alpha = params.bit_success_prob

    single = (n + h) * math.exp(-mu) / (rate * alpha**h)
    denom = rate * alpha**h - lam * (n + h) * math.exp(-mu)
    if denom <= 0.0:
        raise InstabilityError(
            "small-mu approximation denominator nonpositive; requires "
            "channel rate above (N+H) * arrival_rate"
        )
    return single * ((n + h) * math.exp(-mu) / (2.0 * denom) + 1.0) + params.interval
