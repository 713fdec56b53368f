import math

from packetizer import Mode, SystemParams


def symbols_for_packets(params: SystemParams, n_packets: int, slack: float = 1.25) -> int:
    """Symbol count that yields at least n_packets post-warmup packets."""
    mu = params.mean_symbols_per_interval
    if params.mode is Mode.EFFICIENT:
        per_packet = mu / -math.expm1(-mu)
    else:
        per_packet = mu
    return max(int(n_packets * per_packet * slack) + 2000, 5000)
