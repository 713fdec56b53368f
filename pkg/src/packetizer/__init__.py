"""Delay- and energy-optimal packetization intervals for a Poisson-fed ARQ link.

A closed-form queueing model of time-based symbol bundling over a noisy
single-hop channel with FCFS queueing and stop-and-wait ARQ, an
independent Monte-Carlo simulator to validate it, and optimizers for the
delay-minimal and energy-minimal packetization interval.
"""

from .energy import (
    Binding,
    EnergyResult,
    ecr,
    feasible_delay_window,
    minimize_ecr_in_window,
    optimize_energy_under_delay,
    unconstrained_ecr_minimizer,
)
from .errors import (
    EmptyStableRangeError,
    InfeasibleConstraintError,
    InstabilityError,
    InsufficientDataError,
    PacketizationError,
    RetransmissionGuardError,
)
from .model import (
    approx_delay_large_mu,
    approx_delay_small_mu,
    effective_length_and_per,
    expected_delay,
    expected_retransmissions,
    formation_delay_mean,
    interarrival_moments,
    log_packet_success_prob,
    packet_length_pmf,
    service_moments,
    service_pmf,
    stability_report,
    waiting_time_kingman,
)
from .optimize import (
    OptimizationResult,
    SearchMethod,
    StableRange,
    optimal_interval,
    stable_interval_range,
)
from .params import (
    CodingProfile,
    DelayBreakdown,
    Mode,
    Moments,
    StabilityReport,
    SystemParams,
)
from .simulate import (
    PacketLog,
    PacketRecord,
    SimConfig,
    SimulationResult,
    SymbolLog,
    empirical_moments,
    kernel_step,
    run_simulation,
    simulate,
    write_packet_trace,
)
from .special import (
    EULER_GAMMA,
    StirlingTable,
    exponential_integral,
    poisson_power_moment,
    stirling2,
    stirling_table,
    zero_deleted_step_expectation,
    zero_truncated_inverse_moment,
)

__version__ = "0.1.0"

__all__ = [
    "Binding",
    "CodingProfile",
    "DelayBreakdown",
    "EULER_GAMMA",
    "EmptyStableRangeError",
    "EnergyResult",
    "InfeasibleConstraintError",
    "InstabilityError",
    "InsufficientDataError",
    "Mode",
    "Moments",
    "OptimizationResult",
    "PacketLog",
    "PacketRecord",
    "PacketizationError",
    "RetransmissionGuardError",
    "SearchMethod",
    "SimConfig",
    "SimulationResult",
    "StabilityReport",
    "StableRange",
    "StirlingTable",
    "SymbolLog",
    "SystemParams",
    "approx_delay_large_mu",
    "approx_delay_small_mu",
    "ecr",
    "effective_length_and_per",
    "empirical_moments",
    "expected_delay",
    "expected_retransmissions",
    "exponential_integral",
    "feasible_delay_window",
    "formation_delay_mean",
    "interarrival_moments",
    "kernel_step",
    "log_packet_success_prob",
    "minimize_ecr_in_window",
    "optimal_interval",
    "optimize_energy_under_delay",
    "packet_length_pmf",
    "poisson_power_moment",
    "run_simulation",
    "service_moments",
    "service_pmf",
    "simulate",
    "stability_report",
    "stable_interval_range",
    "stirling2",
    "stirling_table",
    "unconstrained_ecr_minimizer",
    "waiting_time_kingman",
    "write_packet_trace",
    "zero_deleted_step_expectation",
    "zero_truncated_inverse_moment",
]
