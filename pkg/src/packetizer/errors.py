"""Exception types shared across the package."""


class PacketizationError(Exception):
    """Base class for all errors raised by this package."""


class InstabilityError(PacketizationError):
    """The queue is unstable (utilization >= 1) for the given parameters."""


class EmptyStableRangeError(PacketizationError):
    """No packetization interval stabilizes the queue."""


class InfeasibleConstraintError(PacketizationError):
    """The delay bound is below the minimum achievable expected delay."""


class RetransmissionGuardError(PacketizationError):
    """A simulated packet hit the retransmission safety cap."""


class InsufficientDataError(PacketizationError):
    """Too few records to form meaningful sample statistics."""
