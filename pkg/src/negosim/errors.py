"""Exception types shared across the simulator."""


class NegosimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(NegosimError):
    """A configuration object violates its own invariants."""


class GenerationError(NegosimError):
    """Scenario generation was asked for something impossible."""


class ScenarioFormatError(NegosimError):
    """A scenario file failed to parse or validate.

    The message carries the offending field path (e.g.
    ``agents[1].constraints[3].bounds[2]``) so broken files can be fixed
    without a debugger.
    """


class CapabilityError(NegosimError):
    """The request exceeds a hard capability limit (e.g. exhaustive
    enumeration over a domain larger than the supported cap)."""


class OfferDomainError(NegosimError):
    """An offer has the wrong length or values outside the issue domain."""


class DeadlineExpiredError(NegosimError):
    """A demanded-utility band was requested for a turn past the deadline."""


class ProtocolViolationError(NegosimError):
    """An agent emitted a message the protocol forbids.

    ``side`` identifies the offender ("a" = initiator, "b" = responder).
    """

    def __init__(self, side: str, reason: str):
        super().__init__(f"side {side!r}: {reason}")
        self.side = side
        self.reason = reason
