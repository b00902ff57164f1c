"""Exception hierarchy."""


class NoiseCommError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(NoiseCommError, ValueError):
    pass


class NonHermitianError(NoiseCommError, ValueError):
    pass


class NonNormalError(NoiseCommError, ValueError):
    pass


class NotAProjectionError(NoiseCommError, ValueError):
    pass


class EmptyInputError(NoiseCommError, ValueError):
    pass


class InjectivityError(NoiseCommError, ValueError):
    """exp(i.) identifies two eigenvalues of an operator (they differ by 2*pi*k)."""


class ParameterError(NoiseCommError, ValueError):
    pass


class ChannelSpecError(NoiseCommError, ValueError):
    """Malformed channel spec file."""


class NonUnitalChannelError(NoiseCommError, ValueError):
    """The structure pipeline needs a unital, trace-preserving channel."""

    def __init__(self, message=None):
        super().__init__(
            message
            or "channel is not unital and trace-preserving; the fixed points no longer "
            "equal the noise commutant. Build a unital channel from normal noise "
            "operators with noisecomm.channels.unitize() and analyze that instead."
        )


class NotInSpanError(NoiseCommError, ValueError):
    """An operator expected to lie in an operator span does not."""


class NotSelfAdjointSpanError(NoiseCommError, ValueError):
    """The span is not closed under the adjoint."""


class StructureError(NoiseCommError, RuntimeError):
    """Internal consistency check of the decomposition failed."""
