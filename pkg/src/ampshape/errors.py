"""Exception types shared by the shaping and link modules."""


class ShapingError(Exception):
    """Base class for all domain errors raised by this package."""


class CompositionMismatch(ShapingError):
    """Sequence does not have the composition required by the codebook."""


class RankOverflow(ShapingError):
    """Sequence is a valid codebook member but its rank is >= 2^k (unused)."""


class EnergyOverflow(ShapingError):
    """Sequence energy exceeds the sphere radius of the shaping set."""


class UnknownComposition(ShapingError):
    """Sequence composition is not one of the codebook leaves."""


class DeshapeFailure(ShapingError):
    """Decoded amplitude sequence falls outside the shaper codebook."""


class ConfigError(ShapingError):
    """Inconsistent or invalid configuration."""


class UnachievableRate(ShapingError):
    """Requested rate cannot be reached by the metric being inverted."""
