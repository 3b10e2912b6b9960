"""Exception types shared across the package."""


class ColombeauError(Exception):
    """Base class for all computational errors raised by this package."""


class NotModerate(ColombeauError):
    """A net decays/grows faster than every power of the gauge."""


class GridMismatch(ColombeauError):
    """Sampled operands live on grids that share no usable epsilon points."""


class NotAUnit(ColombeauError):
    """Inversion was requested for a non-invertible generalized number."""


class IncompleteFamily(ColombeauError):
    """An interleaving family does not sum to one."""


class NotOrthogonal(ColombeauError):
    """Two idempotents in a family overlap."""


class IllConditioned(ColombeauError):
    """A linear solve exceeded the allowed condition number."""


class OutOfDomain(ColombeauError):
    """A generalized point leaves every compact exhaustion set."""


class OrderExceeded(ColombeauError):
    """A derivative was requested beyond the stored closure order."""


class QuadratureStall(ColombeauError):
    """Panel refinement failed to converge within the round budget."""


class MeshTooCoarse(ColombeauError):
    """A partition norm violates its admissibility bound."""


class DomainEscape(ColombeauError):
    """An operator image left the contraction domain."""


class NotContracting(ColombeauError):
    """Measured iteration rates exceeded the declared contraction factor."""


class UnsupportedShape(ColombeauError):
    """A region descriptor is outside the supported catalog."""


class CoverageFailure(ColombeauError):
    """Tail points escaped every covering ball of the support estimate."""


class EmptyOverlap(ColombeauError):
    """Two charts share no domain at the probed point."""


class OutsideChart(ColombeauError):
    """A point does not belong to the chart it was applied to."""


class ProbeNotOnLevelSet(ColombeauError):
    """A regular-value probe does not satisfy f(p) = a."""


class AtOrigin(ColombeauError):
    """The scale-exponent function is undefined where the norm is not a unit."""


class ExpressionError(ColombeauError):
    """An expression failed to parse; carries the offending position."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class ConfigError(ColombeauError):
    """A run configuration is invalid."""
