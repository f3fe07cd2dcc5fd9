"""Exception types shared across the package."""


class GrainkinError(Exception):
    """Base class for all grainkin errors."""


class NonpositiveDenominator(GrainkinError):
    """The denominator of the coupling weight Gamma is <= 0.

    This means the state left the regime where the self-consistent weight is
    well defined; any running integration must be aborted.
    """

    def __init__(self, num: float, den: float, message: str = ""):
        self.num = num
        self.den = den
        super().__init__(
            message or f"Gamma denominator nonpositive: num={num:.6e}, den={den:.6e}"
        )


class SingularProjection(GrainkinError):
    """The 2x2 system fixing the two initialization scale factors is singular
    or forces a nonpositive factor; the caller should resample the raw data."""


class NotConverged(GrainkinError):
    """A run ended at max_steps with residual above tolerance."""


class TooCloseToBoundary(GrainkinError):
    """An extrapolation stencil around a singular grid point leaves the grid."""


class EmptyWindow(GrainkinError):
    """A diagnostic window contains no usable classes."""


class IntervalTouchesSingularity(GrainkinError):
    """An ODE-oracle interval comes too close to an excluded point."""


class ConfigError(GrainkinError):
    """Invalid run configuration (bad flag values, bad config file, ...)."""
