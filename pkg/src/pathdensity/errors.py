"""Exception types shared across the package."""


class PathDensityError(Exception):
    """Base class for all package-specific errors."""


class AnalyticModeOnlyError(PathDensityError):
    """Raised when a pointwise operation is attempted on an exact-delta object.

    Exact point-mass kernels have no finite pointwise density; they are
    handled analytically by the density layer, never evaluated.
    """


class DivergentObservableError(PathDensityError):
    """Raised instead of reporting a number whose estimator cannot converge.

    The sin-squared kernel has divergent polynomial moments, so moment
    observables require the truncated variant.
    """


class QuadratureError(PathDensityError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved_tolerance: float):
        super().__init__(f"{message} (achieved tolerance {achieved_tolerance:.3e})")
        self.achieved_tolerance = achieved_tolerance


class SingularConstraintError(PathDensityError):
    """The (position, velocity) constraint map of a system is not invertible."""


class LatticeBudgetError(PathDensityError):
    """Raised when a lattice enumeration would exceed the path budget."""


class DegenerateWeightsError(PathDensityError):
    """All importance weights vanished; the constraint is incompatible."""


class SamplerError(PathDensityError):
    """Chain initialization or step-size failure in the Metropolis sampler."""


class ConfigError(PathDensityError):
    """A run configuration failed schema validation."""
