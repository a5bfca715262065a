"""Exception types shared across the package."""


class NodalPeaksError(Exception):
    """Base class for all package errors."""


class InvalidParam(NodalPeaksError):
    """A numeric argument is outside its admissible range."""


class NonConvergence(NodalPeaksError):
    """An iterative procedure exhausted its budget without meeting tolerance."""


class PoorFit(NodalPeaksError):
    """A least-squares fit residual exceeded its tolerance."""


class SingularBeta(NodalPeaksError):
    """Coupling beta hits the amplitude-formula singularity beta^2 = mu1*mu2."""


class RegimeMismatch(NodalPeaksError):
    """Operation requires synchronized amplitudes that the regime lacks."""


class BoxTooSmall(NodalPeaksError):
    """Peak configuration does not fit in the grid box with the required margin."""


class ResolutionTooCoarse(NodalPeaksError):
    """Grid spacing too large relative to the peak width."""


class TooClose(NodalPeaksError):
    """Peak separation below the asymptotic-regime threshold."""


class NoInteriorMin(NodalPeaksError):
    """Reduced-model minimizer sits on the search-interval boundary."""


class DidNotConverge(NodalPeaksError):
    """Newton iteration stopped before reaching tolerance."""


class LinearSolveStall(NodalPeaksError):
    """Inner Krylov solve made no progress."""


class GridMismatch(NodalPeaksError):
    """Two fields expected on the same grid differ in shape or extent."""


class ConfigInvalid(NodalPeaksError):
    """Experiment configuration violates a hypothesis of the target regime."""
