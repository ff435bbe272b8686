"""Exception taxonomy shared by the library and the command line front end.

Every error carries an ``exitcode`` so the CLI can map failures onto its
exit-code contract without inspecting types one by one:

    2  configuration / input validation problems
    3  numerical failures during construction or propagation
    4  fit failures (non-convergence, degenerate data)
"""


class EngineError(Exception):
    """Base class for all errors raised by this package."""

    exitcode = 1


class ConfigError(EngineError):
    """Invalid configuration, parameters, or input files."""

    exitcode = 2


class PacketTooWideError(ConfigError):
    """Initial packet carries non-negligible mass near the grid boundary."""


class DegenerateModeError(ConfigError):
    """Plane-wave mode parameters hit a removable or genuine singularity."""


class SingularSampleError(ConfigError):
    """Momentum sample sits on a jump of the projection coefficients."""


class NumericError(EngineError):
    """Numerical failure: lost accuracy, norm blow-up, boundary leakage."""

    exitcode = 3


class QuadratureError(NumericError):
    """Spectral quadrature failed its self-consistency check at t = 0."""


class BoundaryLeakError(NumericError):
    """Propagated density reached the edge of the computational box."""


class NormBlowupError(NumericError):
    """A propagation step grew the norm beyond the allowed tolerance."""


class ApproximationDomainError(NumericError):
    """Requested closed-form result outside its domain of validity."""


class NormalizationError(NumericError):
    """Density profile is not normalized to unit total probability."""


class SupportOverflowError(NumericError):
    """Rescaled density no longer fits inside the grid."""


class ZeroFunctionalError(NumericError):
    """Localization functional vanished; width is undefined."""


class FitError(EngineError):
    """Base class for power-law fit failures."""

    exitcode = 4


class FitConvergenceError(FitError):
    """No start of the damped least-squares iteration converged."""


class DegenerateDataError(FitError):
    """Fit data carry no usable signal (constant widths, zero variance)."""
