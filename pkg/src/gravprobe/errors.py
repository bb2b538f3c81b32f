"""Exception and warning types shared across the package."""


class GravProbeError(Exception):
    """Base class for every error raised by gravprobe."""


class BasisMismatch(GravProbeError, ValueError):
    pass


class DegenerateSuperposition(GravProbeError, ValueError):
    pass


class DegenerateCouplingError(GravProbeError):
    """The perturbation couples degenerate levels that were not diagonalized first.

    Run :func:`gravprobe.perturb.degenerate_good_basis` on the offending
    subspace before asking for a perturbation ket.
    """


class NotDegenerateError(GravProbeError, ValueError):
    pass


class InvalidDistribution(GravProbeError, ValueError):
    pass


class NoInformationError(GravProbeError):
    """Every admissible probe carries zero Fisher information."""


class SingularOutcomeError(GravProbeError, ArithmeticError):
    pass


class NumericalInconsistencyError(GravProbeError, ArithmeticError):
    pass


class PhaseUndefinedError(GravProbeError, ValueError):
    pass


class GridResolutionError(GravProbeError, ArithmeticError):
    """A discretized quantity failed its resolution-doubling convergence test."""


class TruncationError(GravProbeError, ArithmeticError):
    pass


class UnsupportedProbe(GravProbeError, ValueError):
    pass


class UnsupportedDiscretization(GravProbeError, ValueError):
    pass


class ConfigError(GravProbeError, ValueError):
    pass


class NonPerturbativeWarning(UserWarning):
    """gamma times the perturbation-ket norm left the first-order regime."""
