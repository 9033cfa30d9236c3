"""Exception and warning types shared across the package."""


class ThermodiffError(Exception):
    """Base class for all package-specific errors."""


class DomainError(ThermodiffError):
    """A field value lies outside the admissible range of a formula
    (e.g. density at or above the ceiling density in the full model)."""


class PositivityError(ThermodiffError):
    """Density or temperature left the positive cone during time evolution.

    Attributes
    ----------
    node : int
        Index of the first offending grid node.
    time : float
        Simulation time at which the violation was detected.
    """

    def __init__(self, message, node=None, time=None):
        super().__init__(message)
        self.node = node
        self.time = time


class StiffnessError(ThermodiffError):
    """The adaptive step size fell below dt_min without making progress."""

    def __init__(self, message, time=None, dt=None):
        super().__init__(message)
        self.time = time
        self.dt = dt


class SingularProfileError(ThermodiffError):
    """A temperature profile has a vanishing or sign-changing derivative,
    so the no-flow relations for rho and V are singular."""


class NoBracketError(ThermodiffError):
    """The shooting scan could not bracket a solution of the two-point
    boundary value problem."""


class SingularShotError(ThermodiffError):
    """A shooting trajectory hit a non-positive temperature."""


class IncompleteSpectrumError(ThermodiffError):
    """Fewer eigenvalue roots were found than requested.

    Attributes
    ----------
    found : int
        Number of roots located below the scan limit.
    """

    def __init__(self, message, found=0):
        super().__init__(message)
        self.found = found


class ConfigError(ThermodiffError):
    """A run configuration failed validation."""


class NonVanishingFlowWarning(UserWarning):
    """Entropy production was evaluated in a state with a material current
    that is not negligible, so the omitted material-force term may matter."""
