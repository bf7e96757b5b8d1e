"""Exception hierarchy for vortexsheet.

Every exception carries the process exit code the command line maps it to.
"""


class VortexSheetError(Exception):
    """Base class for all vortexsheet errors."""

    exit_code = 2


class ValidationFailure(VortexSheetError):
    """Invalid parameters or configuration."""

    exit_code = 1


class ConfigError(ValidationFailure):
    """Configuration file missing or unreadable."""


class MachRangeError(ValidationFailure):
    """Mach number outside the range an operation accepts."""


class FrontBoundError(ValidationFailure):
    """Front value outside the regime where the flattening map is a diffeomorphism."""


class StepSizeError(ValidationFailure):
    """Time step violates the advective-acoustic stability margin."""


class ComputationFailure(VortexSheetError):
    """A numerical operation could not produce a trustworthy result."""

    exit_code = 2


class DegenerateBranchError(ComputationFailure):
    """Square-root radicand on the branch cut (boundary of the frequency set)."""


class DegenerateModeError(ComputationFailure):
    """Mode requested at a frequency where the vertical roots coincide."""


class NoGrowingRootError(ComputationFailure):
    """No growing root of the dispersion relation (M >= sqrt(2))."""


class JacobianViolation(ComputationFailure):
    """Flattening Jacobian fell below 1/3."""


class QuadratureFailure(ComputationFailure):
    """Band normalization not reproduced by the oracle quadrature."""


class InstabilityDetected(ComputationFailure):
    """Discrete norm grew faster than the analytic rate allows."""


class InsufficientData(ComputationFailure):
    """Too few samples for a fit."""


class InvariantSuiteFailure(VortexSheetError):
    """One or more invariant checks failed."""

    exit_code = 3

    def __init__(self, message: str, artifacts=()):
        super().__init__(message)
        self.artifacts = list(artifacts)
