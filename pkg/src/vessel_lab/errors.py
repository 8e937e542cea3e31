"""Exception hierarchy shared by every module of the package."""


class VesselError(Exception):
    """Base class for all errors raised by vessel_lab."""


class ArgumentError(VesselError, ValueError):
    pass


class IntegrationError(VesselError):
    pass


class SingularityError(VesselError):
    """A matrix that must be inverted is singular within tolerance."""

    def __init__(self, message, min_pivot=None):
        super().__init__(message)
        self.min_pivot = min_pivot


class DomainError(VesselError, ValueError):
    pass


class PreconditionError(VesselError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ResolventError(SingularityError):
    """lambda is too close to the spectrum of the main operator."""


class IntervalError(VesselError):
    """The state operator is not invertible at the requested point."""


class FamilyError(VesselError):
    pass


class ConvergenceError(VesselError):
    def __init__(self, message, last_delta=None):
        super().__init__(message)
        self.last_delta = last_delta


class DiscretizationError(VesselError):
    pass


class ConditioningError(VesselError):
    def __init__(self, message, sigma_min=None):
        super().__init__(message)
        self.sigma_min = sigma_min


class PhaseUndefinedError(VesselError):
    pass
