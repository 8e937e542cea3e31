"""Operator vessels: construction, transfer functions, tau functions and
Sturm-Liouville diagnostics."""
from .errors import (ArgumentError, ConditioningError, ConvergenceError, DiscretizationError,
                     DomainError, FamilyError, IntegrationError, IntervalError, PhaseUndefinedError,
                     PreconditionError, ResolventError, SingularityError, VesselError)
from .kernels import BACKEND
from .params import VesselParameters, family_parameters, sl_parameters
from .vessel import (Vessel, classify, diag_vessel, rank1_vessel, standard_construction,
                     vessel_residuals, zero_vessel)

__version__ = "0.1.0"

__all__ = ["ArgumentError", "ConditioningError", "ConvergenceError", "DiscretizationError",
           "DomainError", "FamilyError", "IntegrationError", "IntervalError", "PhaseUndefinedError",
           "PreconditionError", "ResolventError", "SingularityError", "VesselError", "BACKEND", "Vessel", "VesselParameters", "classify", "diag_vessel", "family_parameters",
           "rank1_vessel", "sl_parameters", "standard_construction", "vessel_residuals",
           "zero_vessel", "__version__"]
