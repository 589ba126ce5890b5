"""Integrate Lie algebra representations to local group representations through
chart factorizations and Baker-Campbell-Hausdorff arithmetic, with numerical
certification of every identity involved."""

__version__ = "0.1.0"

from .algebra import Decomposition, LieAlgebra, adjoint, bracket, exp_ad, validate
from .bch import BchConfig, bch, bch_differential_at_zero_right, bch_multi
from .catalog import CatalogEntry, get_entry, load_catalog
from .errors import (BchDomainWarning, ChartOutOfRange, InvalidArgument, LieIntegrateError, NumericFailure,
                     PreconditionFailure)
from .factorization import FactorizedPath, NewtonConfig, factorize
from .integrator import LocalRepresentation, multiplicativity_residual, ode_residual, pi, uniqueness_check
from .logderiv import SmoothPath, log_derivative, log_derivative_by_definition
from .report import CheckRecord, VerificationReport
from .representation import Representation, apply, exp_op

__all__ = [
    "BchConfig", "BchDomainWarning", "CatalogEntry", "ChartOutOfRange", "CheckRecord", "Decomposition",
    "FactorizedPath", "InvalidArgument", "LieAlgebra", "LieIntegrateError", "LocalRepresentation",
    "NewtonConfig", "NumericFailure", "PreconditionFailure", "Representation", "SmoothPath",
    "VerificationReport", "adjoint", "apply", "bch", "bch_differential_at_zero_right", "bch_multi", "bracket",
    "exp_ad", "exp_op", "factorize", "get_entry", "load_catalog", "log_derivative",
    "log_derivative_by_definition", "multiplicativity_residual", "ode_residual", "pi", "uniqueness_check",
    "validate",
]
