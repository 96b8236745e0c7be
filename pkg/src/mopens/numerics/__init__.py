"""Quadrature, special functions, eigenvalues and Fredholm determinants."""

from ._backend import BACKEND
from .eigen import NonHermitianInput, check_hermitian, hermitian_eigenvalues
from .fredholm import SingularDiscretization, fredholm_det, nystrom_matrix
from .quadrature import (
    InvalidInterval,
    QuadratureRule,
    RuleKind,
    composite_legendre,
    gauss_hermite,
    gauss_legendre,
)
from .special import (
    DomainError,
    InvalidOrder,
    OutOfRange,
    airy_ai,
    airy_ai_array,
    bessel_i,
    log_bessel_i,
    log_gamma,
)

__all__ = [
    "BACKEND",
    "DomainError",
    "InvalidInterval",
    "InvalidOrder",
    "NonHermitianInput",
    "OutOfRange",
    "QuadratureRule",
    "RuleKind",
    "SingularDiscretization",
    "airy_ai",
    "airy_ai_array",
    "bessel_i",
    "check_hermitian",
    "composite_legendre",
    "fredholm_det",
    "gauss_hermite",
    "gauss_legendre",
    "hermitian_eigenvalues",
    "log_bessel_i",
    "log_gamma",
    "nystrom_matrix",
]
