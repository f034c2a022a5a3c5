"""p-adic Gibbs measures of the three-state Potts model with competing
(nearest-neighbour, next-nearest-neighbour) interactions on the binary
Cayley tree."""

from .analysis import Verdict, classify, domain_check, reproduce_paper, uniqueness_certificate
from .model import BoundaryField, ModelParams, check_compatibility, measure, recursion_step, ti_system
from .padic import (
    DomainError,
    PadicNumber,
    PadicVec2,
    PrecisionError,
    exp_p,
    log_p,
    make,
    norm,
)
from .poly import InconsistencyError, PadicMPoly, PadicPoly
from .solver import BallSpec, SolutionCertificate, digit_solve, fixed_point, hensel_lift
from .tree import TreeSlice, Vertex, build

__version__ = "0.1.0"

__all__ = [
    "BallSpec",
    "BoundaryField",
    "DomainError",
    "InconsistencyError",
    "ModelParams",
    "PadicMPoly",
    "PadicNumber",
    "PadicPoly",
    "PadicVec2",
    "PrecisionError",
    "SolutionCertificate",
    "TreeSlice",
    "Verdict",
    "Vertex",
    "build",
    "check_compatibility",
    "classify",
    "digit_solve",
    "domain_check",
    "exp_p",
    "fixed_point",
    "hensel_lift",
    "log_p",
    "make",
    "measure",
    "norm",
    "recursion_step",
    "reproduce_paper",
    "ti_system",
    "uniqueness_certificate",
]
