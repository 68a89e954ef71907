"""Elliptic C_n face-model weights, their fusion, commuting difference operators
and the invariant level-one theta functions, with numerical verification."""

from .errors import (
    AdmissibilityError,
    BranchWarning,
    ConfigError,
    ConvergenceError,
    EllipticFaceError,
    PoleError,
    ProjectionError,
    UnlistedPatternError,
)
from .theta import ModelParams, phi, quasi_periodicity_defect, theta, theta_prime0, three_term_defect
from .weights import FaceSquare, Residual, face_weight, unit_steps, w11, ybe11_defect
from .fusion import FusionEngine, PathVector, fused_weight_composed, fused_weight_explicit, fusion_projector
from .operators import DifferenceOperator, apply, build_Md, build_Mtilde
from .characters import ShiftOperator, ThetaCharacter, thw_basis
from .gauge import gauge_weight, jmo_sign_table, jmo_weight_direct
from .cli import SuiteConfig, SuiteReport, print_tables, run_suite

__all__ = [
    "AdmissibilityError", "BranchWarning", "ConfigError", "ConvergenceError", "EllipticFaceError",
    "PoleError", "ProjectionError", "UnlistedPatternError",
    "ModelParams", "phi", "quasi_periodicity_defect", "theta", "theta_prime0", "three_term_defect",
    "FaceSquare", "Residual", "face_weight", "unit_steps", "w11", "ybe11_defect",
    "FusionEngine", "PathVector", "fused_weight_composed", "fused_weight_explicit", "fusion_projector",
    "DifferenceOperator", "apply", "build_Md", "build_Mtilde",
    "ShiftOperator", "ThetaCharacter", "thw_basis",
    "gauge_weight", "jmo_sign_table", "jmo_weight_direct",
    "SuiteConfig", "SuiteReport", "print_tables", "run_suite",
]
