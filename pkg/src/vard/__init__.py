"""Normalized ground states for confined p(x)-Laplacian problems."""
from .exponents import (
    AdmissibilityReport,
    ExponentError,
    ExponentField,
    check_admissibility,
    gaussian_exponent,
    make_class_P_exponent,
    make_constant_exponent,
    make_custom_exponent,
    make_inner_profile,
    make_radial_exponent,
)
from .functional import energy, energy_gradient, gn_ratio, mass
from .grid import Grid, ScalarField, build_grid, gradient, integrate
from .modular import ModularSpec, check_modular_norm_relations, luxemburg_norm, norm_X
from .pohozaev import pohozaev_terms, regularity_diagnostics, remainder_R
from .solver import NumericError, Problem, SolveConfig, SolveResult, minimize
from .thresholds import G, gaussian_bound_constants, threshold_c0, threshold_c1, trial_function

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityReport",
    "ExponentError",
    "ExponentField",
    "G",
    "Grid",
    "ModularSpec",
    "NumericError",
    "Problem",
    "ScalarField",
    "SolveConfig",
    "SolveResult",
    "build_grid",
    "check_admissibility",
    "check_modular_norm_relations",
    "energy",
    "energy_gradient",
    "gaussian_bound_constants",
    "gaussian_exponent",
    "gn_ratio",
    "gradient",
    "integrate",
    "luxemburg_norm",
    "make_class_P_exponent",
    "make_constant_exponent",
    "make_custom_exponent",
    "make_inner_profile",
    "make_radial_exponent",
    "mass",
    "minimize",
    "norm_X",
    "pohozaev_terms",
    "regularity_diagnostics",
    "remainder_R",
    "threshold_c0",
    "threshold_c1",
    "trial_function",
]
