"""Pattern sets, profiles, the pattern matrix and the matrix-chain decomposition."""
from .bounds import (
    bs_condition,
    explicit_growth_bound,
    explicit_growth_log2,
    exponent_c,
    h_bound,
    kappa_symbolic,
    nonadaptive_bound,
    nonadaptive_two_term,
    within_explicit_bound,
)
from .decomposition import DecompositionReport, decomposition_h, operator_norm, optimal_pivot
from .pattern_matrix import PatternMatrix, PatternMatrixReport, pattern_matrix, pattern_matrix_checks
from .patterns import OddPatternSet, intersection_profile, profile_count, profiles, xor_reduce
from .profiles import (
    PhaseAssignment,
    ProfileTable,
    g_profiles,
    h_profiles,
    l1_weight,
    profile_data,
    random_form,
    random_restriction,
    restricted_form,
)

__all__ = [
    "bs_condition",
    "explicit_growth_bound",
    "explicit_growth_log2",
    "exponent_c",
    "h_bound",
    "kappa_symbolic",
    "nonadaptive_bound",
    "nonadaptive_two_term",
    "within_explicit_bound",
    "DecompositionReport",
    "decomposition_h",
    "operator_norm",
    "optimal_pivot",
    "PatternMatrix",
    "PatternMatrixReport",
    "pattern_matrix",
    "pattern_matrix_checks",
    "OddPatternSet",
    "intersection_profile",
    "profile_count",
    "profiles",
    "xor_reduce",
    "PhaseAssignment",
    "ProfileTable",
    "g_profiles",
    "h_profiles",
    "l1_weight",
    "profile_data",
    "random_form",
    "random_restriction",
    "restricted_form",
]
