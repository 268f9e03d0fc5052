"""Bilinear saddle points over constrained sets of density matrices."""

from .entropy import closest_separable, fit_separable, ree_bound, ree_upper, rel_entropy, von_neumann
from .hierarchy import (CollapseReport, NestedResult, ReducedProgram, check_collapse_structure,
                        level_parameters, purified_net, reduced_program, solve_nested_level3)
from .sets import (FeasibleSetSpec, SetKind, consistent_set, ent_bounded_set, full_set,
                   parse_set_spec, separable_set)
from .solvers import Certificate, SaddleResult, mmw_level2, solve_level2, solve_reduced
from .states import (DensityMatrix, Observable, is_ppt, matrix_from_json, matrix_to_json,
                     partial_trace, partial_transpose, random_observable, random_state)

__all__ = [
    "Certificate", "CollapseReport", "DensityMatrix", "FeasibleSetSpec", "NestedResult",
    "Observable", "ReducedProgram", "SaddleResult", "SetKind",
    "check_collapse_structure", "closest_separable", "consistent_set", "ent_bounded_set",
    "fit_separable", "full_set", "is_ppt", "level_parameters", "matrix_from_json",
    "matrix_to_json", "mmw_level2", "parse_set_spec", "partial_trace", "partial_transpose",
    "purified_net", "random_observable", "random_state", "reduced_program", "ree_bound",
    "ree_upper", "rel_entropy", "separable_set", "solve_level2", "solve_nested_level3",
    "solve_reduced", "von_neumann",
]
