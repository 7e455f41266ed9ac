"""Finite-dimensional operator forms of the Jensen and Hardy inequalities."""

from hardy_refine.operator.field import (
    AveragingMap,
    MatrixField,
    expression_field,
    load_field,
    log_grid,
    random_field,
    random_smooth_field,
    save_field,
)
from hardy_refine.operator.hardy import (
    HansenFinding,
    HansenResult,
    hansen_check,
    hansen_counterexample_search,
    hansen_matrices,
    operator_hardy_refined,
    random_hansen_suite,
    scalar_field,
)
from hardy_refine.operator.jensen import (
    ExternalJensenResult,
    external_jensen_check,
    mp_gap,
    theorem_a_gap,
    theorem_b_gap,
)
from hardy_refine.operator.matrices import (
    HermitianMatrix,
    UnitVector,
    abs_matrix,
    apply_function,
    instance_rng,
    quadratic_form,
    random_psd,
    random_unit,
)

__all__ = [
    "AveragingMap",
    "ExternalJensenResult",
    "HansenFinding",
    "HansenResult",
    "HermitianMatrix",
    "MatrixField",
    "UnitVector",
    "abs_matrix",
    "apply_function",
    "expression_field",
    "external_jensen_check",
    "hansen_check",
    "hansen_counterexample_search",
    "hansen_matrices",
    "instance_rng",
    "load_field",
    "log_grid",
    "mp_gap",
    "operator_hardy_refined",
    "quadratic_form",
    "random_field",
    "random_hansen_suite",
    "random_psd",
    "random_smooth_field",
    "random_unit",
    "save_field",
    "scalar_field",
    "theorem_a_gap",
    "theorem_b_gap",
]
