"""Desk-scale numerics for p-operator spaces and Herz algebras on finite groups.

Everything here reports two-sided norm brackets: a certified upper bound
next to a witnessed lower bound, so disagreement between theory and
computation is visible as an empty intersection rather than a silent
wrong number.
"""

from herzlab.groups import (
    BUILTIN_GROUP_NAMES,
    FiniteGroup,
    GroupFunction,
    GroupTableError,
    cyclic_group,
    dihedral_group,
    direct_product,
    group_from_name,
    group_from_table,
    load_group,
    quaternion_group,
    symmetric_group,
)
from herzlab.herz import (
    HerzFactorSpace,
    QuasiExpectationReport,
    StructurePair,
    TensorCompatReport,
    abelian_characters,
    ap_norm,
    ap_upper_cheap,
    check_ap_tensor,
    check_pm_tensor,
    check_quasi_expectation,
    coproduct,
    coproduct_check,
    fell_shuffle,
    left_translations,
    pm_amplified,
    pm_matrix,
    pm_norm,
    quasi_expectation,
    quasi_expectation_operator,
    right_translations,
    structure_norms,
    unitary_characters,
)
from herzlab.multipliers import (
    CoefficientPair,
    CrossMultiplierReport,
    SchurSymbol,
    cb_multiplier_norm,
    cross_multiplier_check,
    herz_schur_norm,
    m0_upper_bound,
    multiplier_norm,
    psi_amplify,
    schur_norm,
    translation_symbol,
)
from herzlab.nuclear import (
    DualityReport,
    NuclearElement,
    NuclearMatrixSpace,
    TnElement,
    check_nuclear_duality,
    matrix_nuclear_norm,
    matrix_nuclear_upper,
    nuclear_norm,
    posp_projective_norm,
    slice_left,
    slice_right,
    tn_norm,
    tn_pair,
)
from herzlab.pnorms import (
    NormEstimate,
    OptimConfig,
    PExponent,
    bracket_gap,
    brackets_overlap,
    lp_norm,
    opnorm_bruteforce,
    opnorm_estimate,
    opnorm_exact,
    opnorm_upper,
    signum_power,
    vec_norm,
)
from herzlab.reports import ReportRecord, load_json_report, render_report, write_report
from herzlab.spaces import (
    AxiomReport,
    ConcretePOpSpace,
    FunctionalLevelReport,
    KwapienReport,
    LinearSpaceMap,
    MatrixLevelElement,
    Subquotient,
    check_axioms,
    direct_sum,
    functional_levels,
    kwapien_check,
    level_norm,
    pcb_norm,
)

__version__ = "0.1.0"
