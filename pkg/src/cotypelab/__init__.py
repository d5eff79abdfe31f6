"""Metric cotype inequalities, separated tree structures, and discrete
torus isoperimetry on finite metric spaces."""

from .cotype import (
    Certificate,
    CertificateRow,
    CotypeEvaluation,
    CotypeParams,
    GammaSearchResult,
    TorusFunction,
    certificate_table,
    certificate_to_csv,
    edge_sum_components,
    evaluate_cotype,
    function_from_json,
    function_to_json,
    gamma_search,
    load_function,
    mn_scaling_function,
    save_function,
    scaling_lower_bound,
    sts_certificate,
)
from .errors import (
    BadParameter,
    BudgetTooSmall,
    CotypeLabError,
    DimensionMismatch,
    EmptySource,
    IdentityMismatch,
    MetricValidationError,
    MetricViolation,
    NotDense,
    NoValidSplit,
    OutOfRange,
    Overflow,
    TooLarge,
    TooLargeForExhaustive,
    TooSmall,
)
from .generators import GeneratorSpec, generate, parse_generator_spec
from .separation import (
    SeparatedTreeStructure,
    SeparationReport,
    TreeNode,
    TreeValidationReport,
    build_tree_structure,
    max_split_separation,
    separation_constant,
    single_linkage_merges,
    tree_to_dot,
    tree_to_json,
    validate_tree_structure,
)
from .spaces import (
    Chain,
    FiniteMetricSpace,
    UltrametricVerdict,
    check_ultrametric,
    find_chain,
    load_space,
    ls_metric_exponent,
    metric_violations,
    save_space,
    snowflake_transform,
    space_from_csv,
    space_from_json,
    space_to_csv,
    space_to_json,
    subdominant_ultrametric,
    validate_metric,
)
from .torus import (
    IsoperimetricBounds,
    TorusIndex,
    TorusSubset,
    brute_force_min_boundary,
    edge_boundary,
    isoperimetric_bounds,
    neighbors,
    torus_geometry,
)
from .transfer import (
    MapReport,
    PointMap,
    RoughInverseReport,
    TransferVerifyReport,
    check_map,
    empirical_transfer_verify,
    load_map,
    map_from_json,
    map_to_json,
    rough_inverse,
    save_map,
    transfer_constants,
)

__version__ = "0.1.0"
