"""Numerical laboratory for Hyers-Ulam stability of the generalized Jensen
equation r·f((s·x + t·y)/r) = s·g(x) + t·h(y) on restricted domains."""

from .control import (
    CONSTANT,
    MIXED,
    TABLE,
    ControlError,
    ControlFunctionSpec,
    RadialControlTable,
    constant_control,
    control_phi_eval,
    control_phi_norms,
    mixed_control,
)
from .domains import (
    EXTERIOR,
    FULL,
    ORTHOGONAL,
    PUNCTURED,
    DomainError,
    DomainRestriction,
    ShellProfile,
    SupResult,
    asymptotic_profile,
    construct_z,
    construct_z_many,
    exterior_defect_sup,
    exterior_domain,
    five_inequality_margins,
    five_term_defect_bound,
    five_term_defect_many,
    full_domain,
    in_domain,
    orthogonal_domain,
    punctured_domain,
    verify_five_inequalities,
)
from .experiments import (
    BallSettings,
    ConfigError,
    ExperimentConfig,
    LimitSettings,
    ModelSettings,
    SamplerSettings,
    SearchSettings,
    ShellSettings,
    StabilityReport,
    adversarial_search,
    bound_formula,
    build_models,
    calibrated_perturbations,
    config_to_dict,
    emit_report,
    load_config,
    measure_epsilon,
    parse_config,
    parse_experiment,
    report_from_json,
    run_experiment,
)
from .models import (
    FunctionModel,
    JensenParams,
    ModelError,
    PerturbationSpec,
    RadialTable,
    derive_seed,
    jensen_defect,
    jensen_defect_many,
    make_perturbed_additive,
    odd_even_split,
)
from .orthogonal import (
    DecompositionResult,
    SikorskaConfig,
    decompose_T_Q,
    even_part_constancy_check,
    orthogonal_defect_sup,
    pexider_reduction_check,
    scaling_identity_check,
    sikorska_extend,
)
from .series import (
    LimitEstimate,
    SeriesValue,
    cauchy_gap,
    cor22_bound,
    dyadic_limit,
    dyadic_limit_many,
    pexider_triadic_limit_many,
    phi_tilde_dyadic,
    phi_tilde_triadic,
    psi_eval,
    quadratic_limit,
    quadratic_limit_many,
    triadic_limit,
    triadic_limit_many,
)
from .spaces import (
    BIRKHOFF_JAMES,
    EUCLIDEAN,
    INNER_PRODUCT,
    P_NORM,
    SUP,
    TRIVIAL,
    AxiomReport,
    AxiomResult,
    LambdaGrid,
    NormedSpaceSpec,
    OrthogonalityRelation,
    SpaceError,
    bj_margin,
    bj_margin_many,
    check_ratz_axioms,
    euclidean_space,
    inner,
    is_orthogonal,
    norm,
    norm_many,
    o4_witness,
    p_space,
    sup_space,
)

__version__ = "0.1.0"
