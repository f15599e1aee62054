"""Discrete networks of bounded in-degree over an ordered variable set:
exact and empirical independence queries, structure recovery from small
tuple marginals, and VC-dimension bounds with sample-size solvers."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .model import (
    CapacityError,
    CylinderKey,
    DiscreteDag,
    InvalidDagError,
    JointTable,
    ValidationReport,
    Violation,
    dag_from_dict,
    dag_to_dict,
    factorized_joint,
    load_dag,
    mixed_radix_strides,
    random_dag,
    require_valid,
    save_dag,
    validate_dag,
)
from .oracle import (
    EXACT_TOL,
    AccessLog,
    ExactMarginalProvider,
    MarginalTable,
    TupleSizeError,
    conditional_independent,
    exact_provider,
    is_markov_relative,
    marginal,
    markov_parents,
)
from .estimation import (
    EmpiricalMarginalProvider,
    FrequencyTable,
    SampleMatrix,
    dependence_statistic,
    empirical_ci_test,
    empirical_provider,
    frequencies_from_dict,
    frequencies_to_dict,
    load_frequencies,
    load_samples,
    sample,
    save_frequencies,
    save_samples,
    tuple_frequencies,
)
from .recovery import (
    AttachResult,
    CiDecider,
    ModelViolationError,
    NodeTrace,
    ProviderCiDecider,
    RecoveryTrace,
    Skeleton,
    attach_cpts,
    empirical_ci_decider,
    exact_ci_decider,
    minimize_parent_set,
    recover_structure,
)
from .vcbounds import (
    BoundInputs,
    Certificate,
    CylinderCount,
    RiskBound,
    SampleSizes,
    ShatterWitness,
    VerifyResult,
    cylinder_count,
    load_witness,
    required_sample_size,
    risk_bound,
    save_witness,
    shatter_witness,
    vc_lower_bound,
    vc_upper_bound,
    verify_shattered,
    witness_from_dict,
    witness_to_dict,
)
from .experiment import (
    ExperimentConfig,
    TrialReport,
    load_config,
    load_trial_reports,
    run_experiment,
    run_trial_cell,
    save_trial_reports,
    summarize,
)

__all__ = [
    "BACKEND",
    "__version__",
    # model
    "CapacityError",
    "CylinderKey",
    "DiscreteDag",
    "InvalidDagError",
    "JointTable",
    "ValidationReport",
    "Violation",
    "dag_from_dict",
    "dag_to_dict",
    "factorized_joint",
    "load_dag",
    "mixed_radix_strides",
    "random_dag",
    "require_valid",
    "save_dag",
    "validate_dag",
    # oracle
    "EXACT_TOL",
    "AccessLog",
    "ExactMarginalProvider",
    "MarginalTable",
    "TupleSizeError",
    "conditional_independent",
    "exact_provider",
    "is_markov_relative",
    "marginal",
    "markov_parents",
    # estimation
    "EmpiricalMarginalProvider",
    "FrequencyTable",
    "SampleMatrix",
    "dependence_statistic",
    "empirical_ci_test",
    "empirical_provider",
    "frequencies_from_dict",
    "frequencies_to_dict",
    "load_frequencies",
    "load_samples",
    "sample",
    "save_frequencies",
    "save_samples",
    "tuple_frequencies",
    # recovery
    "AttachResult",
    "CiDecider",
    "ModelViolationError",
    "NodeTrace",
    "ProviderCiDecider",
    "RecoveryTrace",
    "Skeleton",
    "attach_cpts",
    "empirical_ci_decider",
    "exact_ci_decider",
    "minimize_parent_set",
    "recover_structure",
    # vcbounds
    "BoundInputs",
    "Certificate",
    "CylinderCount",
    "RiskBound",
    "SampleSizes",
    "ShatterWitness",
    "VerifyResult",
    "cylinder_count",
    "load_witness",
    "required_sample_size",
    "risk_bound",
    "save_witness",
    "shatter_witness",
    "vc_lower_bound",
    "vc_upper_bound",
    "verify_shattered",
    "witness_from_dict",
    "witness_to_dict",
    # experiment
    "ExperimentConfig",
    "TrialReport",
    "load_config",
    "load_trial_reports",
    "run_experiment",
    "run_trial_cell",
    "save_trial_reports",
    "summarize",
]
