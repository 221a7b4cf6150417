"""survcluster: unsupervised survival clustering.

Trains softmax clusterers to maximize a differentiable generalization of the
k-group logrank statistic (probability-weighted event and risk masses), with
a balance penalty that keeps cluster sizes from collapsing. Ships classical
survival statistics, a synthetic-cohort simulator, recovery metrics with a
cross-validation harness, and a CLI.
"""

from ._backend import backend_name, use_backend
from .errors import (
    DataError,
    InvalidInputError,
    InvalidPlanError,
    InvalidSpecError,
    NoEventsError,
    NumericalError,
    SingularVarianceError,
    SurvClusterError,
    UndefinedAUCError,
    UndefinedCIndexError,
    UndefinedRowError,
    UnsupportedKError,
)
from .evaluate import (
    CVResult,
    FoldPlan,
    RecoveryReport,
    confusion_matrix,
    make_fold_plan,
    match_clusters,
    permutation_importance,
    roc_auc_ovr,
    run_cv_experiment,
)
from .loss import (
    LossConfig,
    LossValue,
    SoftAssignment,
    balance_penalty,
    gradient_wrt_logits,
    one_hot,
    partial_event_table,
    partial_logrank_statistic,
    row_softmax,
    total_objective,
)
from .network import (
    NetworkParams,
    NetworkSpec,
    forward,
    init_params,
    load_checkpoint,
    predict_labels,
    save_checkpoint,
)
from .records import SurvivalRecord, make_records
from .simulate import (
    CohortSpec,
    GroupSpec,
    WeibullGroup,
    digit_group_map,
    digits_to_groups,
    generate_cohort,
    three_group_cohort_spec,
    weibull_sample,
)
from .special import chi_square_sf
from .survival import (
    EventTable,
    StepSurvivalCurve,
    build_event_table,
    concordance_index,
    kaplan_meier,
    multivariate_logrank_hard,
)
from .training import EpochStats, TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "CVResult",
    "CohortSpec",
    "DataError",
    "EpochStats",
    "EventTable",
    "FoldPlan",
    "GroupSpec",
    "InvalidInputError",
    "InvalidPlanError",
    "InvalidSpecError",
    "LossConfig",
    "LossValue",
    "NetworkParams",
    "NetworkSpec",
    "NoEventsError",
    "NumericalError",
    "RecoveryReport",
    "SingularVarianceError",
    "SoftAssignment",
    "StepSurvivalCurve",
    "SurvClusterError",
    "SurvivalRecord",
    "TrainConfig",
    "UndefinedAUCError",
    "UndefinedCIndexError",
    "UndefinedRowError",
    "UnsupportedKError",
    "WeibullGroup",
    "backend_name",
    "balance_penalty",
    "build_event_table",
    "chi_square_sf",
    "concordance_index",
    "confusion_matrix",
    "digit_group_map",
    "digits_to_groups",
    "forward",
    "generate_cohort",
    "gradient_wrt_logits",
    "init_params",
    "kaplan_meier",
    "load_checkpoint",
    "make_fold_plan",
    "make_records",
    "match_clusters",
    "multivariate_logrank_hard",
    "one_hot",
    "partial_event_table",
    "partial_logrank_statistic",
    "permutation_importance",
    "predict_labels",
    "roc_auc_ovr",
    "row_softmax",
    "run_cv_experiment",
    "save_checkpoint",
    "three_group_cohort_spec",
    "total_objective",
    "train",
    "use_backend",
    "weibull_sample",
]
