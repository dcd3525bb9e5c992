"""alforge: pool-based active learning with switchable query strategies.

The package trains a nearest-neighbor learner on a growing labeled set, picks
the next instance to ask a human (or simulated) expert about, blends expert
self-assessed confidence with the model's own, and knows when to switch
between query strategies or stop asking. Sessions are deterministic given
(config, seed) and serialize to JSON for exact replay.
"""

from .benchmarks import make_blobs
from .coldstart import (
    ClusteringResult,
    SeedSelection,
    bootstrap_labels,
    elbow_select,
    kmeans,
    select_seed_instances,
)
from .dataset import (
    Dataset,
    Instance,
    LabelEvent,
    from_arrays,
    load_csv,
    mark_labeled,
    save_csv,
    standardize_features,
)
from .errors import (
    AlforgeError,
    AlreadyLabeledError,
    DimensionMismatchError,
    DomainError,
    EmptyDatasetError,
    EmptyPoolError,
    EmptySetError,
    EmptyTrainingSetError,
    InvalidKError,
    OracleUnavailableError,
    OutOfRangeError,
    ParseError,
    SchemaVersionMismatchError,
    SingleClassError,
    UnknownIdError,
)
from .metrics import (
    HISTORY_COLUMNS,
    MetricSnapshot,
    classifier_uncertainty,
    consensus_entropy,
    entropy_of_classes,
    info_density_cosine,
    info_density_euclidean,
    margin_uncertainty,
    pool_densities,
    snapshot,
)
from .models import (
    Committee,
    KnnModel,
    PosteriorVector,
    build_committee,
    consensus_proba,
    predict_proba,
    train_knn,
)
from .oracle import (
    FUSION_STRATEGIES,
    ExpertInput,
    SimulatedOracle,
    SimulatedOracleConfig,
    expert_score,
    fuse,
    load_rule_base,
    overall_confidence,
    scale_model_confidence,
)
from .report import read_history_csv, render_figures, write_history_csv
from .session import (
    SCHEMA_VERSION,
    ColdStartConfig,
    DatasetConfig,
    RunConfig,
    SessionState,
    init_session,
    load_session,
    provide_label,
    run_to_completion,
    save_session,
    state_from_dict,
    state_to_dict,
    step,
)
from .strategies import (
    MONITORABLE_METRICS,
    StrategySpec,
    SwitchPolicy,
    select_dwm,
    select_instance,
    select_qbc,
    select_us,
    should_stop,
    should_switch,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # dataset
    "Dataset",
    "Instance",
    "LabelEvent",
    "from_arrays",
    "load_csv",
    "save_csv",
    "mark_labeled",
    "standardize_features",
    # models
    "KnnModel",
    "Committee",
    "PosteriorVector",
    "train_knn",
    "predict_proba",
    "build_committee",
    "consensus_proba",
    # oracle / confidence
    "ExpertInput",
    "SimulatedOracle",
    "SimulatedOracleConfig",
    "FUSION_STRATEGIES",
    "expert_score",
    "fuse",
    "load_rule_base",
    "overall_confidence",
    "scale_model_confidence",
    # metrics
    "MetricSnapshot",
    "HISTORY_COLUMNS",
    "classifier_uncertainty",
    "margin_uncertainty",
    "entropy_of_classes",
    "consensus_entropy",
    "info_density_euclidean",
    "info_density_cosine",
    "pool_densities",
    "snapshot",
    # cold start
    "ClusteringResult",
    "SeedSelection",
    "kmeans",
    "elbow_select",
    "select_seed_instances",
    "bootstrap_labels",
    # strategies
    "StrategySpec",
    "SwitchPolicy",
    "MONITORABLE_METRICS",
    "select_us",
    "select_qbc",
    "select_dwm",
    "select_instance",
    "should_switch",
    "should_stop",
    # session
    "SCHEMA_VERSION",
    "DatasetConfig",
    "ColdStartConfig",
    "RunConfig",
    "SessionState",
    "init_session",
    "provide_label",
    "step",
    "run_to_completion",
    "save_session",
    "load_session",
    "state_to_dict",
    "state_from_dict",
    # reporting
    "write_history_csv",
    "read_history_csv",
    "render_figures",
    # benchmarks
    "make_blobs",
    # errors
    "AlforgeError",
    "ParseError",
    "EmptyDatasetError",
    "AlreadyLabeledError",
    "UnknownIdError",
    "EmptyTrainingSetError",
    "DimensionMismatchError",
    "InvalidKError",
    "OutOfRangeError",
    "DomainError",
    "EmptySetError",
    "EmptyPoolError",
    "SingleClassError",
    "SchemaVersionMismatchError",
    "OracleUnavailableError",
]
