"""Black-box individual-fairness auditing toolkit.

Discovers discriminatory inputs of a classifier via directed probabilistic
search, estimates the global discriminatory-input fraction, and retrains the
classifier with generated findings to reduce discrimination.
"""

from .domain import (
    InputDomain,
    LabeledDataset,
    ParameterSpec,
    PointInput,
    load_csv,
    load_domain,
    parse_domain,
    format_domain,
    protected_variants,
    sample_uniform,
    save_domain,
    write_csv,
)
from .errors import (
    BoundError,
    ContractError,
    DomainError,
    FairprobeError,
    InvariantError,
    ParseError,
    ProtocolError,
    SchemaError,
    TrainingError,
    TransportError,
)
from .estimator import EstimationResult, detection_probability, estimate_fraction
from .fairness import DiscriminationConfig, Finding, check_discriminatory, perturb
from .models import (
    ExternalModel,
    LogisticModel,
    Model,
    PlantedBiasSpec,
    PlantedModel,
    TreeModel,
    connect_external,
    load_model,
    make_planted,
    model_digest,
    save_model,
    train_logistic,
    train_tree,
)
from .retrain import RetrainIteration, RetrainReport, label_generated, retrain_loop
from .search import (
    COMPARE_ORDER,
    STRATEGIES,
    ProbabilityState,
    SearchConfig,
    TestSuite,
    baseline_random,
    compare_strategies,
    global_search,
    local_search,
    run_audit,
    update_full,
    update_semi,
)

__version__ = "0.1.0"

__all__ = [
    "BoundError",
    "COMPARE_ORDER",
    "ContractError",
    "DiscriminationConfig",
    "DomainError",
    "EstimationResult",
    "ExternalModel",
    "FairprobeError",
    "Finding",
    "InputDomain",
    "InvariantError",
    "LabeledDataset",
    "LogisticModel",
    "Model",
    "ParameterSpec",
    "ParseError",
    "PlantedBiasSpec",
    "PlantedModel",
    "PointInput",
    "ProbabilityState",
    "ProtocolError",
    "RetrainIteration",
    "RetrainReport",
    "STRATEGIES",
    "SchemaError",
    "SearchConfig",
    "TestSuite",
    "TrainingError",
    "TransportError",
    "TreeModel",
    "baseline_random",
    "check_discriminatory",
    "compare_strategies",
    "connect_external",
    "detection_probability",
    "estimate_fraction",
    "format_domain",
    "global_search",
    "label_generated",
    "load_csv",
    "load_domain",
    "load_model",
    "local_search",
    "make_planted",
    "model_digest",
    "parse_domain",
    "perturb",
    "protected_variants",
    "retrain_loop",
    "run_audit",
    "sample_uniform",
    "save_domain",
    "save_model",
    "train_logistic",
    "train_tree",
    "update_full",
    "update_semi",
    "write_csv",
]
