"""Sequential multi-objective Bayesian optimization over pooled candidate catalogs.

The package selects batches of experiments from a finite catalog: Gaussian
process surrogates model each objective, random-weight Tchebycheff
scalarization with expected improvement proposes points, proposals snap to
the nearest unevaluated catalog row, and utilization-aware front metrics
drive the stopping rule.
"""

from .acquisition import (
    AcquisitionConfig,
    ProposedPoint,
    expected_improvement,
    optimize_acquisition,
    propose_batch,
    sample_weights,
    tchebycheff,
)
from .campaign import (
    LIVE,
    RUNNING,
    SIMULATION,
    STOPPED_ITERATIONS,
    STOPPED_THRESHOLD,
    CampaignConfig,
    CampaignState,
    StabilityResult,
    SuggestionRecord,
    effective_iterations,
    init_campaign,
    load_campaign,
    run_simulation,
    save_campaign,
    stability_study,
    step,
    submit_observation,
)
from .data import (
    CatalogSchema,
    FeatureSetSpec,
    SynthSpec,
    TabularDataset,
    feature_importance,
    load_bundled_catalog,
    load_catalog,
    load_schema,
    parse_catalog_text,
    restrict_features,
    save_catalog,
    save_schema,
    select_feature_set,
    synth_catalog,
    synth_front_indices,
)
from .errors import (
    CampaignStateError,
    ConfigError,
    DuplicateObservationError,
    EmptySelectionError,
    ExhaustedCatalogError,
    InsufficientDataError,
    InvalidArgumentError,
    NumericalFailureError,
    ParetoPoolError,
    ParseError,
    ProtocolError,
    SchemaError,
)
from .gp import (
    KernelParams,
    Prediction,
    TrainedSurrogate,
    build_surrogate,
    condition_on,
    fit_surrogate,
    kernel_eval,
    kernel_matrix,
    log_marginal_likelihood,
    predict,
    predict_batch,
)
from .metrics import (
    MAXIMIZE,
    MINIMIZE,
    FrontReport,
    aphv,
    direction_signs,
    gd,
    hypervolume,
    hypervolume_monte_carlo,
    igd,
    pareto_front,
    phv,
)

__version__ = "0.1.0"

__all__ = [
    "AcquisitionConfig",
    "CampaignConfig",
    "CampaignState",
    "CampaignStateError",
    "CatalogSchema",
    "ConfigError",
    "DuplicateObservationError",
    "EmptySelectionError",
    "ExhaustedCatalogError",
    "FeatureSetSpec",
    "FrontReport",
    "InsufficientDataError",
    "InvalidArgumentError",
    "KernelParams",
    "LIVE",
    "MAXIMIZE",
    "MINIMIZE",
    "NumericalFailureError",
    "ParetoPoolError",
    "ParseError",
    "Prediction",
    "ProposedPoint",
    "ProtocolError",
    "RUNNING",
    "SIMULATION",
    "STOPPED_ITERATIONS",
    "STOPPED_THRESHOLD",
    "SchemaError",
    "StabilityResult",
    "SuggestionRecord",
    "SynthSpec",
    "TabularDataset",
    "TrainedSurrogate",
    "aphv",
    "build_surrogate",
    "condition_on",
    "direction_signs",
    "effective_iterations",
    "expected_improvement",
    "feature_importance",
    "fit_surrogate",
    "gd",
    "hypervolume",
    "hypervolume_monte_carlo",
    "igd",
    "init_campaign",
    "kernel_eval",
    "kernel_matrix",
    "load_bundled_catalog",
    "load_campaign",
    "load_catalog",
    "load_schema",
    "log_marginal_likelihood",
    "optimize_acquisition",
    "pareto_front",
    "parse_catalog_text",
    "phv",
    "predict",
    "predict_batch",
    "propose_batch",
    "restrict_features",
    "run_simulation",
    "sample_weights",
    "save_campaign",
    "save_catalog",
    "save_schema",
    "select_feature_set",
    "stability_study",
    "step",
    "submit_observation",
    "synth_catalog",
    "synth_front_indices",
    "tchebycheff",
    "__version__",
]
