"""Two-part alimony prediction: grant classifier times amount regressor."""

__version__ = "0.1.0"

from .schema import DatasetSchema, FeatureSpec, load_schema, save_schema
from .data import (
    CaseRecord,
    Dataset,
    EncodedMatrix,
    Encoder,
    encode,
    filter_cases,
    fit_encoder,
    load_dataset,
    save_dataset,
    train_test_split,
)
from .synth import SeatBias, SyntheticConfig, SyntheticFeature, demo_config, generate_synthetic
from .forest import ForestConfig, RandomForestModel, fit_forest, importance
from .linreg import LinearModel, fit_ols, stepwise_forward
from .quantreg import QuantileModel, fit_quantile, pinball_loss
from .hurdle import (
    HurdleConfig,
    HurdleModel,
    PredictionBreakdown,
    StepwiseSettings,
    export_model,
    import_model,
    predict_case,
    train_hurdle,
)
from .evaluation import (
    ClassificationReport,
    ComparisonTable,
    RegressionReport,
    classification_report,
    compare_models,
    pca_projection,
    regression_report,
)
from .audit import AuditReport, importance_table, run_audit
