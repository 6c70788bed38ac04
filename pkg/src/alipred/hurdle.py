"""Two-part amount prediction: grant classifier times amount regressor.

Step 1 trains the random-forest grant classifier on every (filtered) case.
Step 2 trains the amount regressor only on granted cases with a positive
amount, because zero outcomes violate the linear relationship the regression
assumes. Step 3 multiplies: the predicted amount is the classifier output
times the clipped regression output. In the default "label" mode the
classifier output is recoded to 0/1, so a predicted non-grant yields exactly
zero; "probability" mode scales the amount by the grant probability instead
(both readings of the combination are legitimate, so both are offered).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import forest as rf
from . import linreg, quantreg
from .data import Dataset, fit_encoder, validate_case_values
from .errors import ArtifactError, TrainingError
from .schema import DatasetSchema

ARTIFACT_FORMAT = "alipred-hurdle-model"
ARTIFACT_VERSION = 1


@dataclass(frozen=True)
class StepwiseSettings:
    entry_p: float = 0.05
    max_steps: int = None

    def to_dict(self):
        return {"entry_p": self.entry_p, "max_steps": self.max_steps}


@dataclass(frozen=True)
class HurdleConfig:
    classifier_features: tuple = None   # None -> all non-excluded features
    regressor_features: tuple = None    # None -> stepwise (if set) or all
    regressor_kind: str = "ols"         # ols | quantile
    tau: float = 0.5
    combination_mode: str = "label"     # label | probability
    excluded_features: tuple = ()
    forest: rf.ForestConfig = field(default_factory=rf.ForestConfig)
    stepwise: StepwiseSettings = None

    def __post_init__(self):
        if self.regressor_kind not in ("ols", "quantile"):
            raise ValueError(f"regressor_kind must be ols|quantile, got {self.regressor_kind!r}")
        if self.combination_mode not in ("label", "probability"):
            raise ValueError(
                f"combination_mode must be label|probability, got {self.combination_mode!r}"
            )
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must be strictly inside (0, 1)")
        for attr in ("classifier_features", "regressor_features"):
            v = getattr(self, attr)
            if v is not None:
                object.__setattr__(self, attr, tuple(v))
        object.__setattr__(self, "excluded_features", tuple(self.excluded_features))
        if self.regressor_features is not None and self.stepwise is not None:
            raise ValueError(
                "give either an explicit regressor feature list or stepwise settings, not both"
            )
        excluded = set(self.excluded_features)
        for attr in ("classifier_features", "regressor_features"):
            v = getattr(self, attr)
            if v is not None and excluded & set(v):
                clash = sorted(excluded & set(v))
                raise TrainingError(f"excluded feature(s) named in {attr}: {clash}")

    def to_dict(self):
        return {
            "classifier_features": list(self.classifier_features)
            if self.classifier_features is not None else None,
            "regressor_features": list(self.regressor_features)
            if self.regressor_features is not None else None,
            "regressor_kind": self.regressor_kind,
            "tau": self.tau,
            "combination_mode": self.combination_mode,
            "excluded_features": list(self.excluded_features),
            "forest": self.forest.to_dict(),
            "stepwise": self.stepwise.to_dict() if self.stepwise else None,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["forest"] = rf.ForestConfig.from_dict(d.get("forest") or {})
        sw = d.get("stepwise")
        d["stepwise"] = StepwiseSettings(**sw) if sw else None
        for key in ("classifier_features", "regressor_features", "excluded_features"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class PredictionBreakdown:
    grant_probability: float
    grant_label: int
    amount_raw: float       # regression output, clipped below at 0
    amount_adjusted: float  # classifier output times amount_raw
    clipped: bool = False   # True when a negative regression output was clipped

    def to_dict(self):
        return {
            "grant_probability": self.grant_probability,
            "grant_label": self.grant_label,
            "amount_raw": self.amount_raw,
            "amount_adjusted": self.amount_adjusted,
            "clipped": self.clipped,
        }


@dataclass(frozen=True)
class HurdleModel:
    classifier: rf.RandomForestModel
    classifier_encoder: object
    regressor: object        # LinearModel | QuantileModel
    regressor_encoder: object
    regressor_columns: tuple  # indices into the regressor encoder's output
    config: HurdleConfig
    schema: DatasetSchema
    fingerprint: str
    training: dict

    @property
    def regressor_kind(self):
        return self.config.regressor_kind


def resolve_feature_lists(schema, config):
    """Resolve classifier/regressor feature name lists against the schema."""
    known = set(schema.feature_names)
    for label, names in (
        ("excluded_features", config.excluded_features),
        ("classifier_features", config.classifier_features or ()),
        ("regressor_features", config.regressor_features or ()),
    ):
        unknown = [n for n in names if n not in known]
        if unknown:
            raise TrainingError(f"{label} not in schema: {unknown}")
    excluded = set(config.excluded_features)
    default = tuple(n for n in schema.feature_names if n not in excluded)
    cls_features = config.classifier_features or default
    reg_features = config.regressor_features or default
    if not cls_features or not reg_features:
        raise TrainingError("no features left after exclusions")
    return cls_features, reg_features


def regressor_design(dataset, config, encoder, matrix):
    """Column indices and names the amount model is fitted on.

    The amount model carries an intercept, so each categorical's first level
    is the reference (its one-hot column is left out) and columns constant in
    the training design are left out too; keeping either would make the
    design rank deficient by construction. Runs forward stepwise selection
    over the remaining columns when configured.
    """
    names = list(matrix.column_names)
    reference = set()
    for feat_name in encoder.feature_names:
        spec = encoder.schema.feature(feat_name)
        if spec.kind == "categorical":
            reference.add(f"{feat_name}={spec.levels[0]}")
    spans = np.ptp(matrix.rows, axis=0)
    usable = [
        j for j, name in enumerate(names)
        if name not in reference and spans[j] > 0
    ]
    if config.stepwise is None or config.regressor_features is not None:
        return usable, tuple(names[j] for j in usable), None
    trace, _, _ = linreg.stepwise_forward(
        matrix.rows[:, usable],
        dataset.amounts(),
        column_names=tuple(names[j] for j in usable),
        entry_p=config.stepwise.entry_p,
        max_steps=config.stepwise.max_steps,
    )
    if not trace.selected:
        # An empty selection still yields a usable intercept-only model.
        return [], (), trace
    idx = [names.index(n) for n in trace.selected]
    return idx, tuple(trace.selected), trace


def train_hurdle(dataset, config):
    """Fit both submodels; see the module docstring for the population rules.

    The dataset must already be filtered (monthly-payment cases removed).
    """
    if any(r.monthly_payment for r in dataset.records):
        raise TrainingError(
            "dataset contains monthly-payment cases; run filter_cases first"
        )
    cls_features, reg_features = resolve_feature_lists(dataset.schema, config)

    labels = dataset.grant_labels()
    if len(set(labels.tolist())) < 2:
        raise TrainingError("both grant classes must be present to train the classifier")

    cls_encoder = fit_encoder(dataset, cls_features)
    cls_matrix = cls_encoder.transform(dataset)
    classifier = rf.fit_forest(
        cls_matrix.rows, labels, config.forest,
        column_names=cls_matrix.column_names,
        column_features=cls_encoder.column_features,
    )

    granted_records = tuple(r for r in dataset.records if r.grant and r.amount > 0)
    granted = Dataset(schema=dataset.schema, records=granted_records)
    reg_encoder = fit_encoder(granted, reg_features) if granted_records else None
    if reg_encoder is None:
        raise TrainingError("no granted cases with positive amounts to fit the amount model")
    reg_matrix = reg_encoder.transform(granted)
    reg_cols, reg_names, trace = regressor_design(granted, config, reg_encoder, reg_matrix)
    design = reg_matrix.rows[:, reg_cols]
    amounts = granted.amounts()
    if len(granted_records) <= len(reg_cols) + 1:
        raise TrainingError(
            f"insufficient granted cases: {len(granted_records)} for "
            f"{len(reg_cols)} regressor columns"
        )
    if config.regressor_kind == "ols":
        regressor, diagnostics = linreg.fit_ols(design, amounts, reg_names)
        reg_summary = {"r_squared": diagnostics.r_squared,
                       "adjusted_r_squared": diagnostics.adjusted_r_squared}
    else:
        regressor = quantreg.fit_quantile(design, amounts, config.tau, reg_names)
        reg_summary = {"achieved_pinball_loss": regressor.achieved_loss}

    training = {
        "n_classifier": len(dataset.records),
        "n_regressor": len(granted_records),
        "oob_accuracy": classifier.oob_accuracy,
        "regressor": reg_summary,
    }
    if trace is not None:
        training["stepwise"] = {
            "selected": list(trace.selected),
            "steps": [[name, p] for name, p in trace.steps],
            "stopped_reason": trace.stopped_reason,
        }
    return HurdleModel(
        classifier=classifier,
        classifier_encoder=cls_encoder,
        regressor=regressor,
        regressor_encoder=reg_encoder,
        regressor_columns=tuple(reg_cols),
        config=config,
        schema=dataset.schema,
        fingerprint=dataset.schema.fingerprint(),
        training=training,
    )


def predict_case(model, values):
    """Predict one case from a feature->value mapping.

    Exact-arithmetic contract: in label mode a predicted non-grant returns
    amount_adjusted = 0.0 exactly and a predicted grant returns the clipped
    regression output bit-identically.
    """
    normalized = validate_case_values(model.schema, values)
    cls_row = model.classifier_encoder.transform_values(normalized)
    prob = rf.predict_proba(model.classifier, cls_row)
    label = 1 if prob >= 0.5 else 0

    reg_row = model.regressor_encoder.transform_values(normalized)
    reg_row = reg_row[list(model.regressor_columns)]
    if model.config.regressor_kind == "ols":
        raw = linreg.predict(model.regressor, reg_row)
    else:
        raw = quantreg.predict(model.regressor, reg_row)
    clipped = raw < 0.0
    amount_raw = 0.0 if clipped else raw

    if model.config.combination_mode == "label":
        amount_adjusted = amount_raw if label == 1 else 0.0
    else:
        amount_adjusted = prob * amount_raw
    return PredictionBreakdown(
        grant_probability=float(prob),
        grant_label=label,
        amount_raw=amount_raw,
        amount_adjusted=amount_adjusted,
        clipped=bool(clipped),
    )


def _encoder_to_dict(enc):
    return {
        "feature_names": list(enc.feature_names),
        "column_names": list(enc.column_names),
        "column_features": list(enc.column_features),
        "medians": dict(enc.medians),
    }


def _encoder_from_dict(d, schema):
    from .data import Encoder

    return Encoder(
        schema=schema,
        feature_names=tuple(d["feature_names"]),
        column_names=tuple(d["column_names"]),
        column_features=tuple(d["column_features"]),
        medians=dict(d["medians"]),
    )


def _regressor_to_dict(model, kind):
    d = {
        "kind": kind,
        "intercept": model.intercept,
        "coefficients": list(model.coefficients),
        "column_names": list(model.column_names),
    }
    if kind == "quantile":
        d["tau"] = model.tau
        d["achieved_loss"] = model.achieved_loss
    return d


def _regressor_from_dict(d):
    if d["kind"] == "ols":
        return linreg.LinearModel(
            intercept=d["intercept"],
            coefficients=tuple(d["coefficients"]),
            column_names=tuple(d["column_names"]),
        )
    return quantreg.QuantileModel(
        tau=d["tau"],
        intercept=d["intercept"],
        coefficients=tuple(d["coefficients"]),
        column_names=tuple(d["column_names"]),
        achieved_loss=d["achieved_loss"],
    )


def export_model(model, path):
    """Write the versioned artifact; floats survive the JSON round trip
    bit-exactly (shortest-repr serialization)."""
    doc = {
        "format": ARTIFACT_FORMAT,
        "format_version": ARTIFACT_VERSION,
        "schema_fingerprint": model.fingerprint,
        "schema": model.schema.to_dict(),
        "config": model.config.to_dict(),
        "training": model.training,
        "classifier": rf.forest_to_dict(model.classifier),
        "classifier_encoder": _encoder_to_dict(model.classifier_encoder),
        "regressor": _regressor_to_dict(model.regressor, model.config.regressor_kind),
        "regressor_encoder": _encoder_to_dict(model.regressor_encoder),
        "regressor_columns": list(model.regressor_columns),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def import_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ArtifactError(f"model artifact not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"corrupt model artifact {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != ARTIFACT_FORMAT:
        raise ArtifactError(f"{path} is not a hurdle model artifact")
    version = doc.get("format_version")
    if version != ARTIFACT_VERSION:
        raise ArtifactError(
            f"unsupported artifact version {version!r} (this build reads {ARTIFACT_VERSION})"
        )
    try:
        schema = DatasetSchema.from_dict(doc["schema"])
        model = HurdleModel(
            classifier=rf.forest_from_dict(doc["classifier"]),
            classifier_encoder=_encoder_from_dict(doc["classifier_encoder"], schema),
            regressor=_regressor_from_dict(doc["regressor"]),
            regressor_encoder=_encoder_from_dict(doc["regressor_encoder"], schema),
            regressor_columns=tuple(doc["regressor_columns"]),
            config=HurdleConfig.from_dict(doc["config"]),
            schema=schema,
            fingerprint=doc["schema_fingerprint"],
            training=doc["training"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"corrupt model artifact {path}: {exc}") from exc
    if model.fingerprint != schema.fingerprint():
        raise ArtifactError(
            f"artifact fingerprint mismatch in {path}: schema content was altered"
        )
    return model
