"""Case records, CSV ingestion, filtering, splitting, and matrix encoding.

Everything here is a pure function over immutable inputs; datasets are safe
to share read-only across threads.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataValidationError, SchemaError, TrainingError
from .schema import DatasetSchema

MISSING_INDICATOR_SUFFIX = "__missing"


@dataclass(frozen=True)
class CaseRecord:
    """One codified divorce decision: feature cells plus targets and flags.

    ``values`` maps feature name to a typed value, or None for missing.
    Amounts are euros as binary floats; CSV round-trips are value-exact via
    shortest-repr formatting.
    """

    values: dict
    grant: bool
    amount: float
    monthly_payment: bool = False
    parties_agreed: bool = False


@dataclass(frozen=True)
class Dataset:
    schema: DatasetSchema
    records: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self):
        return len(self.records)

    def grant_labels(self):
        return np.array([1 if r.grant else 0 for r in self.records], dtype=np.int64)

    def amounts(self):
        return np.array([r.amount for r in self.records], dtype=np.float64)


def _check_value(spec, value, row=None):
    """Validate a typed (non-string) cell value against its feature spec."""
    name = spec.name
    if value is None:
        if not spec.allow_missing:
            raise DataValidationError(
                f"feature {name!r} is missing but allow_missing=false"
                + ("" if row is None else f" (row {row})"),
                row=row, column=name, kind="missing_required",
            )
        return None
    if spec.kind == "boolean":
        if not isinstance(value, bool):
            raise DataValidationError(
                f"feature {name!r}: expected a boolean, got {value!r}",
                row=row, column=name, kind="type_mismatch",
            )
        return value
    if spec.kind == "count":
        if isinstance(value, bool) or not isinstance(value, int):
            raise DataValidationError(
                f"feature {name!r}: expected a non-negative integer, got {value!r}",
                row=row, column=name, kind="type_mismatch",
            )
        if value < 0:
            raise DataValidationError(
                f"feature {name!r}: counts cannot be negative ({value})",
                row=row, column=name, kind="type_mismatch",
            )
        return value
    if spec.kind == "numeric":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DataValidationError(
                f"feature {name!r}: expected a number, got {value!r}",
                row=row, column=name, kind="type_mismatch",
            )
        value = float(value)
        if not math.isfinite(value):
            raise DataValidationError(
                f"feature {name!r}: non-finite value {value!r}",
                row=row, column=name, kind="type_mismatch",
            )
        return value
    # categorical
    if not isinstance(value, str) or value not in spec.levels:
        raise DataValidationError(
            f"feature {name!r}: {value!r} is not one of levels {list(spec.levels)}",
            row=row, column=name, kind="type_mismatch",
        )
    return value


def validate_case_values(schema, values, row=None):
    """Check a feature->value mapping against the schema.

    Returns a normalized dict covering every schema feature (None for
    missing-and-allowed cells). Raises DataValidationError with a ``kind``
    of "unknown_feature", "missing_required", or "type_mismatch".
    """
    known = set(schema.feature_names)
    for name in values:
        if name not in known:
            raise DataValidationError(
                f"unknown feature {name!r}", row=row, column=name, kind="unknown_feature"
            )
    out = {}
    for spec in schema.features:
        out[spec.name] = _check_value(spec, values.get(spec.name), row=row)
    return out


def make_record(schema, values, grant, amount, monthly_payment=False,
                parties_agreed=False, row=None):
    """Build a validated CaseRecord; enforces grant=false => amount=0."""
    amount = float(amount)
    if amount < 0:
        raise DataValidationError(
            f"amount must be >= 0, got {amount}" + ("" if row is None else f" (row {row})"),
            row=row, column=schema.target_amount,
        )
    if not grant and amount != 0.0:
        raise DataValidationError(
            f"grant=false with amount={amount}" + ("" if row is None else f" (row {row})"),
            row=row, column=schema.target_amount,
        )
    return CaseRecord(
        values=validate_case_values(schema, values, row=row),
        grant=bool(grant),
        amount=amount,
        monthly_payment=bool(monthly_payment),
        parties_agreed=bool(parties_agreed),
    )


def _parse_cell(spec, text, row):
    if text == "":
        if not spec.allow_missing:
            raise DataValidationError(
                f"empty cell for feature {spec.name!r} at row {row}, allow_missing=false",
                row=row, column=spec.name, kind="missing_required",
            )
        return None
    name = spec.name
    if spec.kind == "numeric":
        try:
            value = float(text)
        except ValueError:
            raise DataValidationError(
                f"row {row}, column {name!r}: {text!r} is not a number",
                row=row, column=name, kind="type_mismatch",
            ) from None
        if not math.isfinite(value):
            raise DataValidationError(
                f"row {row}, column {name!r}: non-finite value {text!r}",
                row=row, column=name, kind="type_mismatch",
            )
        return value
    if spec.kind == "count":
        try:
            value = int(text)
        except ValueError:
            raise DataValidationError(
                f"row {row}, column {name!r}: {text!r} is not an integer count",
                row=row, column=name, kind="type_mismatch",
            ) from None
        if value < 0:
            raise DataValidationError(
                f"row {row}, column {name!r}: negative count {value}",
                row=row, column=name, kind="type_mismatch",
            )
        return value
    if spec.kind == "boolean":
        return _parse_bool(text, row, name)
    if text not in spec.levels:
        raise DataValidationError(
            f"row {row}, column {name!r}: {text!r} is not one of levels {list(spec.levels)}",
            row=row, column=name, kind="type_mismatch",
        )
    return text


def _parse_bool(text, row, column):
    if text == "true":
        return True
    if text == "false":
        return False
    raise DataValidationError(
        f"row {row}, column {column!r}: expected 'true' or 'false', got {text!r}",
        row=row, column=column, kind="type_mismatch",
    )


def _format_cell(spec, value):
    if value is None:
        return ""
    if spec.kind == "boolean":
        return "true" if value else "false"
    if spec.kind == "numeric":
        return repr(float(value))
    return str(value)


def load_dataset(csv_path, schema_path):
    """Read a CSV plus schema sidecar into a validated Dataset.

    Row order is preserved; every cell is validated against its FeatureSpec.
    """
    from .schema import load_schema

    schema = load_schema(schema_path)
    special = (
        schema.target_grant,
        schema.target_amount,
        schema.flag_monthly_payment,
        schema.flag_parties_agreed,
    )
    expected = list(schema.feature_names) + list(special)
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataValidationError(f"{csv_path}: empty file, header row required") from None
        unknown = [c for c in header if c not in expected]
        if unknown:
            raise DataValidationError(
                f"unknown column(s) {unknown} not in schema", kind="unknown_feature"
            )
        absent = [c for c in expected if c not in header]
        if absent:
            raise DataValidationError(f"column(s) {absent} required by schema are absent")
        col_of = {name: header.index(name) for name in expected}

        records = []
        for row_no, row in enumerate(reader, start=2):  # header is line 1
            if len(row) != len(header):
                raise DataValidationError(
                    f"row {row_no}: expected {len(header)} cells, got {len(row)}", row=row_no
                )
            values = {
                spec.name: _parse_cell(spec, row[col_of[spec.name]], row_no)
                for spec in schema.features
            }
            grant = _parse_bool(row[col_of[schema.target_grant]], row_no, schema.target_grant)
            amount_text = row[col_of[schema.target_amount]]
            try:
                amount = float(amount_text)
            except ValueError:
                raise DataValidationError(
                    f"row {row_no}, column {schema.target_amount!r}: "
                    f"{amount_text!r} is not a number",
                    row=row_no, column=schema.target_amount, kind="type_mismatch",
                ) from None
            monthly = _parse_bool(
                row[col_of[schema.flag_monthly_payment]], row_no, schema.flag_monthly_payment
            )
            agreed = _parse_bool(
                row[col_of[schema.flag_parties_agreed]], row_no, schema.flag_parties_agreed
            )
            records.append(
                make_record(schema, values, grant, amount, monthly, agreed, row=row_no)
            )
    return Dataset(schema=schema, records=tuple(records))


def save_dataset(dataset, csv_path, schema_path=None):
    """Write a Dataset back to CSV (and optionally its schema sidecar).

    Values round-trip exactly: floats are written with shortest repr.
    """
    schema = dataset.schema
    header = list(schema.feature_names) + [
        schema.target_grant,
        schema.target_amount,
        schema.flag_monthly_payment,
        schema.flag_parties_agreed,
    ]
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in dataset.records:
            row = [_format_cell(spec, rec.values[spec.name]) for spec in schema.features]
            row.append("true" if rec.grant else "false")
            row.append(repr(float(rec.amount)))
            row.append("true" if rec.monthly_payment else "false")
            row.append("true" if rec.parties_agreed else "false")
            writer.writerow(row)
    if schema_path is not None:
        from .schema import save_schema

        save_schema(schema, schema_path)


@dataclass(frozen=True)
class FilterResult:
    dataset: Dataset
    removed_monthly: int
    removed_subset: int


def filter_cases(dataset, exclude_monthly=True, subset="all"):
    """Apply the case filters: drop monthly-payment cases, keep a subsample.

    subset is one of "all", "agreed", "contested". Empty results are allowed.
    """
    if subset not in ("all", "agreed", "contested"):
        raise ValueError(f"subset must be all|agreed|contested, got {subset!r}")
    kept = list(dataset.records)
    removed_monthly = 0
    if exclude_monthly:
        n = len(kept)
        kept = [r for r in kept if not r.monthly_payment]
        removed_monthly = n - len(kept)
    removed_subset = 0
    if subset != "all":
        want_agreed = subset == "agreed"
        n = len(kept)
        kept = [r for r in kept if r.parties_agreed == want_agreed]
        removed_subset = n - len(kept)
    return FilterResult(
        dataset=Dataset(schema=dataset.schema, records=tuple(kept), metadata=dict(dataset.metadata)),
        removed_monthly=removed_monthly,
        removed_subset=removed_subset,
    )


def _normalize_seed(seed):
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def train_test_split(dataset, test_fraction, seed):
    """Deterministic stratified split on the grant label.

    Within each class, round(test_fraction * n_class) records go to the test
    side; record order inside each side follows the input order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    by_class = {0: [], 1: []}
    for i, rec in enumerate(dataset.records):
        by_class[1 if rec.grant else 0].append(i)
    for cls, idx in by_class.items():
        if 0 < len(idx) < 2:
            raise TrainingError(
                f"grant class {cls} has fewer than 2 records; cannot split"
            )
    rng = np.random.default_rng(_normalize_seed(seed))
    test_idx = []
    for cls in (0, 1):
        idx = np.array(by_class[cls], dtype=np.int64)
        if idx.size == 0:
            continue
        k = int(math.floor(test_fraction * idx.size + 0.5))
        perm = rng.permutation(idx.size)
        test_idx.extend(idx[perm[:k]].tolist())
    test_set = set(test_idx)
    train_records = tuple(r for i, r in enumerate(dataset.records) if i not in test_set)
    test_records = tuple(r for i, r in enumerate(dataset.records) if i in test_set)
    meta = dict(dataset.metadata)
    return (
        Dataset(schema=dataset.schema, records=train_records, metadata=meta),
        Dataset(schema=dataset.schema, records=test_records, metadata=dict(meta)),
    )


@dataclass(frozen=True)
class EncodedMatrix:
    """Dense numeric design matrix with one-hot expanded column names."""

    column_names: tuple
    rows: np.ndarray
    row_index: tuple

    @property
    def n_columns(self):
        return len(self.column_names)


@dataclass(frozen=True)
class Encoder:
    """Column layout plus training-set imputation medians.

    The layout depends only on (schema, feature subset), never on record
    order, so encoding is column-stable. Missing numeric/count/boolean cells
    are imputed with the training median; features that allow missing values
    get a companion 0/1 indicator column so the "not mentioned" signal is
    preserved. Missing categoricals leave their one-hot group all zero.
    """

    schema: DatasetSchema
    feature_names: tuple
    column_names: tuple
    column_features: tuple  # parent feature per column, for importance rollups
    medians: dict

    def transform_values(self, values):
        """Encode one validated feature->value mapping into a row vector."""
        row = np.zeros(len(self.column_names), dtype=np.float64)
        pos = 0
        for name in self.feature_names:
            spec = self.schema.feature(name)
            value = values.get(name)
            if spec.kind == "categorical":
                width = len(spec.levels)
                if value is not None:
                    row[pos + spec.levels.index(value)] = 1.0
                pos += width
            else:
                if value is None:
                    row[pos] = self.medians[name]
                elif spec.kind == "boolean":
                    row[pos] = 1.0 if value else 0.0
                else:
                    row[pos] = float(value)
                pos += 1
            if spec.allow_missing:
                row[pos] = 1.0 if value is None else 0.0
                pos += 1
        return row

    def transform(self, dataset):
        if dataset.schema.fingerprint() != self.schema.fingerprint():
            raise DataValidationError("dataset schema does not match encoder schema")
        rows = np.empty((len(dataset.records), len(self.column_names)), dtype=np.float64)
        for i, rec in enumerate(dataset.records):
            rows[i] = self.transform_values(rec.values)
        return EncodedMatrix(
            column_names=self.column_names,
            rows=rows,
            row_index=tuple(range(len(dataset.records))),
        )


def fit_encoder(dataset, feature_subset=None):
    """Compute column layout and imputation medians from training data."""
    schema = dataset.schema
    if feature_subset is None:
        feature_subset = schema.feature_names
    feature_subset = tuple(feature_subset)
    if not feature_subset:
        raise ValueError("feature subset must be non-empty")
    known = set(schema.feature_names)
    bad = [n for n in feature_subset if n not in known]
    if bad:
        raise SchemaError(f"feature subset names not in schema: {bad}")

    column_names = []
    column_features = []
    medians = {}
    for name in feature_subset:
        spec = schema.feature(name)
        if spec.kind == "categorical":
            for lvl in spec.levels:
                column_names.append(f"{name}={lvl}")
                column_features.append(name)
        else:
            column_names.append(name)
            column_features.append(name)
            if spec.allow_missing:
                present = [
                    float(r.values[name]) for r in dataset.records
                    if r.values[name] is not None
                ]
                medians[name] = float(np.median(present)) if present else 0.0
        if spec.allow_missing:
            column_names.append(f"{name}{MISSING_INDICATOR_SUFFIX}")
            column_features.append(name)
    return Encoder(
        schema=schema,
        feature_names=feature_subset,
        column_names=tuple(column_names),
        column_features=tuple(column_features),
        medians=medians,
    )


def encode(dataset, feature_subset=None):
    """Fit an encoder on the dataset and encode it in one step."""
    return fit_encoder(dataset, feature_subset).transform(dataset)
