"""Metrics and the four-way model comparison.

Absolute-error statistics are reported in euros and rendered in thousands of
euros only at display time. The error sd uses the population (1/n) form, and
the sd is of absolute errors; both conventions are fixed here so the four
comparison rows stay comparable.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from . import forest as rf
from . import linreg, quantreg
from .data import fit_encoder

COMPARISON_VARIANTS = ("ols", "quantile", "rf_x_ols", "rf_x_quantile")
VARIANT_LABELS = {
    "ols": "OLS regression",
    "quantile": "Quantile regression",
    "rf_x_ols": "RF x OLS regression",
    "rf_x_quantile": "RF x Quantile regression",
}


@dataclass(frozen=True)
class ClassificationReport:
    accuracy: float
    auc: float  # None when the labels contain a single class
    tp: int
    fp: int
    tn: int
    fn: int
    n: int

    def to_dict(self):
        return {
            "accuracy": self.accuracy, "auc": self.auc, "tp": self.tp,
            "fp": self.fp, "tn": self.tn, "fn": self.fn, "n": self.n,
        }


@dataclass(frozen=True)
class RegressionReport:
    mean_ae: float
    median_ae: float
    sd_ae: float
    r_squared: float
    n: int
    mean_predicted: float
    mean_actual: float

    def to_dict(self):
        return {
            "mean_ae": self.mean_ae, "median_ae": self.median_ae,
            "sd_ae": self.sd_ae, "r_squared": self.r_squared, "n": self.n,
            "mean_predicted": self.mean_predicted, "mean_actual": self.mean_actual,
        }


@dataclass(frozen=True)
class ComparisonTable:
    subset: str   # all | agreed | contested
    rows: dict    # variant -> RegressionReport
    missing: dict  # variant -> reason, for rows that could not be fitted

    def to_dict(self):
        return {
            "subset": self.subset,
            "rows": {k: v.to_dict() for k, v in self.rows.items()},
            "missing": dict(self.missing),
        }


@dataclass(frozen=True)
class PcaProjection:
    loadings: tuple
    column_names: tuple
    explained_variance_ratio: float
    all_ratios: tuple
    cases: tuple            # (pc1 coordinate, predicted, actual) triples
    dropped_columns: tuple


def classification_report(labels, probabilities, threshold=0.5):
    """Accuracy, confusion counts, and midrank (Mann-Whitney) AUC.

    With a single class present the AUC is undefined and reported as None;
    accuracy is still computed. Constant probabilities give AUC 0.5 by the
    midrank tie convention.
    """
    labels = np.asarray(labels, dtype=np.int64)
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if labels.shape != probabilities.shape or labels.ndim != 1:
        raise ValueError("labels and probabilities must be 1-D with equal length")
    if not set(np.unique(labels)) <= {0, 1}:
        raise ValueError("labels must be binary 0/1")
    n = len(labels)
    if n == 0:
        raise ValueError("empty input")
    predicted = probabilities >= threshold
    actual = labels == 1
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    tn = int(np.sum(~predicted & ~actual))
    fn = int(np.sum(~predicted & actual))
    accuracy = (tp + tn) / n

    n_pos = int(actual.sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        auc = None
    else:
        ranks = rankdata(probabilities, method="average")
        auc = float((ranks[actual].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))
    return ClassificationReport(
        accuracy=float(accuracy), auc=auc, tp=tp, fp=fp, tn=tn, fn=fn, n=n
    )


def regression_report(actual, predicted):
    """Mean/median/sd of absolute errors plus R-squared on the raw values."""
    actual = np.asarray(actual, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    if actual.shape != predicted.shape or actual.ndim != 1:
        raise ValueError("actual and predicted must be 1-D with equal length")
    n = len(actual)
    if n < 2:
        raise ValueError("need at least 2 cases")
    errors = np.abs(actual - predicted)
    ss_res = float(np.sum((actual - predicted) ** 2))
    ybar = actual.mean()
    ss_tot = float(np.sum((actual - ybar) ** 2))
    degenerate = ss_tot <= n * (1e-12 * max(1.0, abs(ybar))) ** 2
    r2 = 0.0 if degenerate else 1.0 - ss_res / ss_tot
    return RegressionReport(
        mean_ae=float(errors.mean()),
        median_ae=float(np.median(errors)),
        sd_ae=float(errors.std()),  # population form
        r_squared=float(r2),
        n=n,
        mean_predicted=float(predicted.mean()),
        mean_actual=float(actual.mean()),
    )


def _regressor_population(dataset):
    idx = [i for i, r in enumerate(dataset.records) if r.grant and r.amount > 0]
    return idx


def compare_models(train, test, config):
    """Fit the four variants on train, evaluate absolute errors on test.

    The plain rows are the step-2 amount regressions by themselves: fitted on
    the granted-with-positive-amount population, then asked to predict an
    amount for every test case, non-granted included. Their intercepts make a
    near-zero prediction unreachable, which is exactly the weakness the table
    exhibits. The two-part rows multiply the same fitted regressions (clipped
    at 0) by the grant classifier's output, so with a perfect classifier on
    fully granted data the paired rows coincide bit for bit. Tables for the
    agreed and contested subsamples accompany the full-test table.
    """
    from .data import Dataset
    from .hurdle import resolve_feature_lists, regressor_design

    cls_features, reg_features = resolve_feature_lists(train.schema, config)

    cls_encoder = fit_encoder(train, cls_features)
    cls_train = cls_encoder.transform(train)
    labels_train = train.grant_labels()
    model_forest = rf.fit_forest(
        cls_train.rows, labels_train, config.forest,
        column_names=cls_train.column_names,
        column_features=cls_encoder.column_features,
    )
    cls_test = cls_encoder.transform(test)
    probs = rf.predict_proba_many(model_forest, cls_test.rows)
    grant_hat = (probs >= 0.5).astype(np.float64)
    combine = probs if config.combination_mode == "probability" else grant_hat

    amounts_test = test.amounts()
    rows = {}
    missing = {}

    reg_idx = _regressor_population(train)
    if len(reg_idx) < 2:
        for variant in COMPARISON_VARIANTS:
            missing[variant] = "no granted cases with positive amounts to fit on"
    else:
        granted = Dataset(schema=train.schema,
                          records=tuple(train.records[i] for i in reg_idx))
        g_encoder = fit_encoder(granted, reg_features)
        g_train = g_encoder.transform(granted)
        g_test = g_encoder.transform(test)
        g_cols, g_names, _ = regressor_design(granted, config, g_encoder, g_train)
        g_amounts = granted.amounts()
        try:
            m_ols, _ = linreg.fit_ols(g_train.rows[:, g_cols], g_amounts, g_names)
            raw = linreg.predict_many(m_ols, g_test.rows[:, g_cols])
            rows["ols"] = raw
            rows["rf_x_ols"] = combine * np.maximum(0.0, raw)
        except Exception as exc:  # per-row propagation: partial tables allowed
            missing["ols"] = missing["rf_x_ols"] = str(exc)
        try:
            m_q = quantreg.fit_quantile(
                g_train.rows[:, g_cols], g_amounts, config.tau, g_names
            )
            raw = quantreg.predict_many(m_q, g_test.rows[:, g_cols])
            rows["quantile"] = raw
            rows["rf_x_quantile"] = combine * np.maximum(0.0, raw)
        except Exception as exc:
            missing["quantile"] = missing["rf_x_quantile"] = str(exc)

    tables = []
    subsets = [("all", np.ones(len(test.records), dtype=bool))]
    agreed_mask = np.array([r.parties_agreed for r in test.records], dtype=bool)
    if agreed_mask.any():
        subsets.append(("agreed", agreed_mask))
    if (~agreed_mask).any():
        subsets.append(("contested", ~agreed_mask))
    for name, mask in subsets:
        sub_rows = {}
        sub_missing = dict(missing)
        for variant, preds in rows.items():
            if int(mask.sum()) < 2:
                sub_missing[variant] = "fewer than 2 cases in subset"
                continue
            sub_rows[variant] = regression_report(amounts_test[mask], preds[mask])
        tables.append(ComparisonTable(subset=name, rows=sub_rows, missing=sub_missing))
    return tables


def render_comparison_text(tables):
    """Aligned text table, absolute errors in thousands of euros."""
    lines = []
    for table in tables:
        lines.append(f"absolute errors in prediction (thousands of euros) | subset: {table.subset}")
        lines.append(f"{'model':<28}{'mean':>9}{'median':>9}{'sigma':>9}{'r2':>7}")
        for variant in COMPARISON_VARIANTS:
            report = table.rows.get(variant)
            if report is None:
                reason = table.missing.get(variant, "unavailable")
                lines.append(f"{VARIANT_LABELS[variant]:<28}  [{reason}]")
                continue
            lines.append(
                f"{VARIANT_LABELS[variant]:<28}"
                f"{report.mean_ae / 1000:>9.2f}"
                f"{report.median_ae / 1000:>9.2f}"
                f"{report.sd_ae / 1000:>9.2f}"
                f"{report.r_squared:>7.2f}"
            )
        lines.append("")
    return "\n".join(lines)


def pca_projection(X, predictions, actuals, column_names=None):
    """First principal component of the correlation matrix, plus case triples.

    Columns are standardized; zero-variance columns are dropped with a
    warning. The sign convention makes the largest-magnitude loading
    positive; the explained ratio is the top eigenvalue's share.
    """
    X = np.asarray(X, dtype=np.float64)
    predictions = np.asarray(predictions, dtype=np.float64)
    actuals = np.asarray(actuals, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError("need a matrix with at least 2 columns")
    n = X.shape[0]
    if n < 3:
        raise ValueError("need at least 3 rows")
    if len(predictions) != n or len(actuals) != n:
        raise ValueError("predictions and actuals must match the row count")
    if column_names is None:
        column_names = tuple(f"x{j}" for j in range(X.shape[1]))
    column_names = tuple(column_names)

    sd = X.std(axis=0)
    keep = sd > 0
    dropped = tuple(name for name, k in zip(column_names, keep) if not k)
    if dropped:
        warnings.warn(f"dropping zero-variance column(s) {list(dropped)}", stacklevel=2)
    if not keep.any():
        raise ValueError("all columns have zero variance")
    Xk = X[:, keep]
    Z = (Xk - Xk.mean(axis=0)) / Xk.std(axis=0)
    corr = (Z.T @ Z) / n
    eigvals, eigvecs = np.linalg.eigh(corr)
    eigvals = np.maximum(eigvals, 0.0)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    first = eigvecs[:, order[0]]
    if first[np.argmax(np.abs(first))] < 0:
        first = -first
    total = eigvals.sum()
    ratios = eigvals / total if total > 0 else np.zeros_like(eigvals)
    pc1 = Z @ first
    return PcaProjection(
        loadings=tuple(float(v) for v in first),
        column_names=tuple(name for name, k in zip(column_names, keep) if k),
        explained_variance_ratio=float(ratios[0]),
        all_ratios=tuple(float(v) for v in ratios),
        cases=tuple(
            (float(a), float(b), float(c)) for a, b, c in zip(pc1, predictions, actuals)
        ),
        dropped_columns=dropped,
    )
