"""Ordinary least squares for the amount model, with forward stepwise selection.

Solved by Householder QR; rank deficiency is a hard error that names the
dependent columns rather than silently dropping or ridging them, because a
monetary regression with silently altered columns misreports coefficients.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.linalg import solve_triangular

from .errors import RankDeficiencyError


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    coefficients: tuple
    column_names: tuple

    def __post_init__(self):
        if len(self.coefficients) != len(self.column_names):
            raise ValueError("coefficient count must equal column count")

    def terms(self):
        """(name, estimate) pairs, intercept first."""
        out = [("Intercept", self.intercept)]
        out.extend(zip(self.column_names, self.coefficients))
        return out


@dataclass(frozen=True)
class FitDiagnostics:
    r_squared: float
    adjusted_r_squared: float
    residual_sd: float
    standard_errors: tuple  # intercept first, then columns
    t_statistics: tuple
    p_values: tuple
    n: int
    p: int


@dataclass(frozen=True)
class StepwiseTrace:
    steps: tuple      # (column name, partial-F p-value at addition)
    warnings: tuple   # (column name, reason) for skipped candidates
    selected: tuple
    stopped_reason: str


def _design(X, add_intercept=True):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError("matrix must be 2-D")
    n = X.shape[0]
    if add_intercept:
        return np.hstack([np.ones((n, 1)), X])
    return X


def _qr_or_raise(A, column_names):
    """Reduced QR; raises RankDeficiencyError naming near-dependent columns."""
    Q, R = np.linalg.qr(A)
    diag = np.abs(np.diag(R))
    tol = max(A.shape) * np.finfo(np.float64).eps * (diag.max() if diag.size else 0.0)
    bad = np.nonzero(diag <= tol)[0]
    if bad.size:
        labels = ["Intercept"] + list(column_names)
        names = [labels[j] for j in bad]
        raise RankDeficiencyError(
            f"design matrix is rank deficient: column(s) {names} are linear "
            "combinations of the preceding columns",
            columns=names,
        )
    return Q, R


def _zero_variance(y):
    y = np.asarray(y, dtype=np.float64)
    ybar = y.mean()
    ss_tot = float(np.sum((y - ybar) ** 2))
    thresh = len(y) * (1e-12 * max(1.0, abs(ybar))) ** 2
    return ss_tot, ss_tot <= thresh


def fit_ols(X, y, column_names=None):
    """Least-squares fit with intercept; returns (LinearModel, FitDiagnostics).

    Requires n > p + 1 and a full-rank design. R-squared is defined as 0 when
    y has (numerically) zero variance, keeping reports total.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    A = _design(X)
    n, p_plus_1 = A.shape
    p = p_plus_1 - 1
    if column_names is None:
        column_names = tuple(f"x{j}" for j in range(p))
    column_names = tuple(column_names)
    if len(column_names) != p:
        raise ValueError("column_names length must match matrix width")
    if len(y) != n:
        raise ValueError("matrix and y disagree on row count")
    if n <= p + 1:
        raise ValueError(f"need n > p + 1 (n={n}, p={p})")

    Q, R = _qr_or_raise(A, column_names)
    beta = solve_triangular(R, Q.T @ y)
    fitted = A @ beta
    resid = y - fitted
    ss_res = float(resid @ resid)
    ss_tot, degenerate = _zero_variance(y)

    if degenerate:
        r2 = 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    dof = n - p - 1
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / dof
    sigma2 = ss_res / dof
    # cov(beta) = sigma^2 (A'A)^-1 = sigma^2 R^-1 R^-T
    r_inv = solve_triangular(R, np.eye(p + 1))
    cov = sigma2 * (r_inv @ r_inv.T)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stats = np.where(se > 0, beta / se, np.inf * np.sign(beta))
        t_stats = np.where(beta == 0, 0.0, t_stats)
    p_values = 2.0 * stats.t.sf(np.abs(t_stats), dof)

    model = LinearModel(
        intercept=float(beta[0]),
        coefficients=tuple(float(b) for b in beta[1:]),
        column_names=column_names,
    )
    diag = FitDiagnostics(
        r_squared=float(r2),
        adjusted_r_squared=float(adj_r2),
        residual_sd=float(math.sqrt(sigma2)),
        standard_errors=tuple(float(s) for s in se),
        t_statistics=tuple(float(t) for t in t_stats),
        p_values=tuple(float(v) for v in p_values),
        n=n,
        p=p,
    )
    return model, diag


def predict(model, row):
    """intercept + coefficients . row; may be negative (clipping is the
    hurdle combiner's concern)."""
    row = np.asarray(row, dtype=np.float64).ravel()
    if row.shape[0] != len(model.column_names):
        raise ValueError(
            f"row has {row.shape[0]} values, model expects {len(model.column_names)}"
        )
    return float(model.intercept + np.dot(np.asarray(model.coefficients), row))


def predict_many(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(model.column_names):
        raise ValueError("matrix width does not match model columns")
    return model.intercept + X @ np.asarray(model.coefficients)


def _ss_res(X_cols, y):
    A = _design(X_cols) if X_cols is not None else np.ones((len(y), 1))
    Q, R = np.linalg.qr(A)
    beta = solve_triangular(R, Q.T @ y)
    r = y - A @ beta
    return float(r @ r)


def stepwise_forward(X, y, column_names=None, candidates=None, entry_p=0.05,
                     max_steps=None):
    """Forward selection by the partial-F test.

    Each step adds the candidate with the smallest p-value for the one-column
    F test against the current model; stops when the best p-value is >=
    entry_p, candidates run out, max_steps is hit, or degrees of freedom are
    exhausted. Ties break by larger adjusted-R-squared gain, then lower
    column index. Candidates collinear with the selected set are dropped with
    a warning entry in the trace. Returns (trace, model, diagnostics) with
    the model refitted on the selected set.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("matrix must be 2-D")
    y = np.asarray(y, dtype=np.float64).ravel()
    n, p_all = X.shape
    if column_names is None:
        column_names = tuple(f"x{j}" for j in range(p_all))
    column_names = tuple(column_names)
    name_to_col = {name: j for j, name in enumerate(column_names)}
    if candidates is None:
        candidates = list(column_names)
    else:
        candidates = list(candidates)
        unknown = [c for c in candidates if c not in name_to_col]
        if unknown:
            raise ValueError(f"unknown candidate column(s): {unknown}")
    if not candidates:
        raise ValueError("candidate list must be non-empty")

    selected = []
    steps = []
    warnings_out = []
    remaining = list(candidates)
    stopped_reason = "candidates_exhausted"

    def adj_r2(cols):
        if not cols:
            return 0.0
        _, d = fit_ols(X[:, cols], y, tuple(column_names[j] for j in cols))
        return d.adjusted_r_squared

    while remaining:
        if max_steps is not None and len(steps) >= max_steps:
            stopped_reason = "max_steps"
            break
        p_next = len(selected) + 1
        dof_full = n - p_next - 1
        if dof_full < 1:
            stopped_reason = "degrees_of_freedom_exhausted"
            break
        sel_cols = [name_to_col[s] for s in selected]
        ss_reduced = _ss_res(X[:, sel_cols] if sel_cols else None, y)
        base_adj = adj_r2(sel_cols)

        best = None  # (p_value, -adj_gain, col_index, name, ss_full)
        dropped = []
        for name in remaining:
            j = name_to_col[name]
            cols = sel_cols + [j]
            try:
                _qr_or_raise(_design(X[:, cols]), tuple(column_names[c] for c in cols))
            except RankDeficiencyError:
                warnings_out.append(
                    (name, "collinear with the selected set; skipped")
                )
                dropped.append(name)
                continue
            ss_full = _ss_res(X[:, cols], y)
            if ss_full <= 0.0:
                p_value = 0.0
            else:
                f_stat = max(0.0, ss_reduced - ss_full) / (ss_full / dof_full)
                p_value = float(stats.f.sf(f_stat, 1, dof_full))
            gain = adj_r2(cols) - base_adj
            key = (p_value, -gain, j)
            if best is None or key < best[0]:
                best = (key, name)
        for name in dropped:
            remaining.remove(name)
        if best is None:
            stopped_reason = "candidates_exhausted"
            break
        (p_value, _, _), name = best
        if p_value >= entry_p:
            stopped_reason = "entry_threshold"
            break
        selected.append(name)
        remaining.remove(name)
        steps.append((name, p_value))

    sel_cols = [name_to_col[s] for s in selected]
    if selected:
        model, diag = fit_ols(X[:, sel_cols], y, tuple(selected))
    else:
        model, diag = fit_ols(np.empty((n, 0)), y, ())
    trace = StepwiseTrace(
        steps=tuple(steps),
        warnings=tuple(warnings_out),
        selected=tuple(selected),
        stopped_reason=stopped_reason,
    )
    return trace, model, diag
