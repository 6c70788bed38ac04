"""Quantile regression for a robust amount model (default: conditional median).

The solver minimizes a logistic-smoothed pinball loss by Newton steps on a
weighted least-squares kernel, with the smoothing width driven toward zero on
a geometric schedule. Smoothing makes the flat optima of the exact problem
well-posed: an even-n intercept-only median converges to the midpoint of the
optimal interval. Tests certify the result against an LP oracle and a
coefficient-perturbation check.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .linreg import _design, _qr_or_raise

_EPS_SHRINK = 0.15
_MAX_NEWTON = 80


@dataclass(frozen=True)
class QuantileModel:
    tau: float
    intercept: float
    coefficients: tuple
    column_names: tuple
    achieved_loss: float  # mean pinball loss on the training data

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must be strictly inside (0, 1), got {self.tau}")
        if len(self.coefficients) != len(self.column_names):
            raise ValueError("coefficient count must equal column count")

    def terms(self):
        out = [("Intercept", self.intercept)]
        out.extend(zip(self.column_names, self.coefficients))
        return out


def pinball_loss(residual, tau):
    """tau * r for r >= 0 else (tau - 1) * r; the check-function loss."""
    r = np.asarray(residual, dtype=np.float64)
    out = np.where(r >= 0, tau * r, (tau - 1.0) * r)
    return float(out) if out.ndim == 0 else out


def _smoothed_loss(r, tau, eps):
    # tau*r + eps*log(1 + exp(-r/eps)), computed stably for large |r|/eps
    with np.errstate(invalid="ignore"):
        soft = eps * np.logaddexp(0.0, -r / eps)
    total = np.sum(tau * r + soft)
    return float(total) if np.isfinite(total) else math.inf


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_quantile(X, y, tau=0.5, column_names=None, max_iter=_MAX_NEWTON):
    """Fit coefficients minimizing mean pinball loss at the given quantile.

    Deterministic; requires n > p + 1 and a full-rank design (checked the
    same way as the OLS fit). Raises ConvergenceError, reporting the achieved
    loss and a gap estimate, if the final smoothing stage fails to converge.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be strictly inside (0, 1), got {tau}")
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
    _qr_or_raise(A, column_names)

    # Standardize regressor columns for conditioning; intercept absorbs means.
    mu = A[:, 1:].mean(axis=0) if p else np.zeros(0)
    sd = A[:, 1:].std(axis=0) if p else np.zeros(0)
    sd = np.where(sd > 0, sd, 1.0)
    Z = A.copy()
    if p:
        Z[:, 1:] = (A[:, 1:] - mu) / sd

    # Warm start from the least-squares solution on the standardized design.
    beta, *_ = np.linalg.lstsq(Z, y, rcond=None)
    r = y - Z @ beta

    med = float(np.median(y))
    robust_scale = float(np.median(np.abs(y - med)))
    scale = max(robust_scale, 1e-9 * (1.0 + abs(med)), 1e-12)
    eps = max(float(np.std(r)), 1e-3 * scale, 1e-12)
    eps_min = 2e-7 * scale

    # Stage convergence is judged by the Newton step size and loss progress,
    # not the gradient: at small smoothing widths the sigmoid saturates and
    # gradient magnitudes underflow long before the iterate stops moving.
    converged = True
    while True:
        converged = False
        for _ in range(max_iter):
            r = y - Z @ beta
            s = _sigmoid(-r / eps)          # in (0, 1)
            grad = Z.T @ (s - tau)          # d(loss)/d(beta)
            w = s * (1.0 - s) / eps
            H = (Z * w[:, None]).T @ Z
            H[np.diag_indices_from(H)] += 1e-12 * max(np.trace(H) / (p + 1), 1e-300)
            try:
                step = np.linalg.solve(H, -grad)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(H, -grad, rcond=None)[0]
            xtol = 1e-12 * max(1.0, float(np.max(np.abs(beta))))
            if np.max(np.abs(step)) <= xtol:
                converged = True
                break
            f0 = _smoothed_loss(r, tau, eps)
            slope = float(grad @ step)
            t = 1.0
            f_new = None
            while t >= 2.0**-40:
                cand = beta + t * step
                f_cand = _smoothed_loss(y - Z @ cand, tau, eps)
                if f_cand <= f0 + 1e-4 * t * slope:
                    beta = cand
                    f_new = f_cand
                    break
                t *= 0.5
            if f_new is None:
                # Flat to machine precision at this smoothing width.
                converged = True
                break
            if f0 - f_new <= 1e-14 * max(1.0, abs(f0)):
                # Progress below float resolution of the loss itself.
                converged = True
                break
        if eps <= eps_min:
            break
        eps = max(eps * _EPS_SHRINK, eps_min)

    r = y - Z @ beta
    achieved = float(np.mean(pinball_loss(r, tau)))
    if not converged:
        grad_norm = float(np.max(np.abs(Z.T @ (_sigmoid(-r / eps) - tau))))
        raise ConvergenceError(
            f"quantile fit did not converge at the final smoothing stage "
            f"(achieved mean pinball loss {achieved:.6g}, gradient norm {grad_norm:.3g})",
            achieved_loss=achieved,
            gap_estimate=grad_norm / n,
        )

    if p:
        coef = beta[1:] / sd
        intercept = float(beta[0] - np.dot(coef, mu))
    else:
        coef = np.zeros(0)
        intercept = float(beta[0])
    return QuantileModel(
        tau=float(tau),
        intercept=intercept,
        coefficients=tuple(float(c) for c in coef),
        column_names=column_names,
        achieved_loss=achieved,
    )


def predict(model, row):
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
