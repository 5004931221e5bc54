"""Binary logistic regression by penalized maximum likelihood.

The fits here carry no implicit intercept: the constant regressor, when
selected, plays that role. A small ridge penalty (default 1e-4) keeps
coefficients finite on separable data.
"""

import warnings
from dataclasses import dataclass

import numpy as np

DEFAULT_RIDGE = 1e-4
DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-8

_PROB_LO = np.finfo(float).tiny
_PROB_HI = np.nextafter(1.0, 0.0)


def logistic(x):
    """Stable elementwise 1/(1+exp(-x)); never overflows for finite input."""
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ez = np.exp(arr[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class LogisticFit:
    """Result of one binary fit: one coefficient per input column."""

    coefficients: np.ndarray
    converged: bool
    iterations: int
    ridge: float
    degenerate: bool = False


def _degenerate_fit(columns, targets, ridge):
    """Single-class targets: constant fit at the smoothed observed rate.

    If a constant column is available its coefficient reproduces the
    Laplace-smoothed log-odds; otherwise all coefficients stay zero.
    """
    n = targets.shape[0]
    q = (targets.sum() + 1.0) / (n + 2.0)
    coef = np.zeros(columns.shape[1])
    spans = columns.max(axis=0) - columns.min(axis=0)
    constant_cols = np.flatnonzero((spans == 0) & (columns[0] != 0))
    if constant_cols.size:
        j = constant_cols[0]
        coef[j] = np.log(q / (1.0 - q)) / columns[0, j]
    return LogisticFit(coef, converged=True, iterations=0, ridge=ridge, degenerate=True)


def fit_logistic(columns, targets, ridge=DEFAULT_RIDGE, max_iter=DEFAULT_MAX_ITER,
                 tol=DEFAULT_TOL):
    """Maximize the ridge-penalized Bernoulli log-likelihood by Newton steps.

    Parameters
    ----------
    columns : ndarray (n, p)
        Design matrix. No intercept is added.
    targets : ndarray (n,)
        Binary 0/1 targets. If only one value is present, a flagged
        degenerate constant fit is returned instead of optimizing.
    ridge : float
        Penalty strength on every coefficient; keeps separable problems
        finite.
    max_iter, tol : int, float
        Stop when the largest coefficient change falls below ``tol``.
    """
    X = np.asarray(columns, dtype=float)
    t = np.asarray(targets, dtype=float)
    if X.ndim != 2:
        raise ValueError("columns must be a 2-D matrix")
    if t.shape != (X.shape[0],):
        raise ValueError("targets length must match the number of rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(t))):
        raise ValueError("non-finite values in logistic regression inputs")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")

    if np.all(t == t[0]):
        return _degenerate_fit(X, t, ridge)

    p_dim = X.shape[1]
    theta = np.zeros(p_dim)
    eye = np.eye(p_dim)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        z = X @ theta
        prob = logistic(z)
        weights = np.clip(prob * (1.0 - prob), 1e-10, None)
        grad = X.T @ (t - prob) - ridge * theta
        hess = (X * weights[:, None]).T @ X + ridge * eye
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            warnings.warn("singular weighted normal system; using least-squares step",
                          RuntimeWarning)
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        theta = theta + step
        if np.max(np.abs(step)) < tol:
            converged = True
            break
    if not np.all(np.isfinite(theta)):
        raise RuntimeError("logistic fit produced non-finite coefficients")
    return LogisticFit(theta, converged, iterations, ridge)


def predict_probability(fit, columns):
    """Row-wise class-1 probabilities, strictly inside (0, 1).

    Larger linear predictors mean higher class probability; the same
    convention is used everywhere in the package.
    """
    X = np.asarray(columns, dtype=float)
    if X.ndim != 2 or X.shape[1] != fit.coefficients.shape[0]:
        raise ValueError(
            f"expected {fit.coefficients.shape[0]} columns, got shape {X.shape}")
    return np.clip(logistic(X @ fit.coefficients), _PROB_LO, _PROB_HI)


def accuracy(predictions, labels):
    """Fraction of exact matches; float inputs are thresholded at 0.5."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValueError("predictions and labels must have the same length")
    if np.issubdtype(predictions.dtype, np.floating):
        predictions = (predictions >= 0.5).astype(labels.dtype)
    return float(np.mean(predictions == labels))


def err_criterion(x, y):
    """Squared correlation (x.y)^2 / ((x.x)(y.y)) between two vectors."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError("vectors must have the same length")
    xx = float(x @ x)
    yy = float(y @ y)
    if xx == 0.0 or yy == 0.0:
        raise ValueError("err_criterion is undefined for zero-norm vectors")
    xy = float(x @ y)
    return (xy * xy) / (xx * yy)
