"""Greedy forward term selection with Gram-Schmidt orthogonalization.

Each step scores every remaining candidate by K-fold cross-validated
accuracy of a one-vs-all logistic probe, picks the best, orthogonalizes
the pool against the growing basis, and records the accuracy of the
model retrained on the original selected columns.

Scoring details. A lone column through an origin-pinned sigmoid can only
split classes by sign, so the first-step probe pairs the candidate with a
free calibration intercept. From the second step on, the probe measures
the candidate's marginal value: per fold and class, the model fitted on
the already-selected original columns supplies a frozen offset and only
the candidate's coefficient is optimized. The constant term therefore
competes on equal footing (it is valuable exactly when the selected
columns lack an intercept), which is what lets it be ranked like any
other regressor.

Candidate scoring is vectorized across the whole pool; results are
independent of that batching and deterministic for fixed inputs.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import glm

# Squared-norm threshold below which an orthogonalized candidate is
# considered spanned by the basis and removed from the pool.
RESIDUAL_REJECT_TOL = 1e-10

_BASIS_OFFDIAG_TOL = 1e-8
_BASIS_NORM_TOL = 1e-12
_PROBE_MAX_ITER = 50

REASON_NEAR_ZERO = "near-zero-norm"
REASON_DUPLICATE = "duplicate"


@dataclass
class OrthogonalBasis:
    """Unit-norm, mutually orthogonal columns and the terms they came from."""

    q_columns: list = field(default_factory=list)
    source_terms: list = field(default_factory=list)

    def __len__(self):
        return len(self.q_columns)

    @property
    def matrix(self):
        return np.column_stack(self.q_columns)

    def append(self, q, term):
        self.q_columns.append(np.asarray(q, dtype=float))
        self.source_terms.append(term)

    def max_offdiagonal(self):
        """Largest |q_i . q_j| over i != j (0.0 with fewer than 2 columns)."""
        if len(self.q_columns) < 2:
            return 0.0
        gram = self.matrix.T @ self.matrix
        np.fill_diagonal(gram, 0.0)
        return float(np.max(np.abs(gram)))

    def norm_deviation(self):
        """Largest |1 - ||q_i||| over the basis columns."""
        if not self.q_columns:
            return 0.0
        norms = np.linalg.norm(self.matrix, axis=0)
        return float(np.max(np.abs(norms - 1.0)))


@dataclass(frozen=True)
class SelectionStep:
    """One accepted term with its probe score and retrained CV statistics."""

    term: object
    score: float
    cv_mean: float
    cv_max: float
    cv_fold_accuracies: tuple

    def to_dict(self):
        return {
            "term": self.term.to_dict(),
            "score": self.score,
            "cv_mean": self.cv_mean,
            "cv_max": self.cv_max,
            "cv_fold_accuracies": list(self.cv_fold_accuracies),
        }


@dataclass(frozen=True)
class RejectedTerm:
    term: object
    reason: str
    step: int

    def to_dict(self):
        return {"term": self.term.to_dict(), "reason": self.reason, "step": self.step}


@dataclass(frozen=True)
class SelectionTrace:
    """Ordered record of the selection run."""

    steps: tuple
    rejected_terms: tuple

    def to_dict(self):
        return {
            "steps": [s.to_dict() for s in self.steps],
            "rejected_terms": [r.to_dict() for r in self.rejected_terms],
        }

    @property
    def terms(self):
        return [s.term for s in self.steps]


def normalize_column(v):
    """Scale a vector to unit Euclidean norm."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero-norm vector")
    return v / norm


def orthogonalize_against(v, basis):
    """Classical Gram-Schmidt residual with one re-orthogonalization pass."""
    v = np.asarray(v, dtype=float)
    if not len(basis):
        return v.copy()
    q_matrix = basis.matrix
    if q_matrix.shape[0] != v.shape[0]:
        raise ValueError("vector length does not match the basis")
    residual = v - q_matrix @ (q_matrix.T @ v)
    residual = residual - q_matrix @ (q_matrix.T @ residual)
    return residual


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _newton_intercept_slope(columns, targets, ridge, max_iter, tol):
    """Fit intercept+slope per column, all columns at once (2x2 solves)."""
    n_rows, m = columns.shape
    a = np.zeros(m)
    b = np.zeros(m)
    active = np.ones(m, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        cols = columns[:, idx]
        z = a[idx][None, :] + cols * b[idx][None, :]
        prob = _sigmoid(z)
        w = np.clip(prob * (1.0 - prob), 1e-10, None)
        resid = targets[:, None] - prob
        g1 = resid.sum(axis=0) - ridge * a[idx]
        g2 = np.einsum("ij,ij->j", cols, resid) - ridge * b[idx]
        h11 = w.sum(axis=0) + ridge
        h12 = np.einsum("ij,ij->j", w, cols)
        h22 = np.einsum("ij,ij,ij->j", w, cols, cols) + ridge
        det = h11 * h22 - h12 * h12
        da = (h22 * g1 - h12 * g2) / det
        db = (h11 * g2 - h12 * g1) / det
        a[idx] += da
        b[idx] += db
        done = np.maximum(np.abs(da), np.abs(db)) < tol
        active[idx[done]] = False
    return a, b


def _newton_slope_with_offset(columns, targets, offset, ridge, max_iter, tol):
    """Fit one coefficient per column on top of a frozen linear predictor."""
    m = columns.shape[1]
    theta = np.zeros(m)
    active = np.ones(m, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        cols = columns[:, idx]
        z = offset[:, None] + cols * theta[idx][None, :]
        prob = _sigmoid(z)
        w = np.clip(prob * (1.0 - prob), 1e-10, None)
        grad = np.einsum("ij,ij->j", cols, targets[:, None] - prob) - ridge * theta[idx]
        hess = np.einsum("ij,ij,ij->j", w, cols, cols) + ridge
        step = grad / hess
        theta[idx] += step
        done = np.abs(step) < tol
        active[idx[done]] = False
    return theta


def _argmax_update(best_prob, best_class, prob, class_index):
    improved = prob > best_prob  # strict: ties stay with the lowest class
    best_prob[improved] = prob[improved]
    best_class[improved] = class_index


def _probe_scores(candidates, labels, folds, n_classes, ridge, base_columns=None,
                  tol=glm.DEFAULT_TOL):
    """Mean K-fold OVA accuracy for every candidate column.

    With ``base_columns`` None each candidate is probed jointly with a
    calibration intercept; otherwise the base model fitted per fold and
    class supplies a frozen offset and the candidate adds one coefficient.
    """
    fold_accs = np.zeros((folds.n_folds, candidates.shape[1]))
    for f_idx, (train_mask, test_mask) in enumerate(folds.masks()):
        cand_tr = candidates[train_mask]
        cand_te = candidates[test_mask]
        y_tr = labels[train_mask]
        y_te = labels[test_mask]
        best_prob = np.full(cand_te.shape, -np.inf)
        best_class = np.zeros(cand_te.shape, dtype=np.int64)
        for c in range(n_classes):
            t = (y_tr == c).astype(float)
            if base_columns is None:
                a, b = _newton_intercept_slope(cand_tr, t, ridge, _PROBE_MAX_ITER, tol)
                prob = _sigmoid(a[None, :] + cand_te * b[None, :])
            else:
                base = glm.fit_logistic(base_columns[train_mask], t, ridge)
                z0_tr = base_columns[train_mask] @ base.coefficients
                z0_te = base_columns[test_mask] @ base.coefficients
                theta = _newton_slope_with_offset(cand_tr, t, z0_tr, ridge,
                                                  _PROBE_MAX_ITER, tol)
                prob = _sigmoid(z0_te[:, None] + cand_te * theta[None, :])
            _argmax_update(best_prob, best_class, prob, c)
        fold_accs[f_idx] = (best_class == y_te[:, None]).mean(axis=0)
    return fold_accs.mean(axis=0)


def score_candidate(w, labels, folds, ridge=glm.DEFAULT_RIDGE):
    """K-fold CV accuracy of a one-vs-all logistic probe on a single column.

    Per fold, one binary model per class is fitted on the out-of-fold
    rows (the column plus a calibration intercept), held-in rows are
    predicted by argmax of the class probabilities, and the per-fold
    accuracies are averaged. Deterministic given the folds.
    """
    w = np.asarray(w, dtype=float).ravel()
    labels = np.asarray(labels, dtype=np.int64)
    if w.shape[0] != labels.shape[0] or w.shape[0] != folds.n_samples:
        raise ValueError("column, labels, and folds must cover the same rows")
    if not np.all(np.isfinite(w)):
        raise ValueError("candidate column contains non-finite values")
    n_classes = int(labels.max()) + 1
    return float(_probe_scores(w[:, None], labels, folds, n_classes, ridge)[0])


def _ova_cv_stats(columns, labels, folds, n_classes, ridge):
    """Per-fold OVA accuracy of the exact model retrained on ``columns``."""
    accs = np.zeros(folds.n_folds)
    for f_idx, (train_mask, test_mask) in enumerate(folds.masks()):
        y_tr = labels[train_mask]
        y_te = labels[test_mask]
        present = np.bincount(y_tr, minlength=n_classes) > 0
        if not present.all():
            warnings.warn("a cross-validation fold is missing a class; "
                          "its model degenerates to a constant fit", RuntimeWarning)
        best_prob = np.full(y_te.shape[0], -np.inf)
        best_class = np.zeros(y_te.shape[0], dtype=np.int64)
        for c in range(n_classes):
            fit = glm.fit_logistic(columns[train_mask], (y_tr == c).astype(float), ridge)
            prob = glm.predict_probability(fit, columns[test_mask])
            _argmax_update(best_prob, best_class, prob, c)
        accs[f_idx] = np.mean(best_class == y_te)
    return accs


def select_terms(dictionary, labels, k, folds, ridge=glm.DEFAULT_RIDGE):
    """Forward-select up to ``k`` dictionary terms.

    The first step scores every unit-normalized candidate and picks the
    argmax (ties go to the lowest dictionary index). Later steps
    orthogonalize the remaining candidates against the accepted basis,
    drop those with squared residual norm below ``RESIDUAL_REJECT_TOL``,
    score the re-normalized residuals, and pick the argmax. After every
    acceptance the one-vs-all model is retrained on the selected original
    columns and its K-fold accuracy recorded. Selection stops early only
    when the pool is exhausted.

    Returns
    -------
    (SelectionTrace, OrthogonalBasis)
    """
    if k < 1:
        raise ValueError(f"must select at least one term, got k={k}")
    if dictionary.n_terms == 0:
        raise ValueError("candidate dictionary is empty")
    matrix = dictionary.matrix
    terms = dictionary.terms
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != matrix.shape[0]:
        raise ValueError("labels length does not match the dictionary rows")
    if folds.n_samples != matrix.shape[0]:
        raise ValueError("fold assignment does not cover the dictionary rows")
    n_classes = int(labels.max()) + 1

    rejected = []
    alive = np.ones(dictionary.n_terms, dtype=bool)
    seen_terms = set()
    for j, term in enumerate(terms):
        if term in seen_terms:
            alive[j] = False
            rejected.append(RejectedTerm(term, REASON_DUPLICATE, 0))
        seen_terms.add(term)

    norms = np.linalg.norm(matrix, axis=0)
    for j in np.flatnonzero((norms == 0.0) & alive):
        alive[j] = False
        rejected.append(RejectedTerm(terms[j], REASON_NEAR_ZERO, 1))
    normalized = matrix / np.where(norms > 0.0, norms, 1.0)[None, :]

    basis = OrthogonalBasis()
    steps = []
    alpha_columns = None
    for step_no in range(1, k + 1):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        if step_no == 1:
            residuals = normalized[:, idx]
        else:
            q_matrix = basis.matrix
            block = normalized[:, idx]
            residuals = block - q_matrix @ (q_matrix.T @ block)
            residuals -= q_matrix @ (q_matrix.T @ residuals)
            sq_norms = np.einsum("ij,ij->j", residuals, residuals)
            spanned = sq_norms < RESIDUAL_REJECT_TOL
            if spanned.any():
                for j in idx[spanned]:
                    rejected.append(RejectedTerm(terms[j], REASON_NEAR_ZERO, step_no))
                alive[idx[spanned]] = False
                idx = idx[~spanned]
                if idx.size == 0:
                    break
                residuals = residuals[:, ~spanned]
                sq_norms = sq_norms[~spanned]
            residuals = residuals / np.sqrt(sq_norms)[None, :]
        scores = _probe_scores(residuals, labels, folds, n_classes, ridge,
                               base_columns=alpha_columns)
        pos = int(np.argmax(scores))  # first maximum: lowest dictionary index wins
        chosen = int(idx[pos])

        basis.append(residuals[:, pos], terms[chosen])
        offdiag = basis.max_offdiagonal()
        drift = basis.norm_deviation()
        if offdiag > _BASIS_OFFDIAG_TOL or drift > _BASIS_NORM_TOL:
            raise RuntimeError(
                f"orthogonal basis degraded at step {step_no}: "
                f"max off-diagonal {offdiag:.2e}, norm deviation {drift:.2e}")

        alive[chosen] = False
        column = matrix[:, chosen][:, None]
        alpha_columns = column if alpha_columns is None \
            else np.hstack([alpha_columns, column])
        fold_accs = _ova_cv_stats(alpha_columns, labels, folds, n_classes, ridge)
        steps.append(SelectionStep(
            term=terms[chosen],
            score=float(scores[pos]),
            cv_mean=float(fold_accs.mean()),
            cv_max=float(fold_accs.max()),
            cv_fold_accuracies=tuple(float(a) for a in fold_accs),
        ))

    if not steps:
        raise ValueError("all candidates were rejected before any selection")
    return SelectionTrace(tuple(steps), tuple(rejected)), basis
