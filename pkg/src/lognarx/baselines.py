"""Brute-force K-nearest-neighbors baseline for the method comparison."""

from dataclasses import dataclass

import numpy as np

_QUERY_CHUNK = 256

EUCLIDEAN = "euclidean"
MINKOWSKI = "minkowski"


@dataclass(frozen=True)
class KnnConfig:
    k_neighbors: int = 10
    metric: str = EUCLIDEAN
    p: float = 3.0  # Minkowski exponent; ignored for the euclidean metric

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if self.metric not in (EUCLIDEAN, MINKOWSKI):
            raise ValueError(f"metric must be {EUCLIDEAN!r} or {MINKOWSKI!r}")
        if self.p < 1:
            raise ValueError("Minkowski exponent must be >= 1")

    @property
    def exponent(self):
        return 2.0 if self.metric == EUCLIDEAN else float(self.p)


def knn_predict(train, query, config):
    """Majority vote over the k nearest training rows for each query row.

    Distance ties resolve toward the lower training-row index and vote
    ties toward the lowest class index. The euclidean metric shares the
    Minkowski code path with exponent 2, so the two agree exactly.
    """
    query = np.asarray(query, dtype=float)
    if query.ndim != 2 or query.shape[1] != train.n_features:
        raise ValueError(
            f"query must be 2-D with {train.n_features} columns, got shape {query.shape}")
    if config.k_neighbors > train.n_samples:
        raise ValueError(
            f"k_neighbors={config.k_neighbors} exceeds {train.n_samples} training rows")
    return _predict_rows(train.features, train.labels, train.n_classes, query, config)


def _predict_rows(train_features, train_labels, n_classes, query, config):
    p = config.exponent
    k = config.k_neighbors
    predictions = np.empty(query.shape[0], dtype=np.int64)
    for start in range(0, query.shape[0], _QUERY_CHUNK):
        chunk = query[start:start + _QUERY_CHUNK]
        # powered distances preserve the ordering, so the root is skipped
        dist = np.abs(chunk[:, None, :] - train_features[None, :, :]) ** p
        dist = dist.sum(axis=2)
        for i in range(chunk.shape[0]):
            order = np.argsort(dist[i], kind="stable")[:k]
            votes = np.bincount(train_labels[order], minlength=n_classes)
            predictions[start + i] = int(np.argmax(votes))
    return predictions


def knn_cv_accuracies(data, folds, config):
    """Per-fold accuracy of the baseline under a shared fold assignment."""
    accs = np.zeros(folds.n_folds)
    for f_idx, (train_mask, test_mask) in enumerate(folds.masks()):
        predicted = _predict_rows(data.features[train_mask], data.labels[train_mask],
                                  data.n_classes, data.features[test_mask], config)
        accs[f_idx] = np.mean(predicted == data.labels[test_mask])
    return accs
