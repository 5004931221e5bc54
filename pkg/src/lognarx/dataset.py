"""CSV loading, feature normalization, and deterministic splits and folds."""

import csv
import zlib
from dataclasses import dataclass

import numpy as np

# Relative tolerance below which a column is treated as constant.
_CONSTANT_STD_TOL = 1e-12


class DataFormatError(ValueError):
    """Raised when an input file or column specification cannot be used."""


def stream_rng(seed, stream):
    """Return a generator for a named substream of the experiment seed.

    Each randomized operation draws from its own stream ("split", "folds", ...)
    so adding or removing one consumer never perturbs the others.
    """
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    key = zlib.crc32(stream.encode("ascii"))
    return np.random.default_rng(np.random.SeedSequence([int(seed), key]))


def _frozen(array, dtype):
    out = np.array(array, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    """Labeled numeric data with integer-encoded classes.

    ``labels`` holds values in ``0..C-1`` where ``C = len(class_names)``.
    Datasets produced by :func:`load_csv` always contain every class at
    least once; subsets (e.g. the validation side of a split) keep the
    parent encoding and may miss classes.
    """

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple
    feature_names: tuple

    def __post_init__(self):
        features = _frozen(self.features, float)
        labels = _frozen(self.labels, np.int64)
        if features.ndim != 2:
            raise DataFormatError("features must be a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise DataFormatError("labels must be a vector with one entry per row")
        if features.shape[0] == 0:
            raise DataFormatError("dataset has no rows")
        if not np.all(np.isfinite(features)):
            raise DataFormatError("features contain non-finite entries")
        n_classes = len(self.class_names)
        if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
            raise DataFormatError("labels out of range for the declared classes")
        if features.shape[1] != len(self.feature_names):
            raise DataFormatError("feature_names length does not match feature count")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", tuple(self.class_names))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def n_classes(self):
        return len(self.class_names)

    def subset(self, indices):
        """Row subset preserving the label encoding."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx],
                       self.class_names, self.feature_names)


@dataclass(frozen=True)
class NormalizationParams:
    """Per-column centering and scaling moments fitted on training rows."""

    means: np.ndarray
    std_devs: np.ndarray
    constant_columns: np.ndarray  # boolean mask; such columns pass through unscaled

    def __post_init__(self):
        object.__setattr__(self, "means", _frozen(self.means, float))
        object.__setattr__(self, "std_devs", _frozen(self.std_devs, float))
        object.__setattr__(self, "constant_columns", _frozen(self.constant_columns, bool))
        if not (self.means.shape == self.std_devs.shape == self.constant_columns.shape):
            raise ValueError("normalization parameter vectors must share one length")
        scaled = ~self.constant_columns
        if np.any(self.std_devs[scaled] <= 0):
            raise ValueError("non-constant columns must have positive std dev")

    @property
    def n_features(self):
        return self.means.shape[0]

    def to_dict(self):
        return {
            "means": self.means.tolist(),
            "std_devs": self.std_devs.tolist(),
            "constant_columns": np.flatnonzero(self.constant_columns).tolist(),
        }

    @classmethod
    def from_dict(cls, payload):
        means = np.asarray(payload["means"], dtype=float)
        mask = np.zeros(means.shape[0], dtype=bool)
        mask[np.asarray(payload["constant_columns"], dtype=int)] = True
        return cls(means, np.asarray(payload["std_devs"], dtype=float), mask)


@dataclass(frozen=True)
class FoldAssignment:
    """Cross-validation fold index for every row of a dataset."""

    fold_of: np.ndarray
    n_folds: int
    seed: int
    stratified: bool

    def __post_init__(self):
        object.__setattr__(self, "fold_of", _frozen(self.fold_of, np.int64))
        counts = np.bincount(self.fold_of, minlength=self.n_folds)
        if counts.size != self.n_folds or np.any(counts == 0):
            raise ValueError("every fold must be non-empty")

    @property
    def n_samples(self):
        return self.fold_of.shape[0]

    def masks(self):
        """Yield (train_mask, test_mask) pairs, one per fold."""
        for f in range(self.n_folds):
            test = self.fold_of == f
            yield ~test, test


def load_csv(path, label_column=None):
    """Load a UTF-8 CSV with a header row into a :class:`Dataset`.

    Parameters
    ----------
    path : str or Path
        File to read. Every non-label cell must parse as a real number;
        missing values are a hard error.
    label_column : str, int or None
        Column holding class labels, by header name or 0-based index.
        Defaults to the last column. Labels are encoded in first-appearance
        order so downstream reports are reproducible.
    """
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataFormatError(f"cannot read dataset file {path!r}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path!r} is empty") from None
        header = [h.strip() for h in header]
        label_idx = _resolve_label_column(header, label_column, path)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]

        rows, raw_labels = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path!r} line {line_no}: expected {len(header)} cells, got {len(row)}")
            values = []
            for i, cell in enumerate(row):
                if i == label_idx:
                    continue
                cell = cell.strip()
                if not cell:
                    raise DataFormatError(
                        f"{path!r} line {line_no}: missing value in column {header[i]!r}")
                try:
                    value = float(cell)
                except ValueError:
                    raise DataFormatError(
                        f"{path!r} line {line_no}: cannot parse {cell!r} as a number "
                        f"in column {header[i]!r}") from None
                values.append(value)
            rows.append(values)
            raw_labels.append(row[label_idx].strip())

    if not rows:
        raise DataFormatError(f"{path!r} contains a header but no data rows")

    class_names, labels = [], []
    encoding = {}
    for value in raw_labels:
        if value not in encoding:
            encoding[value] = len(class_names)
            class_names.append(value)
        labels.append(encoding[value])
    if len(class_names) < 2:
        raise DataFormatError(f"{path!r} contains a single class {class_names[0]!r}")

    features = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(features)):
        bad = np.argwhere(~np.isfinite(features))[0]
        raise DataFormatError(
            f"{path!r}: non-finite value in column {feature_names[bad[1]]!r}")
    return Dataset(features, np.asarray(labels), tuple(class_names), tuple(feature_names))


def _resolve_label_column(header, label_column, path):
    if label_column is None:
        return len(header) - 1
    if isinstance(label_column, str):
        try:
            return header.index(label_column)
        except ValueError:
            raise DataFormatError(
                f"{path!r} has no column named {label_column!r}") from None
    idx = int(label_column)
    if idx < 0:
        idx += len(header)
    if not 0 <= idx < len(header):
        raise DataFormatError(f"label column index {label_column} out of range for {path!r}")
    return idx


def fit_normalization(train):
    """Fit per-column moments on training rows only (population std, denominator N)."""
    features = train.features
    means = features.mean(axis=0)
    std_devs = features.std(axis=0)
    constant = std_devs <= _CONSTANT_STD_TOL * np.maximum(1.0, np.abs(means))
    return NormalizationParams(means, std_devs, constant)


def normalize_matrix(features, params):
    """Apply fitted moments to a raw feature matrix."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[1] != params.n_features:
        raise ValueError(
            f"expected {params.n_features} feature columns, got matrix of shape {features.shape}")
    out = features.copy()
    scaled = ~params.constant_columns
    out[:, scaled] = (features[:, scaled] - params.means[scaled]) / params.std_devs[scaled]
    return out


def apply_normalization(data, params):
    """Return a dataset with scaled features; constant columns pass through."""
    return Dataset(normalize_matrix(data.features, params), data.labels,
                   data.class_names, data.feature_names)


def split_indices(labels, train_fraction, seed):
    """Deterministic stratified train/validation row indices.

    Within each class the training share is rounded half-up, so a 0.8
    fraction of 150 balanced rows yields exactly 120/30.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    labels = np.asarray(labels)
    rng = stream_rng(seed, "split")
    train_parts, val_parts = [], []
    for c in range(int(labels.max()) + 1):
        class_rows = np.flatnonzero(labels == c)
        if class_rows.size == 0:
            continue
        order = rng.permutation(class_rows)
        n_train = int(np.floor(class_rows.size * train_fraction + 0.5))
        if n_train == 0:
            raise ValueError(
                f"train_fraction={train_fraction} leaves class {c} empty in the training part")
        train_parts.append(order[:n_train])
        val_parts.append(order[n_train:])
    train_idx = np.sort(np.concatenate(train_parts))
    val_idx = np.sort(np.concatenate(val_parts)) if any(p.size for p in val_parts) \
        else np.array([], dtype=np.int64)
    if val_idx.size == 0:
        raise ValueError("split leaves the validation part empty")
    return train_idx, val_idx


def split_train_validation(data, train_fraction, seed):
    """Stratified random split into (train, validation) datasets."""
    train_idx, val_idx = split_indices(data.labels, train_fraction, seed)
    return data.subset(train_idx), data.subset(val_idx)


def make_folds(data, k, seed, stratified=True):
    """Assign every row to one of ``k`` cross-validation folds.

    Stratified assignment distributes each class cyclically over folds
    after a seeded shuffle, so fold sizes differ by at most one within
    each class. A rolling offset keeps overall fold sizes balanced too.
    """
    n = data.n_samples
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if k > n:
        raise ValueError(f"cannot make {k} folds from {n} rows")
    rng = stream_rng(seed, "folds")
    fold_of = np.empty(n, dtype=np.int64)
    if stratified:
        offset = 0
        for c in range(data.n_classes):
            class_rows = np.flatnonzero(data.labels == c)
            order = rng.permutation(class_rows)
            for i, row in enumerate(order):
                fold_of[row] = (offset + i) % k
            offset = (offset + class_rows.size) % k
    else:
        order = rng.permutation(n)
        for i, row in enumerate(order):
            fold_of[row] = i % k
    return FoldAssignment(fold_of, k, int(seed), bool(stratified))
