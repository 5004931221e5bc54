"""Final one-vs-all model over the selected terms.

One binary logistic model per class shares a single term list; raw
feature rows are normalized with the stored training moments, realized
into term columns, and classified by the largest class probability.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import glm
from .dataset import NormalizationParams, normalize_matrix
from .regressors import DictionaryConfig, Term, realize_matrix


@dataclass(frozen=True)
class OvaModel:
    """Shared selected terms plus one coefficient vector per class."""

    terms: tuple
    class_coefficients: np.ndarray
    class_names: tuple
    dictionary_config: DictionaryConfig
    normalization: NormalizationParams

    def __post_init__(self):
        coefs = np.array(self.class_coefficients, dtype=float)
        coefs.setflags(write=False)
        object.__setattr__(self, "class_coefficients", coefs)
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if coefs.ndim != 2 or coefs.shape != (len(self.class_names), len(self.terms)):
            raise ValueError("need one coefficient per class and term")
        if len(self.class_names) < 2:
            raise ValueError("a one-vs-all model needs at least 2 classes")
        if not np.all(np.isfinite(coefs)):
            raise ValueError("non-finite model coefficients")

    @property
    def n_classes(self):
        return len(self.class_names)


def fit_ova(data, terms, config, normalization, ridge=glm.DEFAULT_RIDGE):
    """Fit one binary logistic model per class over the realized term columns.

    ``data`` carries raw (unscaled) features; ``normalization`` is applied
    here and stored on the model so raw inputs can be scored end to end.
    """
    if data.n_classes < 2:
        raise ValueError("need at least 2 classes")
    if not terms:
        raise ValueError("term list is empty")
    scaled = normalize_matrix(data.features, normalization)
    columns, dropped = realize_matrix(scaled, data.labels, terms, config)
    targets = data.labels[dropped:]
    coefficients = np.empty((data.n_classes, len(terms)))
    for c in range(data.n_classes):
        try:
            fit = glm.fit_logistic(columns, (targets == c).astype(float), ridge)
        except (ValueError, RuntimeError) as exc:
            raise RuntimeError(
                f"fitting class {c} ({data.class_names[c]!r}) failed: {exc}") from exc
        coefficients[c] = fit.coefficients
    return OvaModel(tuple(terms), coefficients, data.class_names, config, normalization)


def predict_proba(model, raw_features):
    """Class probability matrix for raw feature rows.

    Rows are not renormalized across classes; each entry is the
    independent one-vs-all probability, strictly inside (0, 1). In
    temporal mode the leading rows without lag history are dropped.
    """
    raw = np.asarray(raw_features, dtype=float)
    if raw.ndim != 2:
        raise ValueError("raw_features must be a 2-D matrix")
    if not np.all(np.isfinite(raw)):
        raise ValueError("raw_features contain non-finite values")
    scaled = normalize_matrix(raw, model.normalization)
    columns, _ = realize_matrix(scaled, None, model.terms, model.dictionary_config)
    z = columns @ model.class_coefficients.T
    return np.clip(glm.logistic(z), glm._PROB_LO, glm._PROB_HI)


def predict(model, raw_features):
    """Argmax class decision; ties break toward the lowest class index."""
    return np.argmax(predict_proba(model, raw_features), axis=1)


def save_model(model, path):
    """Write the model as JSON, sufficient to reload and predict identically."""
    payload = {
        "class_names": list(model.class_names),
        "dictionary_config": model.dictionary_config.to_dict(),
        "normalization": model.normalization.to_dict(),
        "terms": [t.to_dict() for t in model.terms],
        "class_coefficients": model.class_coefficients.tolist(),
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    return OvaModel(
        terms=tuple(Term.from_dict(t) for t in payload["terms"]),
        class_coefficients=np.asarray(payload["class_coefficients"], dtype=float),
        class_names=tuple(payload["class_names"]),
        dictionary_config=DictionaryConfig.from_dict(payload["dictionary_config"]),
        normalization=NormalizationParams.from_dict(payload["normalization"]),
    )
