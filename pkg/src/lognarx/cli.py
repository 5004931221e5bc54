"""Command line front end: fit, evaluate, and compare subcommands.

Every artifact (model.json, trace.json, curve.csv, compare.csv) is plain
JSON/CSV and byte-identical across runs with the same configuration;
floats are written with full repr precision so files round-trip exactly.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import KnnConfig, knn_cv_accuracies
from .dataset import (DataFormatError, apply_normalization, fit_normalization,
                      load_csv, make_folds, split_train_validation)
from .multiclass import fit_ova, load_model, predict, save_model
from .ofr import select_terms
from .regressors import DictionaryConfig, build_dictionary

DEFAULT_SEED = 3

CURVE_HEADER = ["step", "term", "score", "cv_mean", "cv_max"]
COMPARE_HEADER = ["method", "cv_mean", "cv_max", "n_features_data",
                  "n_terms_model", "reduction_pct"]


class UsageError(Exception):
    """Bad arguments or configuration; maps to exit code 2."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Full experiment protocol; defaults reproduce the reference setup."""

    dataset: str
    label_column: object = None
    degree: int = 2
    input_lags: int = 2
    output_lags: int = 2
    mode: str = "static"
    include_output_lags: bool = False
    max_terms: int = 10
    folds: int = 5
    train_fraction: float = 0.8
    seed: int = DEFAULT_SEED
    ridge: float = 1e-4
    output_dir: str = "."

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise UsageError(f"train-fraction must lie in (0, 1), got {self.train_fraction}")
        if self.max_terms < 1:
            raise UsageError(f"max-terms must be >= 1, got {self.max_terms}")
        if self.folds < 2:
            raise UsageError(f"folds must be >= 2, got {self.folds}")
        if self.seed < 0:
            raise UsageError(f"seed must be non-negative, got {self.seed}")
        if self.ridge < 0:
            raise UsageError(f"ridge must be non-negative, got {self.ridge}")

    def dictionary_config(self):
        try:
            return DictionaryConfig(
                degree=self.degree,
                input_lags=self.input_lags,
                output_lags=self.output_lags,
                mode=self.mode,
                include_output_lags=self.include_output_lags,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from exc


@dataclass
class FitResult:
    """Everything produced by one fit pipeline run."""

    config: ExperimentConfig
    model: object
    trace: object
    basis: object
    dictionary: object
    folds: object
    normalization: object
    train: object
    validation: object
    elapsed_seconds: float = field(default=0.0)


def run_fit(config):
    """Load, split, normalize, build the dictionary, select terms, fit.

    This is the library entry point behind the ``fit`` subcommand; the
    command wraps it with file output.
    """
    started = time.perf_counter()
    dcfg = config.dictionary_config()
    data = load_csv(config.dataset, config.label_column)
    train, validation = split_train_validation(data, config.train_fraction, config.seed)
    normalization = fit_normalization(train)
    train_scaled = apply_normalization(train, normalization)
    dictionary = build_dictionary(train_scaled, dcfg)
    aligned = train_scaled.subset(np.arange(dictionary.dropped_rows, train_scaled.n_samples))
    folds = make_folds(aligned, config.folds, config.seed, stratified=True)
    trace, basis = select_terms(dictionary, aligned.labels, config.max_terms,
                                folds, config.ridge)
    model = fit_ova(train, trace.terms, dcfg, normalization, config.ridge)
    elapsed = time.perf_counter() - started
    return FitResult(config, model, trace, basis, dictionary, folds,
                     normalization, train, validation, elapsed)


def compute_metrics(model, data):
    """Accuracy, per-class accuracy, and confusion matrix on a dataset.

    The dataset's label strings are remapped onto the model's class
    encoding; unknown classes or a feature-count mismatch are errors.
    """
    mapping = {name: i for i, name in enumerate(model.class_names)}
    unknown = [name for name in data.class_names if name not in mapping]
    if unknown:
        raise DataFormatError(f"dataset classes {unknown} are not known to the model")
    if data.n_features != model.normalization.n_features:
        raise DataFormatError(
            f"model expects {model.normalization.n_features} features, "
            f"dataset has {data.n_features}")
    true = np.array([mapping[data.class_names[l]] for l in data.labels], dtype=np.int64)
    predicted = predict(model, data.features)
    true = true[data.n_samples - predicted.shape[0]:]
    n_classes = model.n_classes
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (true, predicted), 1)
    row_totals = confusion.sum(axis=1)
    per_class = {
        model.class_names[c]: (float(confusion[c, c] / row_totals[c])
                               if row_totals[c] else None)
        for c in range(n_classes)
    }
    return {
        "accuracy": float(np.mean(predicted == true)),
        "per_class_accuracy": per_class,
        "confusion_matrix": confusion.tolist(),
        "class_names": list(model.class_names),
        "n_samples": int(true.shape[0]),
    }


def reduction_percent(n_features_data, n_terms_model):
    """Dimensionality reduction as a percentage, truncated to 2 decimals.

    Follows the term-count convention: a model of m terms over d raw
    features reduces the dimension by 100*(1 - m/d).
    """
    value = (1.0 - n_terms_model / n_features_data) * 10000.0
    return math.floor(value) / 100.0


def distinct_model_features(terms):
    """Distinct raw input features touched by the term list."""
    sources = set()
    for term in terms:
        sources.update(term.input_sources())
    return len(sources)


def _write_curve(path, trace):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CURVE_HEADER)
        for step_no, step in enumerate(trace.steps, start=1):
            writer.writerow([step_no, step.term.display, repr(step.score),
                             repr(step.cv_mean), repr(step.cv_max)])


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _print_trace(trace):
    width = max(len(s.term.display) for s in trace.steps)
    print(f"{'step':>4}  {'term':<{width}}  {'score':>8}  {'cv_mean':>8}  {'cv_max':>8}")
    for step_no, step in enumerate(trace.steps, start=1):
        print(f"{step_no:>4}  {step.term.display:<{width}}  {step.score:>8.4f}  "
              f"{step.cv_mean:>8.4f}  {step.cv_max:>8.4f}")


def cmd_fit(config):
    """Run the full pipeline and write model.json, trace.json, curve.csv."""
    result = run_fit(config)
    os.makedirs(config.output_dir, exist_ok=True)
    save_model(result.model, os.path.join(config.output_dir, "model.json"))
    _write_json(os.path.join(config.output_dir, "trace.json"), result.trace.to_dict())
    _write_curve(os.path.join(config.output_dir, "curve.csv"), result.trace)
    _print_trace(result.trace)
    metrics = compute_metrics(result.model, result.validation)
    print(f"selected {len(result.trace.steps)} terms in {result.elapsed_seconds:.2f}s; "
          f"validation accuracy {metrics['accuracy']:.4f} on {metrics['n_samples']} rows")
    return 0


def cmd_evaluate(model_path, dataset_path, label_column=None, output=None):
    """Score a saved model against a dataset and report metrics JSON."""
    model = load_model(model_path)
    data = load_csv(dataset_path, label_column)
    metrics = compute_metrics(model, data)
    text = json.dumps(metrics, indent=2)
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    print(text)
    return 0


def cmd_compare(config, methods, knn_config):
    """Run each method under identical split/folds and write compare.csv."""
    dcfg = config.dictionary_config()
    data = load_csv(config.dataset, config.label_column)
    train, _ = split_train_validation(data, config.train_fraction, config.seed)
    normalization = fit_normalization(train)
    train_scaled = apply_normalization(train, normalization)
    aligned = train_scaled.subset(np.arange(dcfg.dropped_rows, train_scaled.n_samples))
    folds = make_folds(aligned, config.folds, config.seed, stratified=True)
    d = data.n_features

    rows = []
    reduction_report = None
    if "narx" in methods:
        dictionary = build_dictionary(train_scaled, dcfg)
        trace, _ = select_terms(dictionary, aligned.labels, config.max_terms,
                                folds, config.ridge)
        last = trace.steps[-1]
        n_terms = len(trace.steps)
        reduction = reduction_percent(d, n_terms)
        rows.append(["narx", repr(last.cv_mean), repr(last.cv_max),
                     d, n_terms, f"{reduction:.2f}"])
        reduction_report = {
            "n_features_data": d,
            "n_terms_model": n_terms,
            "n_distinct_features_model": distinct_model_features(trace.terms),
            "reduction_pct": reduction,
        }
    if "knn" in methods:
        accs = knn_cv_accuracies(aligned, folds, knn_config)
        rows.append(["knn", repr(float(accs.mean())), repr(float(accs.max())),
                     d, d, f"{reduction_percent(d, d):.2f}"])

    os.makedirs(config.output_dir, exist_ok=True)
    with open(os.path.join(config.output_dir, "compare.csv"), "w",
              encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(COMPARE_HEADER)
        writer.writerows(rows)
    if reduction_report is not None:
        _write_json(os.path.join(config.output_dir, "reduction.json"), reduction_report)

    for row in rows:
        print(f"{row[0]:<6} cv_mean={float(row[1]):.4f} cv_max={float(row[2]):.4f} "
              f"features={row[3]} terms={row[4]} reduction={row[5]}%")
    return 0


def _parse_label_column(value):
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        return value


def _add_experiment_arguments(parser):
    parser.add_argument("dataset", help="path to the CSV dataset")
    parser.add_argument("--label-column", default=None,
                        help="label column name or 0-based index (default: last column)")
    parser.add_argument("--degree", type=int, default=2,
                        help="maximum monomial degree (default 2)")
    parser.add_argument("--input-lags", type=int, default=2,
                        help="maximum input lag (default 2)")
    parser.add_argument("--output-lags", type=int, default=2,
                        help="maximum output lag (default 2)")
    parser.add_argument("--mode", choices=["static", "temporal"], default="static",
                        help="lag semantics: static rows or temporal sequence")
    parser.add_argument("--include-output-lags", action="store_true",
                        help="add lagged-output terms to the dictionary")
    parser.add_argument("--max-terms", type=int, default=10,
                        help="number of terms to select (default 10)")
    parser.add_argument("--folds", type=int, default=5,
                        help="cross-validation folds (default 5)")
    parser.add_argument("--train-fraction", type=float, default=0.8,
                        help="training share of the split (default 0.8)")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"random seed (default {DEFAULT_SEED})")
    parser.add_argument("--ridge", type=float, default=1e-4,
                        help="ridge penalty for the logistic fits (default 1e-4)")
    parser.add_argument("--output-dir", default=".",
                        help="directory for output files (default: current)")


def _config_from_args(args):
    return ExperimentConfig(
        dataset=args.dataset,
        label_column=_parse_label_column(args.label_column),
        degree=args.degree,
        input_lags=args.input_lags,
        output_lags=args.output_lags,
        mode=args.mode,
        include_output_lags=args.include_output_lags,
        max_terms=args.max_terms,
        folds=args.folds,
        train_fraction=args.train_fraction,
        seed=args.seed,
        ridge=args.ridge,
        output_dir=args.output_dir,
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lognarx",
        description="Polynomial-term multinomial classifier with forward term selection")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="select terms and fit a model")
    _add_experiment_arguments(fit)
    fit.set_defaults(handler=lambda args: cmd_fit(_config_from_args(args)))

    evaluate = sub.add_parser("evaluate", help="evaluate a saved model on a dataset")
    evaluate.add_argument("model", help="path to model.json")
    evaluate.add_argument("dataset", help="path to the CSV dataset")
    evaluate.add_argument("--label-column", default=None)
    evaluate.add_argument("--output", default=None, help="optionally write metrics JSON here")
    evaluate.set_defaults(handler=lambda args: cmd_evaluate(
        args.model, args.dataset, _parse_label_column(args.label_column), args.output))

    compare = sub.add_parser("compare", help="compare methods under identical folds")
    _add_experiment_arguments(compare)
    compare.add_argument("--methods", nargs="+", choices=["narx", "knn"],
                         default=["narx", "knn"])
    compare.add_argument("--knn-neighbors", type=int, default=10)
    compare.add_argument("--knn-metric", choices=["euclidean", "minkowski"],
                         default="euclidean")
    compare.add_argument("--knn-p", type=float, default=3.0)
    compare.set_defaults(handler=lambda args: cmd_compare(
        _config_from_args(args), args.methods,
        KnnConfig(args.knn_neighbors, args.knn_metric, args.knn_p)))
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (OSError, DataFormatError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # computation failures
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
