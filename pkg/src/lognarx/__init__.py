"""Multinomial classification with polynomial term dictionaries, greedy
orthogonal term selection, and one-vs-all logistic models."""

from .baselines import KnnConfig, knn_cv_accuracies, knn_predict
from .dataset import (DataFormatError, Dataset, FoldAssignment,
                      NormalizationParams, apply_normalization,
                      fit_normalization, load_csv, make_folds,
                      normalize_matrix, split_indices, split_train_validation,
                      stream_rng)
from .glm import (LogisticFit, accuracy, err_criterion, fit_logistic,
                  logistic, predict_probability)
from .multiclass import (OvaModel, fit_ova, load_model, predict,
                         predict_proba, save_model)
from .ofr import (OrthogonalBasis, SelectionStep, SelectionTrace,
                  normalize_column, orthogonalize_against, score_candidate,
                  select_terms)
from .regressors import (CandidateDictionary, DictionaryConfig, Term,
                         build_dictionary, count_candidate_terms,
                         deduplicate_static_terms, enumerate_terms,
                         realize_dictionary, realize_matrix)

__version__ = "0.1.0"
