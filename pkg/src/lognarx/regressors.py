"""Polynomial candidate terms over lagged variables and their realization.

A term is a monomial over the lagged-input variables ``u_i(k-j)`` and,
optionally, the lagged output ``y(k-j)``. The empty monomial is the
constant term. Realizing a term list against a dataset produces the
numeric candidate matrix that feeds term selection.
"""

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

# Factor source index reserved for the output sequence; inputs are 1..d.
OUTPUT_SOURCE = 0

STATIC_MODE = "static"
TEMPORAL_MODE = "temporal"


@dataclass(frozen=True, order=True)
class Term:
    """One polynomial monomial, stored as a canonically sorted factor tuple.

    Each factor is a ``(source, lag)`` pair where ``source`` is a 1-based
    input index or :data:`OUTPUT_SOURCE` for the output, and ``lag >= 1``.
    The empty tuple is the constant term.
    """

    factors: tuple

    def __post_init__(self):
        factors = tuple((int(s), int(lag)) for s, lag in self.factors)
        for source, lag in factors:
            if source < 0:
                raise ValueError(f"invalid factor source {source}")
            if lag < 1:
                raise ValueError(f"factor lag must be >= 1, got {lag}")
        object.__setattr__(self, "factors", tuple(sorted(factors)))

    @classmethod
    def constant(cls):
        return cls(())

    @property
    def degree(self):
        return len(self.factors)

    @property
    def display(self):
        """Human-readable form, e.g. ``u3(k-1)u7(k-1)`` or ``Constant``."""
        if not self.factors:
            return "Constant"
        parts = []
        for source, lag in self.factors:
            name = "y" if source == OUTPUT_SOURCE else f"u{source}"
            parts.append(f"{name}(k-{lag})")
        return "".join(parts)

    @property
    def uses_output(self):
        return any(source == OUTPUT_SOURCE for source, _ in self.factors)

    def input_sources(self):
        """Distinct 1-based input indices this term touches."""
        return sorted({s for s, _ in self.factors if s != OUTPUT_SOURCE})

    def static_key(self):
        """Canonical form with all lags collapsed, identifying terms that
        realize identical columns when lags resolve to the current row."""
        return tuple(sorted((source, 1) for source, _ in self.factors))

    def to_dict(self):
        return {
            "factors": [
                {"source": "y" if s == OUTPUT_SOURCE else s, "lag": lag}
                for s, lag in self.factors
            ],
            "display": self.display,
        }

    @classmethod
    def from_dict(cls, payload):
        factors = tuple(
            (OUTPUT_SOURCE if f["source"] == "y" else int(f["source"]), int(f["lag"]))
            for f in payload["factors"]
        )
        return cls(factors)


@dataclass(frozen=True)
class DictionaryConfig:
    """Shape of the candidate dictionary.

    ``static`` mode treats rows as i.i.d. samples: every lag resolves to
    the current row and lagged-output terms are excluded by default
    (shuffled tabular labels carry no usable history). ``temporal`` mode
    shifts rows for real sequences and drops the leading rows that lack
    history.
    """

    degree: int = 2
    input_lags: int = 2
    output_lags: int = 2
    mode: str = STATIC_MODE
    include_output_lags: bool = False

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")
        if self.input_lags < 1:
            raise ValueError(f"input_lags must be >= 1, got {self.input_lags}")
        if self.output_lags < 0:
            raise ValueError(f"output_lags must be >= 0, got {self.output_lags}")
        if self.mode not in (STATIC_MODE, TEMPORAL_MODE):
            raise ValueError(f"mode must be {STATIC_MODE!r} or {TEMPORAL_MODE!r}")
        if self.include_output_lags and self.output_lags < 1:
            raise ValueError("include_output_lags requires output_lags >= 1")

    @property
    def max_lag(self):
        return max(self.input_lags, self.output_lags)

    @property
    def dropped_rows(self):
        """Leading rows without full lag history (temporal mode only)."""
        return self.max_lag if self.mode == TEMPORAL_MODE else 0

    def to_dict(self):
        return {
            "degree": self.degree,
            "input_lags": self.input_lags,
            "output_lags": self.output_lags,
            "mode": self.mode,
            "include_output_lags": self.include_output_lags,
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(**payload)


@dataclass(frozen=True)
class CandidateDictionary:
    """Ordered term list together with its realized column matrix."""

    terms: tuple
    matrix: np.ndarray
    config: DictionaryConfig
    dropped_rows: int

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "terms", tuple(self.terms))
        if matrix.ndim != 2 or matrix.shape[1] != len(self.terms):
            raise ValueError("matrix must have one column per term")
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("dictionary terms must be unique")

    @property
    def n_terms(self):
        return len(self.terms)

    @property
    def n_rows(self):
        return self.matrix.shape[0]


def count_candidate_terms(n, l):
    """Number of monomials of degree 0..l over n variables: (n+l)!/(n!*l!).

    Computed with exact integer arithmetic, so no size limit applies.
    """
    if n < 0 or l < 0:
        raise ValueError("variable count and degree must be non-negative")
    return math.comb(n + l, l)


def enumerate_terms(d, config):
    """All monomials of degree 0..degree over the configured lagged variables.

    Variables are ordered output lags first, then inputs by (index, lag);
    terms are emitted by ascending degree and then lexicographically by
    their canonical factor tuples. The count always equals
    :func:`count_candidate_terms` with ``n = d * input_lags`` plus
    ``output_lags`` when output terms are included.
    """
    if d < 0:
        raise ValueError(f"feature count must be non-negative, got {d}")
    variables = []
    if config.include_output_lags:
        variables.extend((OUTPUT_SOURCE, lag) for lag in range(1, config.output_lags + 1))
    for source in range(1, d + 1):
        variables.extend((source, lag) for lag in range(1, config.input_lags + 1))
    variables.sort()
    terms = [Term.constant()]
    for degree in range(1, config.degree + 1):
        for combo in combinations_with_replacement(variables, degree):
            terms.append(Term(combo))
    return terms


def deduplicate_static_terms(terms):
    """Drop terms that realize identical columns under static lag semantics.

    The first occurrence wins; since enumeration orders lags ascending,
    the survivor always carries the lowest lags.
    """
    seen = set()
    kept = []
    for term in terms:
        key = term.static_key()
        if key in seen:
            continue
        seen.add(key)
        kept.append(term)
    return kept


def realize_matrix(features, labels, terms, config):
    """Evaluate each term as a numeric column over the given rows.

    In static mode every lag reads the current row; in temporal mode the
    first ``max(input_lags, output_lags)`` rows are dropped and a factor
    with lag ``j`` reads row ``k - j``. Output factors read the numeric
    label sequence and require ``labels``.
    """
    features = np.asarray(features, dtype=float)
    n, d = features.shape
    for term in terms:
        for source, lag in term.factors:
            if source != OUTPUT_SOURCE and source > d:
                raise ValueError(
                    f"term {term.display} references input {source} but data has {d} features")
            if source == OUTPUT_SOURCE and labels is None:
                raise ValueError(
                    f"term {term.display} references an output lag but labels are unavailable")
    label_series = None if labels is None else np.asarray(labels, dtype=float)

    dropped = config.dropped_rows
    if n <= dropped:
        raise ValueError(
            f"temporal mode needs more than {dropped} rows, got {n}")
    n_out = n - dropped

    matrix = np.ones((n_out, len(terms)), dtype=float)
    for j, term in enumerate(terms):
        column = matrix[:, j]
        for source, lag in term.factors:
            series = label_series if source == OUTPUT_SOURCE else features[:, source - 1]
            if config.mode == STATIC_MODE:
                column *= series
            else:
                column *= series[dropped - lag:n - lag]
    return matrix, dropped


def realize_dictionary(data, terms, config):
    """Realize a term list against a dataset as a :class:`CandidateDictionary`."""
    matrix, dropped = realize_matrix(data.features, data.labels, terms, config)
    return CandidateDictionary(tuple(terms), matrix, config, dropped)


def build_dictionary(data, config):
    """Enumerate, deduplicate (static mode), and realize the full dictionary."""
    terms = enumerate_terms(data.n_features, config)
    if config.mode == STATIC_MODE:
        terms = deduplicate_static_terms(terms)
    return realize_dictionary(data, terms, config)
