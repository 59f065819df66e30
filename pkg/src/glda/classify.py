"""Plug-in multi-class LDA prediction, plus the two reference baselines.

Prediction assigns per-class scores anchored at the base class: h_1 = 0 and,
for each contrast direction b_k,

    h_{k+1} = -(x - (m_1 + m_{k+1})/2)' b_k - log(pi_1 / pi_{k+1}).

The argmax over scores reproduces the pairwise linear rules; ties go to the
larger class index.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import ClassSummaries, Dataset, DirectionSet, PooledScatter

__all__ = [
    "ClassifierModel",
    "PredictionReport",
    "NaiveBayesModel",
    "build_model",
    "predict",
    "scores",
    "evaluate",
    "naive_bayes_fit",
    "naive_bayes_predict",
    "pseudoinverse_lda_fit",
]

_VAR_FLOOR = 1e-12


def _argmax_last(score_rows):
    """Row-wise argmax breaking ties toward the larger index, as 1-based labels."""
    rev = score_rows[:, ::-1]
    k = score_rows.shape[1]
    return k - np.argmax(rev, axis=1)


@dataclass(frozen=True)
class ClassifierModel:
    directions: DirectionSet
    means: np.ndarray
    priors: np.ndarray

    def __post_init__(self):
        means = np.array(self.means, dtype=float)
        priors = np.array(self.priors, dtype=float)
        means.setflags(write=False)
        priors.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "priors", priors)
        K = means.shape[0]
        if self.directions.n_directions != K - 1:
            raise ValueError("need exactly K-1 directions")
        if self.directions.p != means.shape[1]:
            raise ValueError("direction and mean dimensions differ")
        if priors.shape != (K,):
            raise ValueError("need one prior per class")
        if abs(priors.sum() - 1.0) > 1e-12:
            raise ValueError("priors must sum to 1")

    @property
    def n_classes(self):
        return self.means.shape[0]

    @property
    def p(self):
        return self.means.shape[1]


@dataclass(frozen=True)
class PredictionReport:
    labels: np.ndarray
    scores: np.ndarray
    error_rate: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=int))
        object.__setattr__(self, "scores", np.asarray(self.scores, dtype=float))
        if self.error_rate is not None and not 0.0 <= self.error_rate <= 1.0:
            raise ValueError("error rate must lie in [0, 1]")


def build_model(cs: ClassSummaries, ds: DirectionSet) -> ClassifierModel:
    """Bundle summaries and fitted directions into a plug-in classifier."""
    if ds.n_directions != cs.n_classes - 1 or ds.p != cs.p:
        raise ValueError("directions do not match the class summaries")
    return ClassifierModel(directions=ds, means=cs.means, priors=cs.priors)


def scores(m: ClassifierModel, X) -> np.ndarray:
    """Per-class scores for each row of X (base class scored 0)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != m.p:
        raise ValueError("feature dimension does not match the model")
    B = m.directions.matrix
    mid = (m.means[0] + m.means[1:]) / 2.0  # K' x p
    h = np.zeros((X.shape[0], m.n_classes))
    proj = X @ B - np.sum(mid * B.T, axis=1)
    h[:, 1:] = -proj - np.log(m.priors[0] / m.priors[1:])
    return h


def predict(m: ClassifierModel, x) -> int:
    """Predicted 1-based label for a single feature vector."""
    h = scores(m, np.asarray(x, dtype=float).reshape(1, -1))
    return int(_argmax_last(h)[0])


def predict_batch(m: ClassifierModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("empty dataset")
    return _argmax_last(scores(m, X))


def evaluate(m: ClassifierModel, test: Dataset) -> PredictionReport:
    """Predict every test sample and report the misclassification fraction."""
    if test.p != m.p:
        raise ValueError("feature dimension does not match the model")
    h = scores(m, test.features)
    labels = _argmax_last(h)
    err = float(np.mean(labels != test.labels))
    return PredictionReport(labels=labels, scores=h, error_rate=err)


@dataclass(frozen=True)
class NaiveBayesModel:
    """Gaussian naive Bayes with per-class diagonal covariance."""

    means: np.ndarray
    variances: np.ndarray
    priors: np.ndarray

    def __post_init__(self):
        for name in ("means", "variances", "priors"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.variances <= 0):
            raise ValueError("variances must be positive")

    @property
    def n_classes(self):
        return self.means.shape[0]

    @property
    def p(self):
        return self.means.shape[1]


def naive_bayes_fit(d: Dataset) -> NaiveBayesModel:
    """Per-class feature means and (floored) variances plus class priors."""
    K = d.n_classes
    means = np.zeros((K, d.p))
    variances = np.zeros((K, d.p))
    counts = np.zeros(K)
    for k in range(1, K + 1):
        idx = d.class_indices(k)
        if idx.size == 0:
            raise ValueError(f"class {k} has no samples")
        Xk = d.features[idx]
        means[k - 1] = Xk.mean(axis=0)
        variances[k - 1] = np.maximum(Xk.var(axis=0), _VAR_FLOOR)
        counts[k - 1] = idx.size
    return NaiveBayesModel(means=means, variances=variances, priors=counts / counts.sum())


def naive_bayes_scores(m: NaiveBayesModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != m.p:
        raise ValueError("feature dimension does not match the model")
    out = np.zeros((X.shape[0], m.n_classes))
    for k in range(m.n_classes):
        diff = X - m.means[k]
        out[:, k] = (
            math.log(m.priors[k])
            - 0.5 * np.sum(np.log(2.0 * np.pi * m.variances[k]))
            - 0.5 * np.sum(diff * diff / m.variances[k], axis=1)
        )
    return out


def naive_bayes_predict(m: NaiveBayesModel, x) -> int:
    h = naive_bayes_scores(m, np.asarray(x, dtype=float).reshape(1, -1))
    return int(_argmax_last(h)[0])


def naive_bayes_predict_batch(m: NaiveBayesModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("empty dataset")
    return _argmax_last(naive_bayes_scores(m, X))


def pseudoinverse_lda_fit(S, cs: ClassSummaries) -> DirectionSet:
    """Directions from the Moore-Penrose pseudo-inverse of the pooled scatter.

    Eigenvalues below 1e-10 times the largest are treated as zero.
    """
    Smat = S.matrix if isinstance(S, PooledScatter) else np.asarray(S, dtype=float)
    w, V = np.linalg.eigh(Smat)
    cut = 1e-10 * max(w.max(initial=0.0), 0.0)
    inv = np.where(w > cut, 1.0 / np.where(w > cut, w, 1.0), 0.0)
    B = V @ (inv[:, None] * (V.T @ cs.deltas.T))
    return DirectionSet(B)
