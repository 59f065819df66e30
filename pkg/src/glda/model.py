"""Labeled datasets and the sufficient statistics used by every estimator.

Classes are labeled 1..K. Class 1 is the base class: all mean-difference
vectors are taken against it, so a K-class problem is summarized by the
K-1 contrasts delta_k = mean_1 - mean_{k+1}.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dataset",
    "ClassSummaries",
    "PooledScatter",
    "DirectionSet",
    "summarize",
    "pooled_scatter",
    "group_norms",
]


def _frozen(a, dtype=float):
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    """N samples of p features with integer labels in 1..K."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = _frozen(self.features)
        y = _frozen(self.labels, dtype=int)
        if X.ndim != 2:
            raise ValueError("features must be a 2-d array")
        if y.shape != (X.shape[0],):
            raise ValueError("labels must have one entry per sample")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("need at least one sample and one feature")
        k = int(y.max(initial=0))
        if k < 2:
            raise ValueError("need at least two classes")
        if y.min() < 1:
            raise ValueError("labels must be 1-based integers")
        for c in range(1, k + 1):
            if not np.any(y == c):
                raise ValueError(f"class {c} has no samples")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def p(self):
        return self.features.shape[1]

    @property
    def n_classes(self):
        return int(self.labels.max())

    def class_indices(self, k):
        return np.flatnonzero(self.labels == k)


@dataclass(frozen=True)
class ClassSummaries:
    """Per-class counts, means and priors, plus base-class differences.

    deltas[k] = means[0] - means[k + 1] for k = 0..K-2, exactly.
    """

    counts: np.ndarray
    means: np.ndarray
    priors: np.ndarray
    deltas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "counts", _frozen(self.counts, dtype=int))
        object.__setattr__(self, "means", _frozen(self.means))
        object.__setattr__(self, "priors", _frozen(self.priors))
        object.__setattr__(self, "deltas", _frozen(self.deltas))
        if abs(self.priors.sum() - 1.0) > 1e-12:
            raise ValueError("priors must sum to 1")
        if self.deltas.shape[0] != self.means.shape[0] - 1:
            raise ValueError("deltas must have K-1 rows")

    @property
    def n_classes(self):
        return self.means.shape[0]

    @property
    def p(self):
        return self.means.shape[1]


@dataclass(frozen=True)
class PooledScatter:
    """Pooled within-class covariance with its degrees of freedom N - K."""

    matrix: np.ndarray
    dof: int

    def __post_init__(self):
        S = np.array(self.matrix, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError("scatter matrix must be square")
        if not np.array_equal(S, S.T):
            S = (S + S.T) / 2.0
        S.setflags(write=False)
        object.__setattr__(self, "matrix", S)
        if self.dof < 1:
            raise ValueError("insufficient degrees of freedom")

    @property
    def p(self):
        return self.matrix.shape[0]

    @property
    def diag_min(self):
        """Smallest diagonal entry (S+_min)."""
        return float(np.diag(self.matrix).min())

    @property
    def diag_max(self):
        return float(np.diag(self.matrix).max())

    @property
    def offdiag_max(self):
        """Largest off-diagonal magnitude (S-_max)."""
        a = np.abs(self.matrix - np.diag(np.diag(self.matrix)))
        return float(a.max()) if self.p > 1 else 0.0


@dataclass(frozen=True)
class DirectionSet:
    """p x K' matrix of discriminant directions, one column per contrast.

    Row j stacks the j-th coefficient of every direction; penalizing its
    Euclidean norm removes feature j from all pairwise rules at once.
    """

    matrix: np.ndarray

    def __post_init__(self):
        B = np.array(self.matrix, dtype=float)
        if B.ndim != 2:
            raise ValueError("directions must form a 2-d matrix")
        B.setflags(write=False)
        object.__setattr__(self, "matrix", B)

    @property
    def p(self):
        return self.matrix.shape[0]

    @property
    def n_directions(self):
        return self.matrix.shape[1]

    def column(self, k):
        """Direction k (0-based)."""
        return self.matrix[:, k]

    def row(self, j):
        """Per-feature coefficient group for feature j (0-based)."""
        return self.matrix[j, :]

    def column_support(self, k):
        """0-based indices of nonzero entries of direction k."""
        return np.flatnonzero(self.matrix[:, k] != 0.0)

    def joint_support(self):
        """0-based indices of rows with any nonzero entry."""
        return np.flatnonzero(np.any(self.matrix != 0.0, axis=1))


def summarize(d: Dataset) -> ClassSummaries:
    """Class counts, means, priors and base-class mean differences."""
    K = d.n_classes
    counts = np.zeros(K, dtype=int)
    means = np.zeros((K, d.p))
    for k in range(1, K + 1):
        idx = d.class_indices(k)
        if idx.size == 0:
            raise ValueError(f"class {k} has no samples")
        counts[k - 1] = idx.size
        means[k - 1] = d.features[idx].mean(axis=0)
    priors = counts / counts.sum()
    deltas = means[0] - means[1:]
    return ClassSummaries(counts=counts, means=means, priors=priors, deltas=deltas)


def pooled_scatter(d: Dataset, cs: ClassSummaries) -> PooledScatter:
    """Pooled within-class covariance S = (N-K)^{-1} sum of centered outer products."""
    N, K = d.n_samples, cs.n_classes
    if N <= K:
        raise ValueError("insufficient degrees of freedom")
    S = np.zeros((d.p, d.p))
    for k in range(1, K + 1):
        C = d.features[d.class_indices(k)] - cs.means[k - 1]
        S += C.T @ C
    S /= N - K
    S = (S + S.T) / 2.0
    return PooledScatter(matrix=S, dof=N - K)


def group_norms(ds: DirectionSet) -> np.ndarray:
    """Euclidean norm of each per-feature coefficient group (one per row)."""
    return np.linalg.norm(ds.matrix, axis=1)
