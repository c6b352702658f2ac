"""Baseline spec orderings: k-means + SVM, and uniform-random ranks.

The clustering/SVM baseline splits demonstrations into two clusters, calls
the cluster with the higher mean rating sum "good", fits a linear separator,
and ranks specifications by how much each rating column moves the separator
(|weight|, descending). Everything is deterministic given the seed.
"""

from dataclasses import dataclass

import numpy as np

from .demos import RatingMatrix


@dataclass
class KmeansResult:
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float


def kmeans(points, k, seed=0, max_iters=100):
    """Lloyd's algorithm with distance-weighted (k-means++ style) seeding.

    Deterministic given the seed. Iterates until assignments stop changing
    or max_iters is hit; inertia (sum of squared distances to the assigned
    centroid) never increases across iterations.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError(f"points must be a non-empty 2-d array, got shape {X.shape}")
    m = X.shape[0]
    if not 1 <= k <= m:
        raise ValueError(f"k must be in [1, {m}], got {k}")
    rng = np.random.default_rng(seed)

    # seeding: first centroid uniform, then proportional to squared distance
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(m)]
    closest_sq = ((X - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = closest_sq.sum()
        if total == 0:
            centroids[c] = X[rng.integers(m)]  # all points identical
        else:
            centroids[c] = X[rng.choice(m, p=closest_sq / total)]
        closest_sq = np.minimum(closest_sq, ((X - centroids[c]) ** 2).sum(axis=1))

    assignments = np.full(m, -1)
    for _ in range(max_iters):
        dist_sq = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assignments = dist_sq.argmin(axis=1)  # ties go to the lower index
        if (new_assignments == assignments).all():
            break
        assignments = new_assignments
        for c in range(k):
            members = X[assignments == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
            else:
                # re-seat an empty cluster at the point farthest from its centroid
                worst = dist_sq[np.arange(m), assignments].argmax()
                centroids[c] = X[worst]
    dist_sq = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    inertia = float(dist_sq[np.arange(m), assignments].sum())
    return KmeansResult(centroids, assignments, inertia)


@dataclass
class SvmModel:
    weights: np.ndarray
    bias: float

    def decision(self, points):
        return np.asarray(points, dtype=float) @ self.weights + self.bias


def linear_svm_train(points, labels, reg=0.01, iters=2000, seed=0):
    """L2-regularized hinge loss, full-batch subgradient descent.

    The 1/(reg * t) step schedule is fixed, so training is deterministic;
    the seed is accepted for interface symmetry with the stochastic
    baselines but batch descent never consumes randomness. On linearly
    separable input the hinge term is driven to zero.
    """
    X = np.asarray(points, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError(f"need matching points/labels, got {X.shape} and {y.shape}")
    classes = set(np.unique(y).tolist())
    if classes != {-1.0, 1.0}:
        raise ValueError(f"labels must contain both -1 and +1, got {sorted(classes)}")
    if not reg > 0:
        raise ValueError(f"reg must be positive, got {reg}")
    m = X.shape[0]
    w = np.zeros(X.shape[1])
    b = 0.0
    for t in range(1, iters + 1):
        lr = 1.0 / (reg * t)
        margins = y * (X @ w + b)
        violating = margins < 1
        grad_w = reg * w - (y[violating] @ X[violating]) / m
        grad_b = -y[violating].sum() / m
        w = w - lr * grad_w
        b = b - lr * grad_b
    return SvmModel(w, float(b))


def kmsvm_ordering(ratings, seed=0, train_on="centroids"):
    """Rank specs by |separator weight| between good and bad demo clusters.

    k-means with k=2 splits the rating rows; the cluster with the higher
    mean row sum is labeled +1. train_on="centroids" fits the SVM on the two
    centroids only (the default); "points" fits on every row with its
    cluster label. Every spec gets a distinct rank 1..n; specs whose weight
    magnitudes tie exactly are ordered by spec index.
    """
    Z = ratings.values if isinstance(ratings, RatingMatrix) else np.asarray(ratings, dtype=float)
    if Z.ndim != 2 or Z.shape[0] < 2:
        raise ValueError(f"need at least two demo rows, got shape {Z.shape}")
    if train_on not in ("centroids", "points"):
        raise ValueError(f"train_on must be 'centroids' or 'points', got {train_on!r}")
    km = kmeans(Z, k=2, seed=seed)
    if np.array_equal(km.centroids[0], km.centroids[1]):
        raise ValueError("no separation: both cluster centroids are identical")
    good = int(km.centroids.sum(axis=1).argmax())
    if train_on == "centroids":
        X = km.centroids
        y = np.where(np.arange(2) == good, 1.0, -1.0)
    else:
        X = Z
        y = np.where(km.assignments == good, 1.0, -1.0)
        if len(set(y.tolist())) < 2:
            raise ValueError("no separation: every row landed in one cluster")
    model = linear_svm_train(X, y, seed=seed)
    # round away float dust so structurally equal columns actually tie,
    # then hand tied magnitudes to the index order
    magnitude = np.round(np.abs(model.weights), 9)
    order = np.lexsort((np.arange(magnitude.size), -magnitude))
    ranks = np.empty(magnitude.size, dtype=int)
    ranks[order] = np.arange(1, magnitude.size + 1)
    return ranks


def random_ordering(n, levels, seed):
    """I.i.d. uniform ranks from {1..levels}; not necessarily dense."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    rng = np.random.default_rng(seed)
    return rng.integers(1, levels + 1, size=n)


def hamming_distance(a, b):
    """Fraction of positions that disagree; a metric on rank vectors."""
    va = np.asarray(a)
    vb = np.asarray(b)
    if va.shape != vb.shape or va.ndim != 1 or va.size == 0:
        raise ValueError(f"need equal-length non-empty vectors, got {va.shape} and {vb.shape}")
    return float((va != vb).mean())
