"""k-nearest-neighbor regression by brute force."""

from __future__ import annotations

import numpy as np


def knn_predict(train_features: np.ndarray, train_targets: np.ndarray,
                query: np.ndarray, k: int) -> np.ndarray:
    """Mean target over the k training rows nearest the query (Euclidean).

    Distance ties resolve to the earliest training row. Features are expected
    to be standardized consistently by the caller.
    """
    feats = np.asarray(train_features, dtype=np.float64)
    targets = np.asarray(train_targets, dtype=np.float64)
    q = np.asarray(query, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[0] < 1:
        raise ValueError("need a non-empty 2-d training feature matrix")
    if targets.shape[0] != feats.shape[0]:
        raise ValueError("feature and target row counts differ")
    if q.shape != (feats.shape[1],):
        raise ValueError("query shape does not match training features")
    if not 1 <= k <= feats.shape[0]:
        raise ValueError(f"k={k} out of range 1..{feats.shape[0]}")
    d2 = ((feats - q) ** 2).sum(axis=1)
    order = np.argsort(d2, kind="stable")
    return targets[order[:k]].mean(axis=0)
