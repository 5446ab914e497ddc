"""Per-asset features, rank targets, and training-set assembly for the
learner-driven strategies.

A feature vector for day t stacks four blocks of length n (feature-major,
asset-minor): the last daily return, trailing return volatility, trailing
Sharpe, and the rank correlation of price against time over the trailing
window. Targets are the next day's cross-sectional return ranks (ascending,
1 = worst) raised to a power, or the raw returns in ``return`` mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import PriceMatrix

FEATURES_PER_ASSET = 4

# Below this sum, clipped scores are considered all-zero and weights fall
# back to uniform; also the floor for standardization divisors.
EPS = 1e-12

RankPower = int | str


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i: j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _spearman_vs_time(series: np.ndarray) -> float:
    """Spearman correlation of a series against its own time index; 0 if flat."""
    if series.size < 2:
        return 0.0
    ranks = _average_ranks(series)
    idx = np.arange(1.0, series.size + 1.0)
    rc = ranks - ranks.mean()
    ic = idx - idx.mean()
    denom = math.sqrt(float(rc @ rc) * float(ic @ ic))
    if denom == 0.0:
        return 0.0
    return float(rc @ ic) / denom


def features_from_window(window: np.ndarray, trend: str = "price") -> np.ndarray:
    """Length-4n feature vector from a (window_days, n) price block.

    ``trend`` selects the series for the rank-correlation block: the raw
    price level (default) or the daily returns within the window.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape[0] < 2:
        raise ValueError("need a 2-d window of at least 2 days")
    if trend not in ("price", "return"):
        raise ValueError(f"unknown trend mode {trend!r}")
    rets = window[1:] / window[:-1] - 1.0
    n = window.shape[1]

    last = rets[-1]
    mean = rets.mean(axis=0)
    if rets.shape[0] >= 2:
        vol = np.sqrt(((rets - mean) ** 2).sum(axis=0) / (rets.shape[0] - 1))
    else:
        vol = np.zeros(n)
    sharpe = np.zeros(n)
    np.divide(mean, vol, out=sharpe, where=vol > 0)

    basis = window if trend == "price" else rets
    trend_corr = np.array([_spearman_vs_time(basis[:, j]) for j in range(n)])
    return np.concatenate([last, vol, sharpe, trend_corr])


def compute_features(matrix: PriceMatrix, t: int, window: int,
                     trend: str = "price") -> np.ndarray:
    """Feature vector for (1-based) day t from the window ending at day t."""
    if window < 2:
        raise ValueError("feature window must be >= 2")
    if not window <= t <= matrix.num_days:
        raise ValueError(
            f"day {t} needs a full {window}-day window inside 1..{matrix.num_days}"
        )
    return features_from_window(matrix.prices[t - window: t], trend)


def rank_transform(returns: np.ndarray, power: RankPower) -> np.ndarray:
    """Cross-sectional return ranks (ascending, ties by asset index) to a power.

    ``power = "return"`` skips ranking and returns the raw returns.
    """
    r = np.asarray(returns, dtype=np.float64)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("returns must be a non-empty vector")
    if isinstance(power, str):
        if power == "return":
            return r.copy()
        raise ValueError(f"unknown rank power {power!r}")
    if power < 1:
        raise ValueError("rank power must be >= 1")
    order = np.argsort(r, kind="stable")
    ranks = np.empty(r.size, dtype=np.float64)
    ranks[order] = np.arange(1.0, r.size + 1.0)
    return ranks ** power


def training_set(prices: np.ndarray, lookback: int, power: RankPower,
                 feature_window: int, trend: str = "price"):
    """Feature matrix and targets from the trailing ``lookback`` days.

    ``prices`` is the full history prefix up to the current day t (its row
    count). Row i pairs the features of day s = t - lookback + i with the
    rank-transformed returns realized from day s to s + 1, so every quantity
    is observable by day t.
    """
    prices = np.asarray(prices, dtype=np.float64)
    t, n = prices.shape
    if lookback < 1:
        raise ValueError("lookback must be >= 1")
    needed = lookback + feature_window + 1
    if t < needed:
        raise ValueError(
            f"insufficient history: day {t} < lookback + feature_window + 1 = {needed}"
        )
    feats = np.empty((lookback, FEATURES_PER_ASSET * n))
    targets = np.empty((lookback, n))
    for i, s in enumerate(range(t - lookback, t)):
        feats[i] = features_from_window(prices[s - feature_window: s], trend)
        next_ret = prices[s] / prices[s - 1] - 1.0
        targets[i] = rank_transform(next_ret, power)
    return feats, targets


def build_training_set(matrix: PriceMatrix, t: int, lookback: int,
                       power: RankPower, feature_window: int,
                       trend: str = "price"):
    """training_set() on the history prefix ending at (1-based) day t."""
    if not 1 <= t <= matrix.num_days:
        raise ValueError(f"day {t} out of range 1..{matrix.num_days}")
    return training_set(matrix.prices[:t], lookback, power, feature_window, trend)


@dataclass(frozen=True)
class Normalizer:
    """Per-dimension z-score transform with std floored at EPS."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "Normalizer":
        f = np.asarray(features, dtype=np.float64)
        if f.ndim != 2 or f.shape[0] < 1:
            raise ValueError("need a non-empty 2-d feature matrix")
        return cls(mean=f.mean(axis=0), std=np.maximum(f.std(axis=0), EPS))

    def transform(self, features: np.ndarray) -> np.ndarray:
        return (np.asarray(features, dtype=np.float64) - self.mean) / self.std


def scores_to_weights(scores: np.ndarray) -> np.ndarray:
    """Clip negatives to zero and normalize; uniform if everything clips away."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("scores must be a non-empty vector")
    if not np.isfinite(s).all():
        raise ValueError("scores contain non-finite values")
    clipped = np.maximum(s, 0.0)
    total = clipped.sum()
    if total < EPS:
        return np.full(s.size, 1.0 / s.size)
    return clipped / total
