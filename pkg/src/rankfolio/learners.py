"""Learner wrappers and the rank-forecast trading strategy they drive.

A learner owns its feature standardization: ``fit`` receives raw features and
targets, ``predict`` one raw feature vector. The interface is deliberately
minimal so other regressors (forests, boosted trees) can slot in later.
"""

from __future__ import annotations

import numpy as np

from .features import (Normalizer, RankPower, features_from_window,
                       scores_to_weights, training_set)
from .knn import knn_predict
from .mlp import MlpModel, mlp_predict, mlp_train
from .strategies import Strategy


class Learner:
    """fit(features, targets) then predict(feature_vec) -> score vector."""

    def fit(self, features: np.ndarray, targets: np.ndarray) -> None:
        raise NotImplementedError

    def predict(self, feature_vec: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class MlpLearner(Learner):
    """Fresh fully connected network per fit, seeded for reproducibility."""

    def __init__(self, hidden: tuple[int, ...] = (20, 20), epochs: int = 200,
                 learning_rate: float = 1e-3, batch_size: int = 0,
                 seed: int = 10):
        self.hidden = tuple(hidden)
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.seed = seed
        self.normalizer: Normalizer | None = None
        self.model: MlpModel | None = None

    def fit(self, features, targets):
        self.normalizer = Normalizer.fit(features)
        self.model = mlp_train(
            self.normalizer.transform(features), targets,
            hidden=self.hidden, epochs=self.epochs,
            learning_rate=self.learning_rate, batch_size=self.batch_size,
            seed=self.seed,
        )

    def predict(self, feature_vec):
        if self.model is None or self.normalizer is None:
            raise ValueError("predict before fit")
        return mlp_predict(self.model, feature_vec, self.normalizer)


class KnnLearner(Learner):
    """Stores the standardized training block; predicts by neighbor average."""

    def __init__(self, k: int = 15):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.normalizer: Normalizer | None = None
        self._features: np.ndarray | None = None
        self._targets: np.ndarray | None = None

    def fit(self, features, targets):
        self.normalizer = Normalizer.fit(features)
        self._features = self.normalizer.transform(features)
        self._targets = np.asarray(targets, dtype=np.float64).copy()

    def predict(self, feature_vec):
        if self._features is None:
            raise ValueError("predict before fit")
        return knn_predict(self._features, self._targets,
                           self.normalizer.transform(feature_vec), self.k)


class RankForecastStrategy(Strategy):
    """Daily weights from a learner trained on trailing rank targets.

    Refits every ``refit_interval`` trading days (counted from the first step
    call) on the trailing ``lookback`` days, then turns predicted scores into
    long-only weights by clipping and normalizing.
    """

    def __init__(self, learner: Learner, lookback: int = 80,
                 refit_interval: int = 10, rank_power: RankPower = 2,
                 feature_window: int = 20, trend: str = "price"):
        super().__init__()
        if refit_interval < 1:
            raise ValueError("refit_interval must be >= 1")
        self.learner = learner
        self.lookback = lookback
        self.refit_interval = refit_interval
        self.rank_power = rank_power
        self.feature_window = feature_window
        self.trend = trend
        self._steps = 0

    def step(self, history: np.ndarray) -> np.ndarray:
        history = self._check_growth(history)
        if self._steps % self.refit_interval == 0:
            feats, targets = training_set(
                history, self.lookback, self.rank_power,
                self.feature_window, self.trend,
            )
            self.learner.fit(feats, targets)
        current = features_from_window(
            history[-self.feature_window:], self.trend)
        self._steps += 1
        return scores_to_weights(self.learner.predict(current))
