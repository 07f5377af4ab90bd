"""Scikit-learn style wrappers around the online learners.

Each estimator runs one progressive-validation pass over (X, y) in
``fit``: every example is scored by the pre-update model, then consumed
for learning, in row order. The recorded per-example losses land in
``progressive_losses_``; ``predict`` serves the final model read-only.

These wrappers simulate their own noisy feedback channel internally
(squared loss to the label plus bounded uniform noise), which is the
environment the underlying algorithms are built for. Use the bench module
when you need full control over streams, oracles, and budgets.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .boosting import BanditBooster, LinearWeakLearner
from .bench.baselines import NFkmModel
from .geometry import Box, DecisionSet
from .losses import NoisyBanditOracle, SquaredDistanceLoss
from .rng import generator_from


def _as_label_matrix(y: np.ndarray) -> tuple[np.ndarray, bool]:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        return y[:, None], True
    return y, False


def _prediction_set(spec, label_dim: int) -> DecisionSet:
    if isinstance(spec, DecisionSet):
        if spec.dim != label_dim:
            raise ValueError(
                f"prediction set has dimension {spec.dim}, labels have {label_dim}"
            )
        return spec
    halfwidth = float(spec)
    if halfwidth <= 0:
        raise ValueError(f"prediction_set halfwidth must be positive, got {spec}")
    return Box(np.zeros(label_dim), np.full(label_dim, halfwidth))


def _check_labels_inside(set_y: DecisionSet, labels: np.ndarray) -> None:
    for row in labels:
        if not set_y.contains(row):
            raise ValueError(
                "labels fall outside the prediction set; enlarge prediction_set"
            )


class _ProgressiveMixin:
    """Shared fit loop: score with the pre-update model, then learn."""

    def _progressive_pass(self, X, labels, score_fn, learn_fn):
        losses = np.empty(X.shape[0])
        for t in range(X.shape[0]):
            prediction = score_fn(X[t])
            losses[t] = float(np.sum((prediction - labels[t]) ** 2))
            learn_fn(X[t], labels[t])
        self.progressive_losses_ = losses
        self.mean_loss_ = float(losses.mean())
        half = len(losses) // 2
        self.second_half_loss_ = float(losses[half:].mean()) if half < len(losses) else self.mean_loss_
        return self


class OnlineBoostingRegressor(_ProgressiveMixin, RegressorMixin, BaseEstimator):
    """Boosted projected-linear learners driven by noisy value feedback.

    feedback="bandit" uses one-point spherical gradient estimates from
    N+1 noisy loss queries per example; feedback="full" uses exact
    gradients at the same blend points (no queries).
    """

    def __init__(
        self,
        n_learners: int = 10,
        delta: float = 0.5,
        gamma: float = 1.0,
        feedback: str = "bandit",
        noise_halfwidth: float = 0.1,
        lr: float = 0.05,
        c: float = 0.5,
        learner_mode: str = "ogd",
        clip_scale: float = 10.0,
        prediction_set=2.0,
        random_state: int = 0,
    ):
        self.n_learners = n_learners
        self.delta = delta
        self.gamma = gamma
        self.feedback = feedback
        self.noise_halfwidth = noise_halfwidth
        self.lr = lr
        self.c = c
        self.learner_mode = learner_mode
        self.clip_scale = clip_scale
        self.prediction_set = prediction_set
        self.random_state = random_state

    def fit(self, X, y):
        if self.feedback not in ("bandit", "full"):
            raise ValueError(f"feedback must be 'bandit' or 'full', got {self.feedback!r}")
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        labels, flat = _as_label_matrix(y)
        set_y = _prediction_set(self.prediction_set, labels.shape[1])
        _check_labels_inside(set_y, labels)
        d = set_y.dim
        m_cap = set_y.diameter() ** 2
        sigma = 2.0 * d * m_cap / self.delta
        clip_cap = self.clip_scale * d * m_cap / self.delta if self.clip_scale else None

        root = np.random.SeedSequence(int(self.random_state))
        noise_ss, engine_ss, *learner_ss = root.spawn(2 + self.n_learners)
        children = iter(learner_ss)

        def factory(inner_set):
            return LinearWeakLearner(
                inner_set,
                X.shape[1],
                sigma,
                lr=self.lr,
                c=self.c,
                clip_cap=clip_cap,
                update_mode=self.learner_mode,
                fkm_delta=0.1,
                rng=generator_from(next(children)),
            )

        booster = BanditBooster(
            set_y,
            self.n_learners,
            factory,
            self.delta,
            gamma=self.gamma,
            rng=generator_from(engine_ss),
        )
        noise_rng = generator_from(noise_ss)

        def learn(x, label):
            loss = SquaredDistanceLoss(label, set_y)
            if self.feedback == "bandit":
                oracle = NoisyBanditOracle(loss, self.noise_halfwidth, noise_rng)
                booster.round(x, oracle)
            else:
                booster.full_info_round(x, loss)

        self._progressive_pass(X, labels, booster.deploy, learn)
        self.booster_ = booster
        self.set_y_ = set_y
        self.n_features_in_ = X.shape[1]
        self.flat_labels_ = flat
        self.queries_per_example_ = booster.ledger.query_count / X.shape[0]
        return self

    def predict(self, X):
        check_is_fitted(self, "booster_")
        X = check_array(X)
        out = np.vstack([self.booster_.deploy(row) for row in X])
        return out[:, 0] if self.flat_labels_ else out


class NFKMRegressor(_ProgressiveMixin, RegressorMixin, BaseEstimator):
    """Budget-matched single linear model: N averaged one-point estimates."""

    def __init__(
        self,
        n_queries: int = 10,
        delta: float = 0.5,
        noise_halfwidth: float = 0.1,
        lr: float = 0.05,
        c: float = 0.5,
        mode: str = "average",
        clip_scale: float = 10.0,
        prediction_set=2.0,
        random_state: int = 0,
    ):
        self.n_queries = n_queries
        self.delta = delta
        self.noise_halfwidth = noise_halfwidth
        self.lr = lr
        self.c = c
        self.mode = mode
        self.clip_scale = clip_scale
        self.prediction_set = prediction_set
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        labels, flat = _as_label_matrix(y)
        set_y = _prediction_set(self.prediction_set, labels.shape[1])
        _check_labels_inside(set_y, labels)
        d = set_y.dim
        m_cap = set_y.diameter() ** 2
        sigma = 2.0 * d * m_cap / self.delta
        clip_cap = self.clip_scale * d * m_cap / self.delta if self.clip_scale else None

        noise_ss, model_ss = np.random.SeedSequence(int(self.random_state)).spawn(2)
        model = NFkmModel(
            set_y,
            X.shape[1],
            self.n_queries,
            self.delta,
            sigma,
            self.lr,
            self.c,
            clip_cap=clip_cap,
            mode=self.mode,
            rng=generator_from(model_ss),
        )
        noise_rng = generator_from(noise_ss)

        def learn(x, label):
            loss = SquaredDistanceLoss(label, set_y)
            oracle = NoisyBanditOracle(loss, self.noise_halfwidth, noise_rng)
            model.round(x, oracle)

        self._progressive_pass(X, labels, model.preview, learn)
        self.model_ = model
        self.set_y_ = set_y
        self.n_features_in_ = X.shape[1]
        self.flat_labels_ = flat
        self.queries_per_example_ = model.ledger.query_count / X.shape[0]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        out = np.vstack([self.model_.preview(row) for row in X])
        return out[:, 0] if self.flat_labels_ else out


class OGDRegressor(_ProgressiveMixin, RegressorMixin, BaseEstimator):
    """Full-information projected linear model on exact loss gradients."""

    def __init__(
        self,
        lr: float = 0.05,
        c: float = 0.5,
        prediction_set=2.0,
        random_state: int = 0,
    ):
        self.lr = lr
        self.c = c
        self.prediction_set = prediction_set
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        labels, flat = _as_label_matrix(y)
        set_y = _prediction_set(self.prediction_set, labels.shape[1])
        _check_labels_inside(set_y, labels)
        learner = LinearWeakLearner(
            set_y, X.shape[1], 2.0 * set_y.diameter(), lr=self.lr, c=self.c
        )

        def learn(x, label):
            prediction = learner.predict(x)
            learner.update(x, 2.0 * (prediction - label))

        self._progressive_pass(X, labels, learner.peek, learn)
        self.learner_ = learner
        self.set_y_ = set_y
        self.n_features_in_ = X.shape[1]
        self.flat_labels_ = flat
        return self

    def predict(self, X):
        check_is_fitted(self, "learner_")
        X = check_array(X)
        out = np.vstack([self.learner_.peek(row) for row in X])
        return out[:, 0] if self.flat_labels_ else out


class ConstantRegressor(_ProgressiveMixin, RegressorMixin, BaseEstimator):
    """Predicts one fixed value forever; the exact-loss reference point.

    With value 0 and squared loss its mean progressive loss is exactly the
    mean of the squared labels, which pins harness accounting in tests.
    """

    def __init__(self, value: float = 0.0):
        self.value = value

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        labels, flat = _as_label_matrix(y)
        constant = np.full(labels.shape[1], float(self.value))
        self._progressive_pass(X, labels, lambda x: constant, lambda x, label: None)
        self.constant_ = constant
        self.n_features_in_ = X.shape[1]
        self.flat_labels_ = flat
        return self

    def predict(self, X):
        check_is_fitted(self, "constant_")
        X = check_array(X)
        out = np.tile(self.constant_, (X.shape[0], 1))
        return out[:, 0] if self.flat_labels_ else out
