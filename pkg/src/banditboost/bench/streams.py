"""Synthetic experiment streams, reproducible from a seed.

Two shapes of stream exist. Example streams yield (features, label)
pairs for the regression protocols; loss streams yield one convex loss
per round for the plain OCO protocols. Both materialize everything up
front in row-major draw order, so generating a horizon-T stream and a
horizon-T/2 stream from the same seed agree on the first T/2 rounds.
That prefix property is what lets tuning run on the first half of the
exact stream the final run replays.
"""

from __future__ import annotations

import numpy as np

from ..geometry import DecisionSet
from ..losses import ConvexLoss, LinearLoss, SquaredDistanceLoss, sphere_sample
from ..rng import RngLike, seeded_generator


class ExampleStream:
    """Fixed-order (features, label-vector) pairs with a name for reports."""

    def __init__(self, name: str, features: np.ndarray, labels: np.ndarray):
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.float64)
        if features.ndim != 2 or labels.ndim != 2 or features.shape[0] != labels.shape[0]:
            raise ValueError("features and labels must be 2-d with matching row counts")
        if features.shape[0] == 0:
            raise ValueError("stream is empty")
        self.name = name
        self.features = features
        self.labels = labels

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def label_dim(self) -> int:
        return self.labels.shape[1]


class LossStream:
    """One convex loss per round, for the example-free OCO protocols."""

    def __init__(self, name: str, losses: list[ConvexLoss], sigma: float):
        if not losses:
            raise ValueError("stream is empty")
        self.name = name
        self.losses = losses
        self.sigma = float(sigma)  # bound on gradient norms over the set

    def __len__(self) -> int:
        return len(self.losses)

    def loss_at(self, t: int) -> ConvexLoss:
        """The round-t loss, t = 1..T."""
        return self.losses[t - 1]


def realizable_linear_mixture(
    horizon: int,
    rng: RngLike,
    feature_dim: int = 5,
    label_dim: int = 1,
    mixing: float = 0.5,
    target_scale: float = 0.9,
    label_noise_sd: float = 0.0,
) -> ExampleStream:
    """Targets are a fixed convex combination of two linear maps of x.

    Features are uniform on [-1, 1]^feature_dim. Each map's rows are
    L1-normalized and scaled so |label| <= target_scale always, keeping
    labels representable inside any prediction set that covers that range.
    The generating combination lies in the convex hull of the two maps, so
    the comparator class of a boosted linear learner attains ~zero loss on
    noiseless labels.
    """
    if not 0.0 <= mixing <= 1.0:
        raise ValueError(f"mixing must lie in [0, 1], got {mixing}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    rng = seeded_generator(rng)

    def draw_map() -> np.ndarray:
        w = rng.uniform(-1.0, 1.0, size=(label_dim, feature_dim))
        scale = np.sum(np.abs(w), axis=1, keepdims=True)
        scale[scale == 0] = 1.0
        return w / scale * target_scale

    w_one = draw_map()
    w_two = draw_map()
    features = rng.uniform(-1.0, 1.0, size=(horizon, feature_dim))
    labels = mixing * features @ w_one.T + (1.0 - mixing) * features @ w_two.T
    if label_noise_sd > 0:
        labels = labels + rng.normal(0.0, label_noise_sd, size=labels.shape)
    return ExampleStream("realizable_linear_mixture", features, labels)


def alternating_labels(horizon: int, values=(1.0, 2.0), feature_dim: int = 1) -> ExampleStream:
    """Degenerate stream cycling through fixed labels; features are zero.

    Exists for exact-value checks on constant predictors: with labels
    {1, 2} and squared loss, any zero predictor averages exactly 2.5.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    features = np.zeros((horizon, feature_dim))
    cycle = np.asarray(values, dtype=np.float64)
    labels = cycle[np.arange(horizon) % len(cycle)][:, None]
    return ExampleStream("alternating_labels", features, labels)


def fixed_quadratic(
    horizon: int,
    set_: DecisionSet,
    center=None,
) -> LossStream:
    """Every round's loss is ||x - c||^2 for one fixed interior point c."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if center is None:
        # a fixed interior point off the exact center, so convergence is visible
        direction = np.ones(set_.dim) / np.sqrt(set_.dim)
        center = set_.center + 0.3 * set_.inradius() * direction
    center = np.asarray(center, dtype=np.float64)
    if not set_.contains(center):
        raise ValueError("quadratic center must lie in the decision set")
    loss = SquaredDistanceLoss(center, set_)
    return LossStream("fixed_quadratic", [loss] * horizon, sigma=loss.lipschitz_L)


def random_linear(
    horizon: int,
    set_: DecisionSet,
    rng: RngLike,
    sigma: float = 1.0,
) -> LossStream:
    """Independent linear losses g_t . x with ||g_t|| = sigma exactly."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    rng = seeded_generator(rng)
    directions = sigma * sphere_sample(rng, set_.dim, horizon)
    losses = [LinearLoss(g, set_) for g in directions]
    return LossStream("random_linear", losses, sigma=sigma)


SYNTHETIC_EXAMPLE_KINDS = {
    "realizable_linear_mixture": realizable_linear_mixture,
    "alternating_labels": alternating_labels,
}
SYNTHETIC_LOSS_KINDS = {
    "fixed_quadratic": fixed_quadratic,
    "random_linear": random_linear,
}
