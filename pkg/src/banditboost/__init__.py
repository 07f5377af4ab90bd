"""Projection-free online convex optimization and boosting from noisy bandit feedback.

The core pieces:

* geometry: ball/box decision sets with projection, linear minimization,
  and shrinking.
* losses: convex loss families with declared constants, the noisy
  point-query oracle, spherical sampling and smoothing tools.
* olo: follow-the-perturbed-leader and projected gradient descent, the
  base online linear optimizers.
* sfw: the N-learner Frank-Wolfe OCO engine over stochastic gradient or
  bandit value feedback.
* boosting: online gradient boosting of weak learners from noisy value
  feedback, with the projected linear weak learner.
* estimators: scikit-learn style fit/predict wrappers.
* bench: streams, baselines, experiment runner, reports, CLI.
"""

from .boosting import BanditBooster, LinearWeakLearner, WeakLearner
from .estimators import (
    ConstantRegressor,
    NFKMRegressor,
    OGDRegressor,
    OnlineBoostingRegressor,
)
from .geometry import Ball, Box, DecisionSet, make_decision_set
from .losses import (
    ConvexLoss,
    LinearLoss,
    NoisyBanditOracle,
    QuadraticLoss,
    SmoothedLossProbe,
    SquaredDistanceLoss,
    one_point_estimate,
    sphere_sample,
)
from .olo import (
    AlternationError,
    FollowThePerturbedLeader,
    OnlineLinearOptimizer,
    ProjectedGradientDescent,
    RegretLedger,
    make_olo,
    offline_linear_optimum,
)
from .rng import seeded_generator, spawn_generators
from .sfw import OnlineFrankWolfe, bandit_defaults, choose_n

__version__ = "0.1.0"

__all__ = [
    "AlternationError",
    "Ball",
    "BanditBooster",
    "Box",
    "ConstantRegressor",
    "ConvexLoss",
    "DecisionSet",
    "FollowThePerturbedLeader",
    "LinearLoss",
    "LinearWeakLearner",
    "NFKMRegressor",
    "NoisyBanditOracle",
    "OGDRegressor",
    "OnlineBoostingRegressor",
    "OnlineFrankWolfe",
    "OnlineLinearOptimizer",
    "ProjectedGradientDescent",
    "QuadraticLoss",
    "RegretLedger",
    "SmoothedLossProbe",
    "SquaredDistanceLoss",
    "WeakLearner",
    "bandit_defaults",
    "choose_n",
    "make_decision_set",
    "make_olo",
    "offline_linear_optimum",
    "one_point_estimate",
    "seeded_generator",
    "spawn_generators",
    "sphere_sample",
]
