"""Online linear optimizers: the base learners everything else drives.

Two interchangeable learners over a decision set, both with O(sqrt(T))
regret on linear losses g.x with ||g|| <= sigma:

* ``FollowThePerturbedLeader`` plays the linear minimizer of the
  perturbed cumulative gradient, redrawing the perturbation every round
  (coordinates uniform on [0, scale * D * sqrt(horizon)]).
* ``ProjectedGradientDescent`` takes projected subgradient steps from the
  set center with the schedule step_scale * D / (sigma * sqrt(t)).

Both enforce strict predict/update alternation so a driver cannot
accidentally peek at a post-update prediction for a round already scored.
Gradient norms above the declared sigma warn rather than abort: declared
bounds are config data, not certified facts, and zeroth-order estimates
sit exactly at their bound up to float rounding.
"""

from __future__ import annotations

import warnings

import numpy as np

from .geometry import DecisionSet
from .rng import RngLike, seeded_generator

NORM_SLACK = 1e-6


class AlternationError(RuntimeError):
    """Raised on predict-predict or update-update without the other between."""


class OnlineLinearOptimizer:
    """Stateful predict/update contract over linear losses.

    Subclasses implement _predict() and _apply(g); this base class owns
    alternation enforcement, the gradient-sum invariant, and norm warnings.
    """

    def __init__(self, set_: DecisionSet, sigma: float):
        if sigma <= 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        self.set = set_
        self.sigma = float(sigma)
        self.grad_sum = np.zeros(set_.dim)
        self.updates_seen = 0
        self._awaiting_update = False

    def predict(self) -> np.ndarray:
        if self._awaiting_update:
            raise AlternationError(
                "predict called twice without an intervening update"
            )
        self._awaiting_update = True
        return self._predict()

    def update(self, g) -> None:
        if not self._awaiting_update:
            raise AlternationError("update called without a pending prediction")
        g = np.asarray(g, dtype=np.float64)
        if g.shape != (self.set.dim,):
            raise ValueError(
                f"gradient has dimension {g.shape}, expected ({self.set.dim},)"
            )
        norm = float(np.linalg.norm(g))
        if norm > self.sigma * (1.0 + NORM_SLACK) + NORM_SLACK:
            warnings.warn(
                f"linear-loss norm {norm:.6g} exceeds the declared bound "
                f"sigma={self.sigma:.6g}; regret guarantees may not apply",
                RuntimeWarning,
                stacklevel=2,
            )
        self.grad_sum += g
        self.updates_seen += 1
        self._awaiting_update = False
        self._apply(g)

    def _predict(self) -> np.ndarray:
        raise NotImplementedError

    def _apply(self, g: np.ndarray) -> None:
        raise NotImplementedError


class FollowThePerturbedLeader(OnlineLinearOptimizer):
    """FPL with a fresh perturbation per round.

    Plays linear_minimize(set, grad_sum + p) with p drawn coordinate-wise
    uniform on [0, perturbation_scale * D * sqrt(horizon)]. Scale zero
    degenerates to follow-the-leader.
    """

    def __init__(
        self,
        set_: DecisionSet,
        sigma: float,
        horizon: int,
        rng: RngLike,
        perturbation_scale: float = 1.0,
    ):
        super().__init__(set_, sigma)
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        if perturbation_scale < 0:
            raise ValueError(f"perturbation_scale must be >= 0, got {perturbation_scale}")
        self.rng = seeded_generator(rng)
        self.amplitude = perturbation_scale * set_.diameter() * float(np.sqrt(horizon))

    def _predict(self) -> np.ndarray:
        if self.amplitude == 0.0:
            return self.set.linear_minimize(self.grad_sum)
        p = self.rng.uniform(0.0, self.amplitude, size=self.set.dim)
        return self.set.linear_minimize(self.grad_sum + p)

    def _apply(self, g: np.ndarray) -> None:
        pass  # state is grad_sum alone, already maintained by the base class


class ProjectedGradientDescent(OnlineLinearOptimizer):
    """Projected OGD from the set center, step D/(sigma*sqrt(t))."""

    def __init__(
        self,
        set_: DecisionSet,
        sigma: float,
        step_scale: float = 1.0,
    ):
        super().__init__(set_, sigma)
        if step_scale <= 0:
            raise ValueError(f"step_scale must be positive, got {step_scale}")
        self.step_scale = float(step_scale)
        self.current_point = set_.center.copy()

    def _predict(self) -> np.ndarray:
        return self.current_point.copy()

    def _apply(self, g: np.ndarray) -> None:
        t = self.updates_seen  # already incremented: this is the t-th update
        eta = self.step_scale * self.set.diameter() / (self.sigma * np.sqrt(t))
        self.current_point = self.set.project(self.current_point - eta * g)


OLO_KINDS = {"fpl": FollowThePerturbedLeader, "ogd": ProjectedGradientDescent}


def make_olo(
    kind: str,
    set_: DecisionSet,
    sigma: float,
    horizon: int,
    rng: RngLike,
    perturbation_scale: float = 1.0,
    step_scale: float = 1.0,
) -> OnlineLinearOptimizer:
    if kind == "fpl":
        return FollowThePerturbedLeader(
            set_, sigma, horizon, rng, perturbation_scale=perturbation_scale
        )
    if kind == "ogd":
        return ProjectedGradientDescent(set_, sigma, step_scale=step_scale)
    raise ValueError(f"unknown OLO kind {kind!r}; known kinds: {sorted(OLO_KINDS)}")


class RegretLedger:
    """Running sums for regret plus feedback-query accounting.

    regret = learner_loss_sum - comparator_loss_sum. Negative values are
    legitimate on short horizons; nothing here asserts a sign.
    """

    def __init__(self):
        self.learner_loss_sum = 0.0
        self.comparator_loss_sum = 0.0
        self.per_round_losses: list[float] = []
        self.query_count = 0

    @property
    def rounds(self) -> int:
        return len(self.per_round_losses)

    def record_loss(self, value: float) -> None:
        value = float(value)
        self.per_round_losses.append(value)
        self.learner_loss_sum += value

    def record_comparator(self, value: float) -> None:
        self.comparator_loss_sum += float(value)

    def add_queries(self, n: int) -> None:
        self.query_count += int(n)

    def regret(self) -> float:
        return self.learner_loss_sum - self.comparator_loss_sum

    def regret_against(self, comparator_loss: float) -> float:
        return self.learner_loss_sum - float(comparator_loss)


def offline_linear_optimum(gs, set_: DecisionSet) -> tuple[np.ndarray, float]:
    """Best fixed point in hindsight for linear losses, with its total loss.

    The total loss is linear, so the exact infimum is one linear
    minimization of the summed coefficients.
    """
    gs = np.asarray(gs, dtype=np.float64)
    if gs.ndim != 2 or gs.shape[0] == 0:
        raise ValueError("gs must be a nonempty sequence of gradient rows")
    total = gs.sum(axis=0)
    x_star = set_.linear_minimize(total)
    return x_star, float(total @ x_star)
