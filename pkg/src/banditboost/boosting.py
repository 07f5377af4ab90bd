"""Online gradient boosting from noisy value feedback alone.

``BanditBooster`` runs N weak online learners. Each round, on example x:
starting from the zero point, for i = 1..N it reads learner i's
prediction, blends it with step eta_i = 2/(i+1) scaled by the advantage
1/gamma, then builds a one-point spherical gradient estimate
(d/delta) * feedback * v from a single noisy loss query at the pre-blend
point, and hands (x, estimate) to learner i as a linear loss. The emitted
prediction is the projection of the final blend; one more query reports
its feedback. Budget: exactly N+1 loss queries per round.

Weak learners live on the set shrunk by delta/inradius so every query
point y + delta*v stays inside the true prediction set. The zero point
must lie in the shrunk set, since blends are combinations of it and
learner predictions.

``LinearWeakLearner`` is the weak learner used throughout the benchmarks:
a projected linear map W x with step schedule lr * t^(-c) on the exact
parameter gradient of each received linear loss (or, behind a flag, on a
one-point parameter-space estimate of it).
"""

from __future__ import annotations

import warnings

import numpy as np

from .geometry import DecisionSet
from .losses import ConvexLoss, NoisyBanditOracle, one_point_estimate, sphere_sample
from .olo import NORM_SLACK, AlternationError, RegretLedger
from .rng import RngLike, seeded_generator


class WeakLearner:
    """Per-example predict/update contract with advantage gamma >= 1.

    predict(x) must return a member of the learner's prediction set;
    update(x, g) consumes the linear loss with coefficients g. Strict
    alternation per learner: one update per prediction.
    """

    gamma: float = 1.0
    set: DecisionSet

    def __init__(self):
        self._awaiting_update = False

    def predict(self, x) -> np.ndarray:
        if self._awaiting_update:
            raise AlternationError("predict called twice without an intervening update")
        self._awaiting_update = True
        return self._predict(x)

    def peek(self, x) -> np.ndarray:
        """Prediction without entering the predict/update protocol (deploy path)."""
        return self._predict(x)

    def update(self, x, g) -> None:
        if not self._awaiting_update:
            raise AlternationError("update called without a pending prediction")
        self._awaiting_update = False
        self._update(x, g)

    def _predict(self, x) -> np.ndarray:
        raise NotImplementedError

    def _update(self, x, g) -> None:
        raise NotImplementedError


class LinearWeakLearner(WeakLearner):
    """Projected linear model: prediction = project(W x), W starts at zero.

    The update on linear loss g.(Wx) steps W along its exact parameter
    gradient, the outer product g x^T, by lr * t^(-c), with the gradient
    entries clipped to +/- clip_cap first. sigma is the declared bound on
    ||g||: exceeding it warns, as with the linear optimizers, but never
    aborts. update_mode="fkm" replaces the exact parameter gradient with
    a one-point spherical estimate in parameter space (same query the
    model would use if it could not differentiate g.(Wx) itself).
    """

    def __init__(
        self,
        set_: DecisionSet,
        feature_dim: int,
        sigma: float,
        lr: float = 0.01,
        c: float = 0.5,
        clip_cap: float | None = None,
        update_mode: str = "ogd",
        fkm_delta: float = 0.1,
        rng: RngLike | None = None,
        gamma: float = 1.0,
    ):
        super().__init__()
        if feature_dim < 1:
            raise ValueError(f"feature_dim must be >= 1, got {feature_dim}")
        if sigma <= 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        if lr < 0 or c < 0:
            raise ValueError(f"lr and c must be nonnegative, got lr={lr}, c={c}")
        if clip_cap is not None and clip_cap <= 0:
            raise ValueError(f"clip_cap must be positive, got {clip_cap}")
        if update_mode not in ("ogd", "fkm"):
            raise ValueError(f"unknown update_mode {update_mode!r}")
        if gamma < 1.0:
            raise ValueError(f"gamma must be >= 1, got {gamma}")
        if update_mode == "fkm":
            if fkm_delta <= 0:
                raise ValueError(f"fkm_delta must be positive, got {fkm_delta}")
            if rng is None:
                raise ValueError("fkm update mode needs an rng for its sphere draws")
        self.set = set_
        self.feature_dim = int(feature_dim)
        self.sigma = float(sigma)
        self.lr = float(lr)
        self.c = float(c)
        self.clip_cap = clip_cap
        self.update_mode = update_mode
        self.fkm_delta = float(fkm_delta)
        self.rng = seeded_generator(rng) if rng is not None else None
        self.gamma = float(gamma)
        self.W = np.zeros((set_.dim, feature_dim))
        self.updates_seen = 0

    def _check_x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.feature_dim,):
            raise ValueError(
                f"example has dimension {x.shape}, expected ({self.feature_dim},)"
            )
        return x

    def _predict(self, x) -> np.ndarray:
        x = self._check_x(x)
        return self.set.project(self.W @ x)

    def _update(self, x, g) -> None:
        x = self._check_x(x)
        g = np.asarray(g, dtype=np.float64)
        if g.shape != (self.set.dim,):
            raise ValueError(f"loss coefficients have dimension {g.shape}, expected ({self.set.dim},)")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(x))):
            raise ValueError("non-finite update inputs")
        norm = float(np.linalg.norm(g))
        if norm > self.sigma * (1.0 + NORM_SLACK) + NORM_SLACK:
            warnings.warn(
                f"loss coefficient norm {norm:.6g} exceeds the declared bound {self.sigma:.6g}",
                RuntimeWarning,
                stacklevel=3,
            )
        self.updates_seen += 1
        t = self.updates_seen
        if self.update_mode == "ogd":
            grad_w = np.outer(g, x)
        else:
            # one-point estimate of the same parameter gradient: the induced
            # parameter loss w -> g.(Wx) is linear with gradient g x^T
            p = self.W.size
            v = sphere_sample(self.rng, p).reshape(self.W.shape)
            feedback = float(g @ ((self.W + self.fkm_delta * v) @ x))
            grad_w = (p / self.fkm_delta) * feedback * v
        if self.clip_cap is not None:
            np.clip(grad_w, -self.clip_cap, self.clip_cap, out=grad_w)
        step = self.lr * t ** (-self.c)
        self.W -= step * grad_w
        if not np.all(np.isfinite(self.W)):
            raise ValueError("weight matrix became non-finite")


class BanditBooster:
    """N-weak-learner corrective boosting driven by a noisy value oracle.

    ``learner_factory(inner_set)`` is called N times; predictions it
    returns must lie in that (shrunk) set. The internal ledger records the
    final reported feedback of each round and the query count; harnesses
    that need exact losses keep their own books.
    """

    def __init__(
        self,
        set_y: DecisionSet,
        n_learners: int,
        learner_factory,
        delta: float,
        gamma: float = 1.0,
        rng: RngLike | None = None,
        record_call_log: bool = False,
    ):
        if n_learners < 1:
            raise ValueError(f"need at least one learner, got {n_learners}")
        if delta <= 0:
            raise ValueError(f"delta must be positive, got {delta}")
        if gamma < 1.0:
            raise ValueError(f"gamma must be >= 1, got {gamma}")
        inradius = set_y.inradius()
        if delta >= inradius:
            raise ValueError(
                f"delta={delta} must be below the prediction-set inradius {inradius} "
                "so query points stay feasible"
            )
        self.set_y = set_y
        self.delta = float(delta)
        self.gamma = float(gamma)
        self.inner = set_y.shrink(delta / inradius)
        origin = np.zeros(set_y.dim)
        if not self.inner.contains(origin):
            raise ValueError(
                "the zero point must lie in the shrunk prediction set: each "
                "round blends from zero and queries around it"
            )
        self.learners: list[WeakLearner] = [
            learner_factory(self.inner) for _ in range(n_learners)
        ]
        self.n_learners = n_learners
        self.etas = np.array([2.0 / (i + 1.0) for i in range(1, n_learners + 1)])
        self.rng = seeded_generator(rng if rng is not None else 0)
        self.ledger = RegretLedger()
        self.t = 0
        self.max_estimate_norm = 0.0
        self.call_log: list[tuple[str, int, int]] | None = [] if record_call_log else None

    def _blend(self, x, estimate_at) -> np.ndarray:
        """Run the N corrective steps; estimate_at(i, y_prev) yields learner i's g."""
        y = np.zeros(self.set_y.dim)
        for i, (eta, learner) in enumerate(zip(self.etas, self.learners), start=1):
            if self.call_log is not None:
                self.call_log.append(("predict", self.t, i))
            prediction = learner.predict(x)
            if not self.inner.contains(prediction):
                raise ValueError(
                    f"weak learner {i} predicted outside the (shrunk) prediction set"
                )
            y_next = (1.0 - eta) * y + (eta / self.gamma) * prediction
            g = estimate_at(i, y)
            norm = float(np.linalg.norm(g))
            if norm > self.max_estimate_norm:
                self.max_estimate_norm = norm
            learner.update(x, g)
            y = y_next
        return y

    def round(self, x, oracle: NoisyBanditOracle) -> np.ndarray:
        """One bandit round on example x; returns the emitted prediction.

        Consumes exactly N+1 oracle queries: one per corrective step at
        y^{i-1} + delta*v, plus the final feedback at the emitted point.
        """
        self.t += 1
        d = self.set_y.dim

        def bandit_estimate(i: int, y_prev: np.ndarray) -> np.ndarray:
            if self.call_log is not None:
                self.call_log.append(("draw_v", self.t, i))
            v = sphere_sample(self.rng, d)
            feedback = oracle.query(y_prev + self.delta * v)
            self.ledger.add_queries(1)
            return one_point_estimate(d, self.delta, feedback, v)

        y = self._blend(x, bandit_estimate)
        y_final = self.set_y.project(y)
        final_feedback = oracle.query(y_final)
        self.ledger.add_queries(1)
        self.ledger.record_loss(final_feedback)
        return y_final

    def full_info_round(self, x, loss: ConvexLoss) -> np.ndarray:
        """One round with exact gradients instead of one-point estimates.

        Same control flow and blending; each corrective step reads
        grad(loss) at the pre-blend point. No value queries are spent.
        """
        self.t += 1

        def exact_gradient(i: int, y_prev: np.ndarray) -> np.ndarray:
            self.ledger.add_queries(1)
            return loss.gradient(y_prev)

        y = self._blend(x, exact_gradient)
        y_final = self.set_y.project(y)
        self.ledger.record_loss(loss.value(y_final))
        return y_final

    def deploy(self, x) -> np.ndarray:
        """Boosted prediction for x with no updates and no queries."""
        y = np.zeros(self.set_y.dim)
        for eta, learner in zip(self.etas, self.learners):
            y = (1.0 - eta) * y + (eta / self.gamma) * learner.peek(x)
        return self.set_y.project(y)
