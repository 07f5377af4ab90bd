"""Projection-free online convex optimization via Frank-Wolfe blending.

``OnlineFrankWolfe`` maintains N online linear optimizers A_1..A_N. Each
round it starts from the literal zero point and performs N conditional
gradient steps with the schedule eta_i = 2/(i+1): read A_i's prediction,
blend it in, query a gradient estimate at the pre-blend iterate, and feed
that estimate to A_i as a linear loss. eta_1 = 1 erases the zero start, so
every post-blend iterate is a convex combination of learner predictions
and therefore feasible, with no projection anywhere.

Two oracle modes:

* stochastic_gradient: the caller supplies an unbiased gradient-estimate
  callable; N calls per round, no more.
* bandit_fkm: gradients are one-point spherical estimates
  (d/delta) * feedback * v from a noisy value oracle. The learners then
  live on the set shrunk by delta/inradius so the off-iterate query
  points stay feasible; N value queries per round, no more.

The prediction of A_i is always read before the randomness of its
gradient estimate is drawn; the estimate fed to A_i is evaluated at a
point that does not depend on A_i's current prediction. Tests verify the
ordering from the optional call log.
"""

from __future__ import annotations

import warnings

import numpy as np

from .geometry import DecisionSet
from .losses import ConvexLoss, NoisyBanditOracle, one_point_estimate, sphere_sample
from .olo import OnlineLinearOptimizer, RegretLedger
from .rng import RngLike, seeded_generator

N_CAP_DEFAULT = 10_000


def choose_n(beta: float, diameter: float, sigma: float, horizon: int) -> int:
    """Learner count giving O(sigma * D * sqrt(T)) regret: round(beta*D*sqrt(T)/sigma).

    Floored at one learner. All arguments must be positive; a zero beta
    (linear losses) has no meaningful auto choice, so pass N explicitly
    in that case.
    """
    if beta <= 0 or diameter <= 0 or sigma <= 0 or horizon <= 0:
        raise ValueError(
            "choose_n needs positive beta, diameter, sigma, horizon; got "
            f"beta={beta}, diameter={diameter}, sigma={sigma}, horizon={horizon}"
        )
    return max(1, round(beta * diameter * np.sqrt(horizon) / sigma))


def bandit_defaults(horizon: int) -> tuple[int, float]:
    """(N, delta) for the pure-bandit configuration: N = ceil(sqrt(T)), delta = T^(-1/4)."""
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    return int(np.ceil(np.sqrt(horizon))), float(horizon) ** -0.25


class OnlineFrankWolfe:
    """N-learner conditional-gradient OCO engine.

    ``learner_factory(set_)`` is called N times to build the inner
    optimizers; in bandit mode it receives the shrunk set. The ledger
    records the exact loss of each round's final iterate (bookkeeping for
    regret measurement, not feedback the algorithm sees) and counts
    oracle queries.
    """

    def __init__(
        self,
        set_: DecisionSet,
        n_learners: int,
        learner_factory,
        mode: str = "stochastic_gradient",
        delta: float | None = None,
        rng: RngLike | None = None,
        n_cap: int = N_CAP_DEFAULT,
        record_call_log: bool = False,
    ):
        if mode not in ("stochastic_gradient", "bandit_fkm"):
            raise ValueError(f"unknown mode {mode!r}")
        if n_learners < 1:
            raise ValueError(f"need at least one learner, got {n_learners}")
        if n_learners > n_cap:
            warnings.warn(
                f"capping learner count {n_learners} at {n_cap}; "
                "raise n_cap deliberately if the per-round cost is intended",
                RuntimeWarning,
                stacklevel=2,
            )
            n_learners = n_cap

        self.set = set_
        self.mode = mode
        self.n_learners = n_learners
        self.delta = None
        self._inner = set_

        if mode == "bandit_fkm":
            if delta is None or delta <= 0:
                raise ValueError("bandit_fkm mode needs delta > 0")
            inradius = set_.inradius()
            if delta >= inradius:
                raise ValueError(
                    f"delta={delta} must be below the set inradius {inradius} "
                    "so query points stay feasible"
                )
            self.delta = float(delta)
            self._inner = set_.shrink(delta / inradius)
            origin = np.zeros(set_.dim)
            if not self._inner.contains(origin):
                raise ValueError(
                    "bandit_fkm mode queries at the zero start of each round; "
                    "the shrunk set must contain the origin"
                )
            self.rng = seeded_generator(rng if rng is not None else 0)
        elif delta is not None:
            raise ValueError("delta only applies to bandit_fkm mode")

        self.learners: list[OnlineLinearOptimizer] = [
            learner_factory(self._inner) for _ in range(n_learners)
        ]
        self.etas = np.array([2.0 / (i + 1.0) for i in range(1, n_learners + 1)])
        self.ledger = RegretLedger()
        self.t = 0
        self.max_estimate_norm = 0.0
        self.call_log: list[tuple[str, int, int]] | None = [] if record_call_log else None

    @property
    def inner_set(self) -> DecisionSet:
        """Where the learners live: the full set, or its shrunk copy in bandit mode."""
        return self._inner

    def stochastic_round(self, grad_oracle, loss_for_ledger: ConvexLoss) -> np.ndarray:
        """One round driven by a gradient-estimate callable; returns x_t.

        grad_oracle(point) must return an unbiased estimate of the round's
        loss gradient at that point. Exactly N calls are made.
        """
        if self.mode != "stochastic_gradient":
            raise RuntimeError("stochastic_round requires stochastic_gradient mode")
        self.t += 1
        x = np.zeros(self.set.dim)
        for i, (eta, learner) in enumerate(zip(self.etas, self.learners), start=1):
            if self.call_log is not None:
                self.call_log.append(("predict", self.t, i))
            prediction = learner.predict()
            x_prev = x
            x = (1.0 - eta) * x + eta * prediction
            if i == 1:
                assert self._inner.contains(x), "first blend left the decision set"
            if self.call_log is not None:
                self.call_log.append(("oracle", self.t, i))
            g = np.asarray(grad_oracle(x_prev), dtype=np.float64)
            self.ledger.add_queries(1)
            norm = float(np.linalg.norm(g))
            if norm > self.max_estimate_norm:
                self.max_estimate_norm = norm
            learner.update(g)
        self.ledger.record_loss(loss_for_ledger.value(x))
        return x

    def bandit_round(
        self, oracle: NoisyBanditOracle, loss_for_ledger: ConvexLoss | None = None
    ) -> np.ndarray:
        """One round on noisy value feedback alone; returns x_t.

        Each inner step queries the oracle once at x^{i-1} + delta*v with a
        fresh unit v and feeds the one-point estimate to A_i. The ledger
        records the exact loss (default: the oracle's own loss function,
        evaluated directly without spending a query).
        """
        if self.mode != "bandit_fkm":
            raise RuntimeError("bandit_round requires bandit_fkm mode")
        ledger_loss = loss_for_ledger if loss_for_ledger is not None else oracle.loss
        d = self.set.dim
        self.t += 1
        x = np.zeros(d)
        for i, (eta, learner) in enumerate(zip(self.etas, self.learners), start=1):
            if self.call_log is not None:
                self.call_log.append(("predict", self.t, i))
            prediction = learner.predict()
            x_prev = x
            x = (1.0 - eta) * x + eta * prediction
            if i == 1:
                assert self._inner.contains(x), "first blend left the decision set"
            if self.call_log is not None:
                self.call_log.append(("oracle", self.t, i))
            v = sphere_sample(self.rng, d)
            feedback = oracle.query(x_prev + self.delta * v)
            self.ledger.add_queries(1)
            g = one_point_estimate(d, self.delta, feedback, v)
            norm = float(np.linalg.norm(g))
            if norm > self.max_estimate_norm:
                self.max_estimate_norm = norm
            learner.update(g)
        self.ledger.record_loss(ledger_loss.value(x))
        return x
