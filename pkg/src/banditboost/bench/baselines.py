"""Baselines the benchmarks compare against.

``NFkmModel`` is the budget-matched control for boosting: one projected
linear model whose parameter update consumes the same N noisy queries per
round, either averaged into one variance-reduced spherical estimate
(default, the stronger baseline) or spent as N sequential one-point
steps. Either way one more query reports the emitted prediction's
feedback, so the per-round budget is N+1, identical to boosting's.

The full-information OGD baseline needs no class of its own: it is a
single ``LinearWeakLearner`` stepped on exact loss gradients by the
runner.
"""

from __future__ import annotations

import numpy as np

from ..boosting import LinearWeakLearner
from ..geometry import DecisionSet
from ..losses import NoisyBanditOracle, one_point_estimate, sphere_sample
from ..olo import RegretLedger
from ..rng import RngLike, seeded_generator


class NFkmModel:
    """Single linear model, N-query spherical-estimate updates per round."""

    def __init__(
        self,
        set_y: DecisionSet,
        feature_dim: int,
        n_queries: int,
        delta: float,
        sigma: float,
        lr: float,
        c: float,
        clip_cap: float | None = None,
        mode: str = "average",
        rng: RngLike | None = None,
    ):
        if mode not in ("average", "sequential"):
            raise ValueError(f"unknown mode {mode!r}")
        if n_queries < 1:
            raise ValueError(f"need at least one query per round, got {n_queries}")
        if delta <= 0:
            raise ValueError(f"delta must be positive, got {delta}")
        inradius = set_y.inradius()
        if delta >= inradius:
            raise ValueError(
                f"delta={delta} must be below the prediction-set inradius {inradius}"
            )
        self.set_y = set_y
        self.delta = float(delta)
        self.n_queries = int(n_queries)
        self.mode = mode
        self.inner = set_y.shrink(delta / inradius)
        self.model = LinearWeakLearner(
            self.inner, feature_dim, sigma, lr=lr, c=c, clip_cap=clip_cap
        )
        self.rng = seeded_generator(rng if rng is not None else 0)
        self.ledger = RegretLedger()
        self.t = 0
        self.max_estimate_norm = 0.0

    @property
    def version(self) -> int:
        return self.model.updates_seen

    def preview(self, x) -> np.ndarray:
        """Current prediction, read-only."""
        return self.model.peek(x)

    def _note_norms(self, estimates: np.ndarray) -> None:
        norms = np.linalg.norm(np.atleast_2d(estimates), axis=1)
        top = float(norms.max())
        if top > self.max_estimate_norm:
            self.max_estimate_norm = top

    def round(self, x, oracle: NoisyBanditOracle) -> np.ndarray:
        """One round: emit the pre-update prediction, spend N+1 queries."""
        self.t += 1
        d = self.set_y.dim
        if self.mode == "average":
            y0 = self.model.predict(x)
            v = sphere_sample(self.rng, d, self.n_queries)
            feedback = oracle.query_batch(y0 + self.delta * v)
            estimates = one_point_estimate(d, self.delta, feedback, v)
            self._note_norms(estimates)
            self.model.update(x, estimates.mean(axis=0))
        else:
            y0 = None
            for _ in range(self.n_queries):
                p = self.model.predict(x)
                if y0 is None:
                    y0 = p
                v = sphere_sample(self.rng, d)
                feedback = oracle.query(p + self.delta * v)
                estimate = one_point_estimate(d, self.delta, feedback, v)
                self._note_norms(estimate)
                self.model.update(x, estimate)
        final_feedback = oracle.query(y0)
        self.ledger.add_queries(self.n_queries + 1)
        self.ledger.record_loss(final_feedback)
        return y0
