"""Convex loss families, the noisy point-query channel, and smoothing tools.

Each loss carries declared constants over a given decision set: a value
bound M (|loss| <= M on the set), a Lipschitz constant L, and a smoothness
constant beta. The constants come from closed forms at construction; tests
validate them by sampling.

``NoisyBanditOracle`` is the only channel bandit algorithms may use: it
returns loss(y) + w with w uniform on [-h, h] and counts every query.
``SmoothedLossProbe`` Monte-Carlo-evaluates the sphere-smoothed loss
E_v[loss(y + delta*v)], the quantity the one-point gradient estimator
(d/delta) * feedback * v is unbiased for; it exists for tests and is never
consulted by the algorithms themselves.
"""

from __future__ import annotations

import numpy as np

from .geometry import DecisionSet
from .rng import RngLike, seeded_generator


def _check_dim(y, dim: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (dim,):
        raise ValueError(
            f"point has dimension {y.shape[0] if y.ndim == 1 else y.shape}, "
            f"expected {dim}"
        )
    return y


class ConvexLoss:
    """Base class: a convex function with declared (M, L, beta) over a set."""

    dim: int
    domain: DecisionSet
    bound_M: float
    lipschitz_L: float
    smoothness_beta: float

    def value(self, y) -> float:
        raise NotImplementedError

    def gradient(self, y) -> np.ndarray:
        raise NotImplementedError

    def value_batch(self, ys: np.ndarray) -> np.ndarray:
        """Values at each row of ``ys``, shape (n, dim) -> (n,)."""
        raise NotImplementedError


class SquaredDistanceLoss(ConvexLoss):
    """loss(y) = ||y - target||^2.

    Constants over ``domain``: M = R^2 and L = 2R where R is the farthest
    set point's distance to the target; beta = 2. These are the exact
    suprema, attained on the boundary.
    """

    def __init__(self, target, domain: DecisionSet):
        self.domain = domain
        self.target = _check_dim(target, domain.dim)
        self.dim = domain.dim
        reach = domain.max_distance_to(self.target)
        self.bound_M = reach**2
        self.lipschitz_L = 2.0 * reach
        self.smoothness_beta = 2.0

    def value(self, y) -> float:
        y = _check_dim(y, self.dim)
        diff = y - self.target
        return float(diff @ diff)

    def gradient(self, y) -> np.ndarray:
        y = _check_dim(y, self.dim)
        return 2.0 * (y - self.target)

    def value_batch(self, ys: np.ndarray) -> np.ndarray:
        diff = np.asarray(ys, dtype=np.float64) - self.target
        return np.einsum("ij,ij->i", diff, diff)


class LinearLoss(ConvexLoss):
    """loss(y) = coefficients . y; beta = 0, L = ||coefficients||.

    M is the exact supremum of |loss| over the domain, found by linear
    minimization in both directions.
    """

    def __init__(self, coefficients, domain: DecisionSet):
        self.domain = domain
        self.coefficients = _check_dim(coefficients, domain.dim)
        self.dim = domain.dim
        lo = float(self.coefficients @ domain.linear_minimize(self.coefficients))
        hi = float(self.coefficients @ domain.linear_minimize(-self.coefficients))
        self.bound_M = max(abs(lo), abs(hi))
        self.lipschitz_L = float(np.linalg.norm(self.coefficients))
        self.smoothness_beta = 0.0

    def value(self, y) -> float:
        y = _check_dim(y, self.dim)
        return float(self.coefficients @ y)

    def gradient(self, y) -> np.ndarray:
        _check_dim(y, self.dim)
        return self.coefficients.copy()

    def value_batch(self, ys: np.ndarray) -> np.ndarray:
        return np.asarray(ys, dtype=np.float64) @ self.coefficients


class QuadraticLoss(ConvexLoss):
    """loss(y) = 0.5 (y - offset)^T A (y - offset) with A symmetric psd.

    The offset is the unconstrained minimizer. beta is the top eigenvalue;
    M and L are closed-form upper bounds via the farthest-point distance
    R = max ||y - offset|| over the domain: L <= beta*R, M <= 0.5*beta*R^2.
    """

    def __init__(self, matrix, offset, domain: DecisionSet):
        self.domain = domain
        self.offset = _check_dim(offset, domain.dim)
        self.dim = domain.dim
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape != (self.dim, self.dim):
            raise ValueError(f"matrix must be {self.dim}x{self.dim}, got {matrix.shape}")
        if not np.allclose(matrix, matrix.T):
            raise ValueError("matrix must be symmetric")
        eigs = np.linalg.eigvalsh(matrix)
        if eigs[0] < -1e-9:
            raise ValueError(f"matrix must be positive semidefinite, min eigenvalue {eigs[0]}")
        self.matrix = matrix
        self.smoothness_beta = float(max(eigs[-1], 0.0))
        reach = domain.max_distance_to(self.offset)
        self.lipschitz_L = self.smoothness_beta * reach
        self.bound_M = 0.5 * self.smoothness_beta * reach**2

    def value(self, y) -> float:
        y = _check_dim(y, self.dim)
        diff = y - self.offset
        return float(0.5 * diff @ self.matrix @ diff)

    def gradient(self, y) -> np.ndarray:
        y = _check_dim(y, self.dim)
        return self.matrix @ (y - self.offset)

    def value_batch(self, ys: np.ndarray) -> np.ndarray:
        diff = np.asarray(ys, dtype=np.float64) - self.offset
        return 0.5 * np.einsum("ij,jk,ik->i", diff, self.matrix, diff)


LOSS_KINDS: dict[str, type] = {
    "squared_distance": SquaredDistanceLoss,
    "linear": LinearLoss,
    "user_quadratic": QuadraticLoss,
}


class NoisyBanditOracle:
    """Point-query channel: query(y) = loss(y) + w, w uniform on [-h, h].

    The half-width must not exceed the loss bound M (larger noise would
    break the estimator norm guarantee the algorithms rely on). Every
    query increments ``query_count`` by one; budget comparisons between
    algorithms read this counter.
    """

    def __init__(self, loss: ConvexLoss, noise_halfwidth: float, rng: RngLike):
        if noise_halfwidth < 0:
            raise ValueError(f"noise half-width must be nonnegative, got {noise_halfwidth}")
        if noise_halfwidth > loss.bound_M:
            raise ValueError(
                f"noise half-width {noise_halfwidth} exceeds the loss bound "
                f"M={loss.bound_M}; feedback would be noise-dominated"
            )
        self.loss = loss
        self.noise_halfwidth = float(noise_halfwidth)
        self.rng = seeded_generator(rng)
        self.query_count = 0

    def query(self, y) -> float:
        self.query_count += 1
        value = self.loss.value(y)
        if self.noise_halfwidth == 0.0:
            return value
        return value + self.rng.uniform(-self.noise_halfwidth, self.noise_halfwidth)

    def query_batch(self, ys: np.ndarray) -> np.ndarray:
        ys = np.asarray(ys, dtype=np.float64)
        self.query_count += ys.shape[0]
        values = self.loss.value_batch(ys)
        if self.noise_halfwidth == 0.0:
            return values
        return values + self.rng.uniform(
            -self.noise_halfwidth, self.noise_halfwidth, size=ys.shape[0]
        )


def sphere_sample(rng: RngLike, dim: int, n: int | None = None) -> np.ndarray:
    """Uniform unit vectors via normalized Gaussians.

    Returns shape (dim,) when n is None, else (n, dim). In dimension one
    the result is exactly +/-1.
    """
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    rng = seeded_generator(rng)
    count = 1 if n is None else n
    g = rng.standard_normal((count, dim))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms == 0.0):  # probability zero, but keep the contract exact
        bad = norms == 0.0
        g[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(g, axis=1)
    v = g / norms[:, None]
    return v[0] if n is None else v


def one_point_estimate(dim: int, delta: float, feedback, v) -> np.ndarray:
    """The spherical gradient estimate (dim/delta) * feedback * v.

    Broadcasts: scalar feedback with v of shape (dim,), or feedback of
    shape (n,) with v of shape (n, dim).
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    feedback = np.asarray(feedback, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if feedback.ndim == 0:
        return (dim / delta) * float(feedback) * v
    return (dim / delta) * feedback[:, None] * v


class SmoothedLossProbe:
    """Monte-Carlo evaluation of the sphere-smoothed loss E_v[loss(y + delta*v)].

    Test-side oracle only. The smoothed loss stays within delta*L of the
    raw loss and is what the one-point estimator differentiates.
    """

    def __init__(self, loss: ConvexLoss, delta: float, sample_count: int = 10_000):
        if delta <= 0:
            raise ValueError(f"delta must be positive, got {delta}")
        if sample_count < 1:
            raise ValueError(f"sample_count must be >= 1, got {sample_count}")
        self.loss = loss
        self.delta = float(delta)
        self.sample_count = int(sample_count)

    def estimate(self, y, rng: RngLike) -> tuple[float, float]:
        """(mean, standard error) of loss(y + delta*v) over fresh sphere draws."""
        y = _check_dim(y, self.loss.dim)
        v = sphere_sample(rng, self.loss.dim, self.sample_count)
        values = self.loss.value_batch(y + self.delta * v)
        mean = float(np.mean(values))
        if self.sample_count == 1:
            return mean, 0.0
        stderr = float(np.std(values, ddof=1) / np.sqrt(self.sample_count))
        return mean, stderr
