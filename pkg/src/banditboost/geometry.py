"""Convex decision sets with closed-form projection and linear minimization.

Every algorithm in the library interacts with its feasible region through
three oracle operations: Euclidean projection, linear minimization, and
shrinking toward the center (so that randomized query points a distance
``delta`` away stay feasible). Two set kinds are provided, balls and
axis-aligned boxes, both with closed forms for all three. New kinds can be
added by subclassing :class:`DecisionSet` and registering the subclass in
``SET_KINDS``.

Sets are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import numpy as np

from .rng import RngLike, seeded_generator

MEMBERSHIP_TOL = 1e-9


def _as_vector(z, dim: int, name: str = "point") -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (dim,):
        raise ValueError(
            f"{name} has dimension {z.shape[0] if z.ndim == 1 else z.shape}, "
            f"expected {dim}"
        )
    return z


class DecisionSet:
    """Abstract convex feasible region in R^d.

    Subclasses implement the oracle operations below; all of them must be
    exact up to floating-point rounding (membership tolerance 1e-9).
    """

    dim: int
    center: np.ndarray

    def project(self, z) -> np.ndarray:
        """Euclidean projection: the closest member of the set to ``z``."""
        raise NotImplementedError

    def linear_minimize(self, direction) -> np.ndarray:
        """A member minimizing ``direction . x``; the center when direction = 0."""
        raise NotImplementedError

    def contains(self, z, tol: float = MEMBERSHIP_TOL) -> bool:
        raise NotImplementedError

    def diameter(self) -> float:
        """sup of ||x - x'|| over members x, x'."""
        raise NotImplementedError

    def inradius(self) -> float:
        """Largest r such that a ball of radius r about the center fits inside."""
        raise NotImplementedError

    def shrink(self, xi: float) -> "DecisionSet":
        """The set scaled by (1 - xi) about its center, xi in [0, 1).

        Any member y of the shrunk set satisfies y + delta*v inside the
        original set for every unit v, whenever delta <= xi * inradius().
        """
        raise NotImplementedError

    def sample(self, rng: RngLike, n: int = 1) -> np.ndarray:
        """n members drawn uniformly at random, shape (n, dim)."""
        raise NotImplementedError

    def max_distance_to(self, point) -> float:
        """sup of ||y - point|| over members y (point need not be a member)."""
        raise NotImplementedError


class Ball(DecisionSet):
    """Euclidean ball of radius ``radius`` about ``center``."""

    def __init__(self, center, radius: float):
        center = np.asarray(center, dtype=np.float64)
        if center.ndim != 1:
            raise ValueError("center must be a 1-d point")
        if radius <= 0:
            raise ValueError(f"radius must be positive, got {radius}")
        self.center = center
        self.radius = float(radius)
        self.dim = center.shape[0]

    def project(self, z) -> np.ndarray:
        z = _as_vector(z, self.dim)
        offset = z - self.center
        norm = float(np.linalg.norm(offset))
        if norm <= self.radius:
            return z
        return self.center + offset * (self.radius / norm)

    def linear_minimize(self, direction) -> np.ndarray:
        direction = _as_vector(direction, self.dim, "direction")
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            return self.center.copy()
        return self.center - direction * (self.radius / norm)

    def contains(self, z, tol: float = MEMBERSHIP_TOL) -> bool:
        z = _as_vector(z, self.dim)
        return float(np.linalg.norm(z - self.center)) <= self.radius + tol

    def diameter(self) -> float:
        return 2.0 * self.radius

    def inradius(self) -> float:
        return self.radius

    def shrink(self, xi: float) -> "Ball":
        if not 0.0 <= xi < 1.0:
            raise ValueError(f"shrink fraction must lie in [0, 1), got {xi}")
        return Ball(self.center, self.radius * (1.0 - xi))

    def sample(self, rng: RngLike, n: int = 1) -> np.ndarray:
        rng = seeded_generator(rng)
        g = rng.standard_normal((n, self.dim))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        radii = self.radius * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / self.dim)
        return self.center + g / norms * radii

    def max_distance_to(self, point) -> float:
        point = _as_vector(point, self.dim)
        return float(np.linalg.norm(point - self.center)) + self.radius

    def __repr__(self) -> str:
        return f"Ball(center={self.center!r}, radius={self.radius})"


class Box(DecisionSet):
    """Axis-aligned box: center +/- half_widths per coordinate."""

    def __init__(self, center, half_widths):
        center = np.asarray(center, dtype=np.float64)
        half_widths = np.asarray(half_widths, dtype=np.float64)
        if center.ndim != 1 or half_widths.shape != center.shape:
            raise ValueError("center and half_widths must be 1-d of equal length")
        if np.any(half_widths <= 0):
            raise ValueError("half_widths must all be positive")
        self.center = center
        self.half_widths = half_widths
        self.dim = center.shape[0]

    def project(self, z) -> np.ndarray:
        z = _as_vector(z, self.dim)
        return np.clip(z, self.center - self.half_widths, self.center + self.half_widths)

    def linear_minimize(self, direction) -> np.ndarray:
        direction = _as_vector(direction, self.dim, "direction")
        # sign(0) = 0 leaves the tied coordinate at the center.
        return self.center - self.half_widths * np.sign(direction)

    def contains(self, z, tol: float = MEMBERSHIP_TOL) -> bool:
        z = _as_vector(z, self.dim)
        return bool(np.all(np.abs(z - self.center) <= self.half_widths + tol))

    def diameter(self) -> float:
        return float(np.linalg.norm(2.0 * self.half_widths))

    def inradius(self) -> float:
        return float(np.min(self.half_widths))

    def shrink(self, xi: float) -> "Box":
        if not 0.0 <= xi < 1.0:
            raise ValueError(f"shrink fraction must lie in [0, 1), got {xi}")
        return Box(self.center, self.half_widths * (1.0 - xi))

    def sample(self, rng: RngLike, n: int = 1) -> np.ndarray:
        rng = seeded_generator(rng)
        u = rng.uniform(-1.0, 1.0, size=(n, self.dim))
        return self.center + u * self.half_widths

    def max_distance_to(self, point) -> float:
        point = _as_vector(point, self.dim)
        lo = self.center - self.half_widths
        hi = self.center + self.half_widths
        farthest = np.where(np.abs(lo - point) >= np.abs(hi - point), lo, hi)
        return float(np.linalg.norm(farthest - point))

    def __repr__(self) -> str:
        return f"Box(center={self.center!r}, half_widths={self.half_widths!r})"


SET_KINDS: dict[str, type] = {"ball": Ball, "box": Box}


def make_decision_set(kind: str, center, scale) -> DecisionSet:
    """Build a set from config fields: kind, center, and per-kind scale.

    ``scale`` is the radius for balls and the per-coordinate half-widths
    for boxes (a scalar is broadcast to every coordinate).
    """
    if kind not in SET_KINDS:
        raise ValueError(f"unknown set kind {kind!r}; known kinds: {sorted(SET_KINDS)}")
    center = np.asarray(center, dtype=np.float64)
    if kind == "ball":
        return Ball(center, float(np.asarray(scale).item()))
    scale = np.asarray(scale, dtype=np.float64)
    if scale.ndim == 0:
        scale = np.full(center.shape, float(scale))
    return Box(center, scale)
