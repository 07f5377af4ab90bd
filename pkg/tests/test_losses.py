"""Loss families, the noisy value oracle, and spherical smoothing machinery."""

import numpy as np
import pytest

from banditboost.geometry import Ball, Box
from banditboost.losses import (
    LinearLoss,
    NoisyBanditOracle,
    QuadraticLoss,
    SmoothedLossProbe,
    SquaredDistanceLoss,
    one_point_estimate,
    sphere_sample,
)

RNG = np.random.default_rng(7)

BALL2 = Ball([0.0, 0.0], 1.0)


# ------------------------------------------------------------------ values

def test_squared_distance_examples():
    dom = Ball([0.0, 0.0], 5.0)
    assert SquaredDistanceLoss([1.0, 0.0], dom).value([1.0, 0.0]) == 0.0
    assert SquaredDistanceLoss([0.0, 0.0], dom).value([3.0, 4.0]) == 25.0


def test_linear_example():
    dom = Ball([0.0, 0.0], 2.0)
    assert LinearLoss([2.0, -1.0], dom).value([1.0, 1.0]) == pytest.approx(1.0)


def test_gradient_examples():
    dom = Ball([0.0, 0.0], 5.0)
    np.testing.assert_allclose(
        SquaredDistanceLoss([0.0, 0.0], dom).gradient([3.0, 4.0]), [6.0, 8.0]
    )
    np.testing.assert_allclose(
        LinearLoss([2.0, -1.0], dom).gradient([0.3, 0.7]), [2.0, -1.0]
    )
    quad = QuadraticLoss(np.eye(2), [1.0, 1.0], dom)
    np.testing.assert_allclose(quad.gradient([1.0, 1.0]), [0.0, 0.0])


def test_quadratic_validates_matrix():
    dom = Ball([0.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        QuadraticLoss([[1.0, 2.0], [0.0, 1.0]], [0.0, 0.0], dom)  # not symmetric
    with pytest.raises(ValueError):
        QuadraticLoss([[-1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], dom)  # not psd


def test_dimension_mismatch():
    loss = SquaredDistanceLoss([0.0, 0.0], BALL2)
    with pytest.raises(ValueError):
        loss.value([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        loss.gradient([1.0])


# --------------------------------------------------- declared loss constants

def sampled_constant_check(loss, domain, n=10_000):
    pts = domain.sample(RNG, n)
    vals = loss.value_batch(pts)
    assert np.max(np.abs(vals)) <= loss.bound_M + 1e-9

    # Lipschitz and smoothness on sampled pairs
    a = domain.sample(RNG, 2000)
    b = domain.sample(RNG, 2000)
    va, vb = loss.value_batch(a), loss.value_batch(b)
    gaps = np.linalg.norm(a - b, axis=1)
    keep = gaps > 1e-12
    assert np.all(np.abs(va - vb)[keep] <= loss.lipschitz_L * gaps[keep] + 1e-9)
    gdiff = np.array(
        [np.linalg.norm(loss.gradient(x) - loss.gradient(y)) for x, y in zip(a[:500], b[:500])]
    )
    assert np.all(gdiff <= loss.smoothness_beta * gaps[:500] + 1e-9)


def test_constants_squared_distance_ball():
    dom = Ball([0.5, -0.5], 2.0)
    loss = SquaredDistanceLoss([1.0, 0.0], dom)
    sampled_constant_check(loss, dom)
    assert loss.smoothness_beta == 2.0


def test_constants_linear_box():
    dom = Box([0.0, 0.0, 0.0], [1.0, 2.0, 0.5])
    loss = LinearLoss([1.0, -3.0, 2.0], dom)
    sampled_constant_check(loss, dom)
    assert loss.smoothness_beta == 0.0
    assert loss.lipschitz_L == pytest.approx(np.linalg.norm([1.0, -3.0, 2.0]))


def test_constants_quadratic_ball():
    dom = Ball([0.0, 0.0], 1.5)
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    loss = QuadraticLoss(A, [0.25, 0.0], dom)
    sampled_constant_check(loss, dom)
    assert loss.smoothness_beta == pytest.approx(np.linalg.eigvalsh(A)[-1])


# ------------------------------------------------------------- noisy oracle

def test_oracle_zero_noise_is_exact():
    loss = SquaredDistanceLoss([0.0, 0.0], BALL2)
    oracle = NoisyBanditOracle(loss, noise_halfwidth=0.0, rng=3)
    y = [0.3, -0.4]
    assert oracle.query(y) == loss.value(y)


def test_oracle_counts_every_query():
    loss = SquaredDistanceLoss([0.0, 0.0], BALL2)
    oracle = NoisyBanditOracle(loss, 0.1, rng=3)
    for _ in range(17):
        oracle.query([0.1, 0.1])
    oracle.query_batch(np.zeros((5, 2)))
    assert oracle.query_count == 22


def test_oracle_noise_bounded_and_centered():
    loss = SquaredDistanceLoss([0.0, 0.0], BALL2)
    h = 0.1
    oracle = NoisyBanditOracle(loss, h, rng=11)
    y = np.array([0.5, 0.0])
    exact = loss.value(y)
    n = 100_000
    vals = oracle.query_batch(np.tile(y, (n, 1)))
    assert np.all(vals >= exact - h) and np.all(vals <= exact + h)
    # uniform on [-h, h] has sd h/sqrt(3)
    tol = 3 * (h / np.sqrt(3)) / np.sqrt(n)
    assert abs(vals.mean() - exact) <= tol


def test_oracle_rejects_noise_above_loss_bound():
    loss = SquaredDistanceLoss([0.0, 0.0], BALL2)  # M = 1 on the unit ball
    with pytest.raises(ValueError):
        NoisyBanditOracle(loss, noise_halfwidth=loss.bound_M + 1.0, rng=0)
    with pytest.raises(ValueError):
        NoisyBanditOracle(loss, noise_halfwidth=-0.1, rng=0)


# ------------------------------------------------------------ sphere draws

@pytest.mark.parametrize("dim", [1, 2, 10, 100])
def test_sphere_sample_unit_norm(dim):
    pts = sphere_sample(RNG, dim, n=200)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)
    single = sphere_sample(RNG, dim)
    assert single.shape == (dim,)
    assert np.linalg.norm(single) == pytest.approx(1.0, abs=1e-12)


def test_sphere_sample_dim_one_is_sign():
    pts = sphere_sample(RNG, 1, n=1000)
    assert set(np.unique(pts)) == {-1.0, 1.0}


@pytest.mark.parametrize("dim", [2, 5, 20])
def test_sphere_sample_mean_concentrates(dim):
    n = 100_000
    pts = sphere_sample(np.random.default_rng(dim), dim, n=n)
    assert np.linalg.norm(pts.mean(axis=0)) <= 4.0 / np.sqrt(n) * np.sqrt(dim)


# ----------------------------------------------------- one-point estimation

def test_one_point_estimate_formula():
    v = np.array([0.0, 1.0, 0.0])
    np.testing.assert_allclose(one_point_estimate(3, 0.5, 2.0, v), [0.0, 12.0, 0.0])


def test_estimate_unbiased_for_smoothed_gradient():
    # smoothed squared distance to the origin has gradient exactly 2y
    dom = Ball([0.0, 0.0], 3.0)
    loss = SquaredDistanceLoss([0.0, 0.0], dom)
    delta = 0.3
    y = np.array([0.4, -0.2])
    n = 400_000
    rng = np.random.default_rng(99)
    v = sphere_sample(rng, 2, n=n)
    feedback = loss.value_batch(y + delta * v)
    est = one_point_estimate(2, delta, feedback, v)
    se = est.std(axis=0, ddof=1) / np.sqrt(n)
    np.testing.assert_array_less(np.abs(est.mean(axis=0) - 2 * y), 5 * se)


def test_estimate_norm_bound():
    dom = Ball([0.0, 0.0, 0.0], 1.0)
    loss = SquaredDistanceLoss([0.2, 0.0, 0.0], dom)
    d, delta = 3, 0.25
    inner = dom.shrink(delta / dom.inradius())
    rng = np.random.default_rng(5)
    ys = inner.sample(rng, 4000)
    v = sphere_sample(rng, d, n=4000)
    fb = loss.value_batch(ys + delta * v)
    norms = np.linalg.norm(one_point_estimate(d, delta, fb, v), axis=1)
    assert np.all(norms <= d * loss.bound_M / delta + 1e-9)

    # noise bounded by M at most doubles the bound
    oracle = NoisyBanditOracle(loss, loss.bound_M, rng=8)
    fb_noisy = oracle.query_batch(ys + delta * v)
    noisy_norms = np.linalg.norm(one_point_estimate(d, delta, fb_noisy, v), axis=1)
    assert np.all(noisy_norms <= 2 * d * loss.bound_M / delta + 1e-9)


# ------------------------------------------------------------ smoothed loss

def test_probe_quadratic_analytic_value():
    # smoothing ||y||^2 over the radius-delta sphere adds exactly delta^2
    dom = Ball([0.0, 0.0], 2.0)
    loss = SquaredDistanceLoss([0.0, 0.0], dom)
    probe = SmoothedLossProbe(loss, delta=0.5, sample_count=200_000)
    y = np.array([0.3, 0.4])
    mean, se = probe.estimate(y, rng=21)
    assert abs(mean - (0.25 + 0.25)) <= 4 * se + 1e-12


def test_probe_linear_loss_unchanged_in_expectation():
    dom = Ball([0.0, 0.0], 2.0)
    loss = LinearLoss([1.0, -2.0], dom)
    probe = SmoothedLossProbe(loss, delta=0.4, sample_count=50_000)
    y = np.array([0.5, 0.5])
    mean, _ = probe.estimate(y, rng=2)
    assert abs(mean - loss.value(y)) <= 4 * loss.lipschitz_L * 0.4 / np.sqrt(50_000)


def test_probe_within_delta_lipschitz_of_loss():
    dom = Ball([0.0, 0.0, 0.0], 1.0)
    loss = SquaredDistanceLoss([0.1, 0.0, 0.0], dom)
    delta = 0.2
    probe = SmoothedLossProbe(loss, delta, sample_count=20_000)
    inner = dom.shrink(delta / dom.inradius())
    rng = np.random.default_rng(31)
    for i in range(25):
        y = inner.sample(rng)[0]
        mean, se = probe.estimate(y, rng=100 + i)
        assert abs(mean - loss.value(y)) <= delta * loss.lipschitz_L + 4 * se


def test_smoothed_slopes_bounded_by_smoothness():
    # first differences along random directions, common random numbers
    dom = Ball([0.0, 0.0], 1.0)
    loss = SquaredDistanceLoss([0.0, 0.0], dom)
    d, delta, s = 2, 0.3, 1e-3
    bound = d * loss.lipschitz_L / delta
    rng = np.random.default_rng(17)
    inner = dom.shrink(0.5)
    for _ in range(50):
        y = inner.sample(rng)[0]
        u = sphere_sample(rng, d)
        v = sphere_sample(np.random.default_rng(1234), d, n=50_000)
        f0 = loss.value_batch(y + delta * v).mean()
        f1 = loss.value_batch(y + s * u + delta * v).mean()
        assert abs(f1 - f0) / s <= bound + 1e-6


def test_probe_single_sample_has_zero_stderr():
    loss = SquaredDistanceLoss([0.0, 0.0], BALL2)
    probe = SmoothedLossProbe(loss, 0.1, sample_count=1)
    _, se = probe.estimate([0.0, 0.0], rng=0)
    assert se == 0.0
