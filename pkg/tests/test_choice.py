import numpy as np
import pytest

from gamedyn import DomainError, bregman_lse, profile_jacobian, softmax
from gamedyn.analysis import numeric_jacobian
from gamedyn.choice import log_sum_exp, softmax_block, softmax_jacobian


def test_block_softmax_is_distribution(rng):
    for eps in (0.05, 1.0, 10.0):
        z = rng.uniform(-5, 5, 7)
        s = softmax_block(z, eps)
        assert np.all(s > 0)
        assert abs(s.sum() - 1.0) < 1e-12


def test_softmax_handles_large_scores():
    s = softmax_block(np.array([1e4, 0.0, -1e4]), 1.0)
    assert np.isfinite(s).all()
    np.testing.assert_allclose(s, [1.0, 0.0, 0.0], atol=1e-300)


def test_temperature_must_be_positive():
    with pytest.raises(DomainError):
        softmax_block(np.zeros(3), 0.0)
    with pytest.raises(DomainError):
        softmax_block(np.zeros(3), -1.0)
    with pytest.raises(DomainError):
        softmax_block(np.array([np.nan, 0.0]), 1.0)


def test_shift_invariance_per_block(rng):
    z = rng.uniform(-2, 2, 6)
    shifted = z + 3.7
    np.testing.assert_allclose(softmax_block(z, 0.7), softmax_block(shifted, 0.7),
                               atol=1e-12)


def test_profile_softmax_blocks(rng):
    z = rng.uniform(-3, 3, 5)
    out = softmax(z, 1.3, (3, 2))
    np.testing.assert_allclose(out[:3], softmax_block(z[:3], 1.3), atol=1e-14)
    np.testing.assert_allclose(out[3:], softmax_block(z[3:], 1.3), atol=1e-14)


def test_profile_softmax_batched(rng):
    zs = rng.uniform(-3, 3, (8, 6))
    batched = softmax(zs, 0.5, (3, 3))
    for i in range(8):
        np.testing.assert_allclose(batched[i], softmax(zs[i], 0.5, (3, 3)),
                                   atol=1e-14)


def test_log_sum_exp_gradient_is_softmax(rng):
    for eps in (0.2, 1.0, 4.0):
        z = rng.uniform(-3, 3, 5)
        grad = numeric_jacobian(lambda v: np.atleast_1d(log_sum_exp(v, eps)),
                                z).ravel()
        np.testing.assert_allclose(grad, softmax_block(z, eps), atol=1e-6)


def test_softmax_jacobian_closed_form(rng):
    for eps in (0.2, 1.0, 4.0):
        z = rng.uniform(-3, 3, 4)
        jac_fd = numeric_jacobian(lambda v: softmax_block(v, eps), z)
        np.testing.assert_allclose(jac_fd, softmax_jacobian(z, eps), atol=1e-6)
        s = softmax_block(z, eps)
        np.testing.assert_allclose(softmax_jacobian(z, eps),
                                   (np.diag(s) - np.outer(s, s)) / eps,
                                   atol=1e-14)


def test_profile_jacobian_block_diagonal(rng):
    z = rng.uniform(-2, 2, 5)
    jac = profile_jacobian(z, 0.8, (3, 2))
    np.testing.assert_allclose(jac[:3, :3], softmax_jacobian(z[:3], 0.8))
    np.testing.assert_allclose(jac[3:, 3:], softmax_jacobian(z[3:], 0.8))
    assert np.all(jac[:3, 3:] == 0.0)
    assert np.all(jac[3:, :3] == 0.0)


def test_bregman_nonnegative_zero_on_shifts(rng):
    z = rng.uniform(-2, 2, 6)
    val = bregman_lse(z + 1.9, z, 0.7, (3, 3))
    assert val < 1e-12
    other = rng.uniform(-2, 2, 6)
    assert bregman_lse(other, z, 0.7, (3, 3)) >= 0.0


def test_bregman_sandwich(rng):
    for _ in range(100):
        eps = float(rng.uniform(0.1, 3.0))
        z1 = rng.uniform(-4, 4, 5)
        z2 = rng.uniform(-4, 4, 5)
        dx = softmax_block(z1, eps) - softmax_block(z2, eps)
        dz = z1 - z2
        val = float(bregman_lse(z1, z2, eps, (5,)))
        assert val >= 0.5 * eps * (dx @ dx) - 1e-12
        assert val <= 0.5 / eps * (dz @ dz) + 1e-12


def test_choice_map_monotone_and_cocoercive(rng):
    for _ in range(200):
        eps = float(rng.uniform(0.1, 3.0))
        z1 = rng.uniform(-4, 4, 4)
        z2 = rng.uniform(-4, 4, 4)
        dx = softmax_block(z1, eps) - softmax_block(z2, eps)
        dz = z1 - z2
        inner = dz @ dx
        assert inner >= -1e-12
        assert inner >= eps * (dx @ dx) - 1e-12
        assert np.linalg.norm(dx) <= np.linalg.norm(dz) / eps + 1e-12
