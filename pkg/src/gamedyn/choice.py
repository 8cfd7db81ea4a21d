"""Soft-max choice map and its calculus.

All maps take a temperature eps > 0.  The block soft-max is

    sigma_i(z) = exp(z_i / eps) / sum_j exp(z_j / eps),

computed with max subtraction.  log_sum_exp is its potential,
eps * log sum_j exp(z_j / eps), whose gradient is the soft-max and whose
Bregman divergence serves as a Lyapunov function for the score dynamics.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DomainError


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not np.isfinite(eps) or eps <= 0.0:
        raise DomainError(f"temperature must be positive, got {eps!r}")
    return eps


def _check_finite(z: np.ndarray) -> None:
    if not np.all(np.isfinite(z)):
        raise DomainError("non-finite entries in score input")


def softmax_block(z_block, eps: float) -> np.ndarray:
    """Soft-max over the last axis of a single score block."""
    eps = _check_eps(eps)
    z = np.asarray(z_block, dtype=float)
    _check_finite(z)
    m = z.max(axis=-1, keepdims=True)
    w = np.exp((z - m) / eps)
    return w / w.sum(axis=-1, keepdims=True)


def softmax(z, eps: float, action_counts: Sequence[int]) -> np.ndarray:
    """Per-player soft-max of a concatenated score vector (batch dims allowed)."""
    eps = _check_eps(eps)
    z = np.asarray(z, dtype=float)
    counts = tuple(int(c) for c in action_counts)
    n = sum(counts)
    if z.shape[-1] != n:
        raise DomainError(f"score vector has length {z.shape[-1]}, expected {n}")
    _check_finite(z)
    if len(set(counts)) == 1:
        k = counts[0]
        blocks = z.reshape(z.shape[:-1] + (len(counts), k))
        m = blocks.max(axis=-1, keepdims=True)
        w = np.exp((blocks - m) / eps)
        w = w / w.sum(axis=-1, keepdims=True)
        return w.reshape(z.shape)
    out = np.empty_like(z)
    start = 0
    for c in counts:
        out[..., start:start + c] = softmax_block(z[..., start:start + c], eps)
        start += c
    return out


def log_sum_exp(z_block, eps: float) -> np.ndarray:
    """eps * log sum exp(z / eps) over the last axis, max-subtracted."""
    eps = _check_eps(eps)
    z = np.asarray(z_block, dtype=float)
    _check_finite(z)
    m = z.max(axis=-1)
    shifted = z - m[..., None]
    return m + eps * np.log(np.exp(shifted / eps).sum(axis=-1))


def softmax_jacobian(z_block, eps: float) -> np.ndarray:
    """Jacobian of the block soft-max: (diag(sigma) - sigma sigma^T) / eps."""
    z = np.asarray(z_block, dtype=float)
    if z.ndim != 1:
        raise DomainError("softmax_jacobian takes a single score block")
    s = softmax_block(z, eps)
    return (np.diag(s) - np.outer(s, s)) / float(eps)


def profile_jacobian(z, eps: float, action_counts: Sequence[int]) -> np.ndarray:
    """Block-diagonal Jacobian of the per-player soft-max at a full profile."""
    z = np.asarray(z, dtype=float)
    counts = tuple(int(c) for c in action_counts)
    n = sum(counts)
    if z.shape != (n,):
        raise DomainError(f"score vector has shape {z.shape}, expected ({n},)")
    jac = np.zeros((n, n))
    start = 0
    for c in counts:
        jac[start:start + c, start:start + c] = softmax_jacobian(z[start:start + c], eps)
        start += c
    return jac


def bregman_lse(z, z_ref, eps: float, action_counts: Sequence[int]) -> np.ndarray:
    """Bregman divergence of the summed per-player log_sum_exp potentials,

        V_ref(z) = sum_p [ lse(z^p) - lse(ref^p) - sigma(ref^p) . (z^p - ref^p) ],

    nonnegative and zero iff z - ref is constant on each block.  z may carry
    batch dims; z_ref is a single profile.
    """
    eps = _check_eps(eps)
    z = np.asarray(z, dtype=float)
    ref = np.asarray(z_ref, dtype=float)
    counts = tuple(int(c) for c in action_counts)
    n = sum(counts)
    if z.shape[-1] != n or ref.shape != (n,):
        raise DomainError("score vectors do not match the action counts")
    _check_finite(z)
    _check_finite(ref)
    total = np.zeros(z.shape[:-1])
    start = 0
    for c in counts:
        zb = z[..., start:start + c]
        rb = ref[start:start + c]
        sb = softmax_block(rb, eps)
        total = total + (log_sum_exp(zb, eps) - log_sum_exp(rb, eps)
                         - (zb - rb) @ sb)
        start += c
    return total
