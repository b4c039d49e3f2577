"""
Centered stick-breaking transform between R^(K-1) and the K-simplex.

The offset log(K-1-k) is subtracted from coordinate k before the logistic so
that y = 0 maps to the uniform simplex. All functions act on the last axis and
broadcast over leading axes (phi is transformed row-wise).

Work happens in log space: log_simplex_from_unconstrained() never underflows
to log(0) for finite input, which keeps the likelihood finite inside the
sampler.
"""

from typing import Tuple

import numpy as np

from ..errors import DomainError, NonFinite


def _offsets(km1: int) -> np.ndarray:
    return np.log(km1 - np.arange(km1, dtype=np.float64))


def _check_finite(y: np.ndarray) -> None:
    if not np.all(np.isfinite(y)):
        raise NonFinite("Unconstrained parameters contain NaN or Inf")


def log_simplex_from_unconstrained(y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Map unconstrained y (..., K-1) to log simplex coordinates (..., K).

    Returns:
        (log_s, z, log_abs_det_jacobian) where z are the stick fractions
        (..., K-1) needed by the gradient.
    """
    y = np.asarray(y, dtype=np.float64)
    _check_finite(y)
    km1 = y.shape[-1]
    x = y - _offsets(km1)
    # log sigmoid(x) and log(1 - sigmoid(x)), both finite for finite x
    log_z = -np.logaddexp(0.0, -x)
    log_1mz = -np.logaddexp(0.0, x)
    z = np.exp(log_z)

    # log of the remaining stick before each break
    cum = np.cumsum(log_1mz, axis=-1)
    log_rem = np.concatenate([np.zeros(y.shape[:-1] + (1,)), cum], axis=-1)

    log_s = np.concatenate([log_z + log_rem[..., :-1], log_rem[..., -1:]], axis=-1)
    log_det = np.sum(log_rem[..., :-1] + log_z + log_1mz, axis=-1)
    return log_s, z, log_det


def simplex_from_unconstrained(y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Map unconstrained y (..., K-1) onto the K-simplex.

    Args:
        y: Finite real array

    Returns:
        (simplex, log_abs_det_jacobian)
    """
    log_s, _, log_det = log_simplex_from_unconstrained(y)
    s = np.exp(log_s)
    return s / s.sum(axis=-1, keepdims=True), log_det


def unconstrain_simplex(s: np.ndarray) -> np.ndarray:
    """Inverse of simplex_from_unconstrained for strictly positive simplices."""
    s = np.asarray(s, dtype=np.float64)
    if np.any(s <= 0) or not np.all(np.isfinite(s)):
        raise DomainError("Simplex coordinates must be finite and strictly positive to unconstrain")
    km1 = s.shape[-1] - 1
    # remaining stick before each break, computed from the tail for accuracy
    tail = np.cumsum(s[..., ::-1], axis=-1)[..., ::-1]
    rem = tail[..., :-1]
    z = s[..., :-1] / rem
    return np.log(z) - np.log1p(-z) + _offsets(km1)


def simplex_grad_to_unconstrained(grad_log_s: np.ndarray, z: np.ndarray) -> np.ndarray:
    """
    Pull a gradient w.r.t. log s back to the unconstrained coordinates.

    d log s_k / d y_i is (1 - z_i) for k = i, -z_i for k > i and 0 otherwise,
    so df/dy_i = G_i (1 - z_i) - z_i * sum_{k>i} G_k.

    Args:
        grad_log_s: df/d(log s), shape (..., K)
        z: Stick fractions from log_simplex_from_unconstrained, shape (..., K-1)

    Returns:
        df/dy, shape (..., K-1)
    """
    tail = np.cumsum(grad_log_s[..., ::-1], axis=-1)[..., ::-1]
    return grad_log_s[..., :-1] * (1.0 - z) - z * tail[..., 1:]


def log_det_grad(z: np.ndarray) -> np.ndarray:
    """Gradient of the log-Jacobian w.r.t. y: 1 - z_i (K - i)."""
    km1 = z.shape[-1]
    return 1.0 - z * (km1 + 1 - np.arange(km1, dtype=np.float64))
