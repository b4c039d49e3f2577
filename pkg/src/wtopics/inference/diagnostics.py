"""
Convergence diagnostics: split R-hat and autocorrelation-based ESS.

Both take draws shaped (chains, draws) or (chains, draws, params) and return
one value per parameter.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import InsufficientDraws

logger = logging.getLogger(__name__)

# Returned when chains are constant but disagree (between-chain variance with no
# within-chain variance).
RHAT_DISJOINT = 1.0e6
RHAT_WARN = 1.05


@dataclass
class Diagnostics:
    """Per-parameter R-hat and ESS plus per-chain acceptance rates."""

    rhat: np.ndarray
    ess: np.ndarray
    acceptance: np.ndarray

    def to_dict(self) -> dict:
        return {
            "max_rhat": float(np.max(self.rhat)) if self.rhat.size else None,
            "min_ess": float(np.min(self.ess)) if self.ess.size else None,
            "rhat": [float(v) for v in self.rhat],
            "ess": [float(v) for v in self.ess],
            "acceptance": [float(v) for v in self.acceptance],
        }


def _as_3d(draws: np.ndarray) -> np.ndarray:
    draws = np.asarray(draws, dtype=np.float64)
    if draws.ndim == 2:
        draws = draws[..., None]
    if draws.ndim != 3:
        raise ValueError(f"Expected (chains, draws[, params]), got shape {draws.shape}")
    n_chain, n_draw, _ = draws.shape
    if n_chain < 2 or n_draw < 4:
        raise InsufficientDraws(
            f"Need >= 2 chains and >= 4 draws per chain, got {n_chain} x {n_draw}"
        )
    return draws


def _split_chains(ary: np.ndarray) -> np.ndarray:
    """Split every chain in half and stack the halves as separate chains."""
    half = ary.shape[1] // 2
    return np.concatenate([ary[:, :half], ary[:, -half:]], axis=0)


def _rhat(ary: np.ndarray) -> float:
    """R-hat for a (chains, draws) array."""
    _, n = ary.shape
    chain_mean = ary.mean(axis=1)
    within = float(np.mean(ary.var(axis=1, ddof=1)))
    between = n * float(np.var(chain_mean, ddof=1))
    if within == 0.0:
        return 1.0 if between == 0.0 else RHAT_DISJOINT
    return float(np.sqrt((between / within + n - 1) / n))


def split_rhat(draws: np.ndarray) -> np.ndarray:
    """
    Split R-hat per parameter.

    Args:
        draws: (chains, draws) or (chains, draws, params)

    Returns:
        R-hat per parameter
    """
    ary = _split_chains(_as_3d(draws))
    return np.array([_rhat(ary[:, :, k]) for k in range(ary.shape[2])])


def _autocov(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of a 1-D series via FFT."""
    n = x.shape[0]
    x = x - x.mean()
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, n=m)
    acov = np.fft.irfft(f * np.conjugate(f), n=m)[:n]
    return acov / n


def _ess(ary: np.ndarray) -> float:
    """ESS for a (chains, draws) array with Geyer's initial positive/monotone sequence."""
    n_chain, n_draw = ary.shape
    total = n_chain * n_draw
    acov = np.asarray([_autocov(ary[c]) for c in range(n_chain)])
    chain_mean = ary.mean(axis=1)
    mean_var = float(np.mean(acov[:, 0])) * n_draw / (n_draw - 1.0)
    var_plus = mean_var * (n_draw - 1.0) / n_draw
    if n_chain > 1:
        var_plus += float(np.var(chain_mean, ddof=1))
    if var_plus == 0.0:
        return float(total)

    rho = np.zeros(n_draw)
    rho_even = 1.0
    rho[0] = rho_even
    rho_odd = 1.0 - (mean_var - np.mean(acov[:, 1])) / var_plus
    rho[1] = rho_odd

    t = 1
    while t < n_draw - 2 and (rho_even + rho_odd) >= 0.0:
        rho_even = 1.0 - (mean_var - np.mean(acov[:, t + 1])) / var_plus
        rho_odd = 1.0 - (mean_var - np.mean(acov[:, t + 2])) / var_plus
        rho[t + 1] = rho_even
        if rho_even + rho_odd >= 0:
            rho[t + 2] = rho_odd
        t += 2
    max_t = t

    t = 1
    while t <= max_t - 2:
        if rho[t + 1] + rho[t + 2] > rho[t - 1] + rho[t]:
            rho[t + 1] = (rho[t - 1] + rho[t]) / 2.0
            rho[t + 2] = rho[t + 1]
        t += 2

    tau = -1.0 + 2.0 * np.sum(rho[:max_t]) + np.sum(rho[max_t + 1 : max_t + 2])
    if not np.isfinite(tau) or tau <= 0:
        return float(total)
    return float(min(total / tau, total))


def ess(draws: np.ndarray) -> np.ndarray:
    """
    Effective sample size per parameter (split chains).

    Clipped to the total number of draws.
    """
    ary = _split_chains(_as_3d(draws))
    return np.array([_ess(ary[:, :, k]) for k in range(ary.shape[2])])


def summarize_diagnostics(
    draws: np.ndarray, accept_prob: np.ndarray
) -> Tuple[Diagnostics, bool]:
    """
    Diagnostics for a (chains, draws, params) array.

    Returns:
        (Diagnostics, converged) where converged means every R-hat <= 1.05
    """
    diag = Diagnostics(
        rhat=split_rhat(draws), ess=ess(draws), acceptance=np.asarray(accept_prob).mean(axis=1)
    )
    converged = bool(np.all(diag.rhat <= RHAT_WARN))
    if not converged:
        worst = int(np.argmax(diag.rhat))
        logger.warning(
            f"Max split R-hat {diag.rhat[worst]:.3f} (parameter {worst}) exceeds {RHAT_WARN}"
        )
    return diag, converged
