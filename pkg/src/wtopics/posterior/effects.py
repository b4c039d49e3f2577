"""
Summaries of hierarchical-model effects after relabeling.

Relabeling can move the reference topic. Effects are re-expressed against
the relabeled last topic: for the zero-padded effect rows b (J rows),
b'_j = b_perm[j] - b_perm[J-1]. Per-topic variances are only defined for
draws whose relabeling keeps the reference topic in place, so their
summaries use that subset.
"""

import logging
from typing import Any, Dict, List

import numpy as np

from ..inference.fit import HierFit
from .summary import interval_rows

logger = logging.getLogger(__name__)


def _rereference(effects: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """(n, J-1, k) effects -> same shape, expressed against the relabeled last topic."""
    n, _, k = effects.shape
    full = np.concatenate([effects, np.zeros((n, 1, k))], axis=1)
    full = np.take_along_axis(full, perms[:, :, None], axis=1)
    return full[:, :-1] - full[:, -1:]


def _rows(prefix: str, columns: List[str], draws: np.ndarray) -> List[Dict[str, Any]]:
    n, rows, k = draws.shape
    names = [f"{prefix}[topic {j + 1}, {columns[c]}]" for j in range(rows) for c in range(k)]
    return interval_rows(names, draws.reshape(n, rows * k))


def summarize_effects(fit: HierFit) -> Dict[str, Any]:
    """
    Posterior means and 95% intervals of beta, gamma and sigma2_gamma.

    Returns:
        JSON-ready dict with the reference topic, encoder columns and one
        record per scalar
    """
    spec, encoder, perms = fit.spec, fit.encoder, fit.permutations
    beta, gamma, tau, _ = fit.layout.unpack(fit.samples.flat_draws())
    gamma_columns = [f"{encoder.random}={level}" for level in encoder.random_levels]

    out: Dict[str, Any] = {
        "reference_topic": spec.J,
        "fixed_columns": encoder.columns,
        "random_columns": gamma_columns,
        "beta": _rows("beta", encoder.columns, _rereference(beta, perms)),
        "gamma": _rows("gamma", gamma_columns, _rereference(gamma, perms)) if spec.r else [],
        "sigma2_gamma": [],
    }
    if spec.r == 0:
        return out

    if spec.shared_variance:
        out["sigma2_gamma"] = interval_rows(["sigma2_gamma[shared]"], np.exp(tau))
        return out

    s2 = np.concatenate([np.exp(tau), np.full((tau.shape[0], 1), np.nan)], axis=1)
    s2 = np.take_along_axis(s2, perms, axis=1)
    keep = perms[:, -1] == spec.J - 1
    if not keep.all():
        logger.warning(
            f"{int((~keep).sum())} draws moved the reference topic; "
            "variance summaries use the remaining draws"
        )
    names = [f"sigma2_gamma[topic {j + 1}]" for j in range(spec.J - 1)]
    out["sigma2_gamma"] = interval_rows(names, s2[keep, :-1])
    out["sigma2_draws_used"] = int(keep.sum())
    return out
