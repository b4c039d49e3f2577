"""
Label-switching repair.

Every draw's topics are matched to a reference by exact bipartite assignment
on the L1 distance between phi rows. Permutations follow one convention
throughout the package: relabeled topic k is original topic perm[k], so

    theta_relabeled = np.take_along_axis(theta, perm, axis=-1)
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..core.model import MouLayout
from ..errors import DimensionMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TopicDraws:
    """Constrained draws: theta (n, J), phi (n, J, V) and the log posterior of each draw."""

    theta: np.ndarray
    phi: np.ndarray
    log_post: np.ndarray

    def __post_init__(self) -> None:
        n, J = self.theta.shape
        if self.phi.shape[:2] != (n, J) or self.log_post.shape != (n,):
            raise DimensionMismatch(
                f"Inconsistent draw shapes: theta {self.theta.shape}, phi {self.phi.shape}, "
                f"log_post {self.log_post.shape}"
            )

    @property
    def n(self) -> int:
        return self.theta.shape[0]

    @property
    def J(self) -> int:
        return self.theta.shape[1]

    def permute(self, perm: np.ndarray) -> "TopicDraws":
        """Apply one permutation per draw, shape (n, J)."""
        return TopicDraws(
            theta=np.take_along_axis(self.theta, perm, axis=1),
            phi=np.take_along_axis(self.phi, perm[:, :, None], axis=1),
            log_post=self.log_post,
        )


def mou_topic_draws(samples, layout: MouLayout) -> TopicDraws:
    """Constrained MoU draws from a SampleSet, chain-major."""
    theta, phi = layout.constrain(samples.flat_draws())
    return TopicDraws(theta=theta, phi=phi, log_post=samples.log_post.reshape(-1))


def _match(phi_ref: np.ndarray, phi: np.ndarray) -> np.ndarray:
    cost = np.abs(phi_ref[:, None, :] - phi[None, :, :]).sum(axis=2)
    _, cols = linear_sum_assignment(cost)
    return cols


def _canonical_order(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Topic order by decreasing theta, then by phi rows; independent of the input labels."""
    keys = [phi[:, v] for v in reversed(range(phi.shape[1]))]
    return np.lexsort(keys + [-theta])


def relabel(
    draws: TopicDraws,
    reference: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> Tuple[TopicDraws, np.ndarray]:
    """
    Align every draw's topics to a reference.

    Args:
        draws: Constrained draws
        reference: (theta_ref, phi_ref) to align to. When None the draw with
            the highest log posterior is used, with its topics put in a
            canonical order so the result does not depend on how topics were
            labeled in the input.

    Returns:
        (relabeled draws, permutations of shape (n, J))
    """
    if reference is None:
        best = int(np.argmax(draws.log_post))
        order = _canonical_order(draws.theta[best], draws.phi[best])
        phi_ref = draws.phi[best][order]
    else:
        _, phi_ref = reference
        phi_ref = np.asarray(phi_ref, dtype=np.float64)
        if phi_ref.shape != draws.phi.shape[1:]:
            raise DimensionMismatch(
                f"Reference phi {phi_ref.shape} does not match draws {draws.phi.shape[1:]}"
            )

    perms = np.empty((draws.n, draws.J), dtype=np.int64)
    for i in range(draws.n):
        perms[i] = _match(phi_ref, draws.phi[i])

    moved = int(np.sum(np.any(perms != np.arange(draws.J), axis=1)))
    if moved:
        logger.info(f"Relabeled {moved} of {draws.n} draws")
    return draws.permute(perms), perms


def l1_to_reference(draws: TopicDraws, phi_ref: np.ndarray) -> np.ndarray:
    """Total L1 distance between each draw's phi rows and the reference rows."""
    return np.abs(draws.phi - phi_ref[None]).sum(axis=(1, 2))
