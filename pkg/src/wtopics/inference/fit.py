"""
Model fitting pipelines: sample with HMC, constrain the draws and repair label switching.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..core.corpus import Corpus
from ..core.hier import (
    DesignEncoder,
    HierLayout,
    HierSpec,
    HierTarget,
    log_softmax_with_reference,
)
from ..core.model import MouLayout, MouSpec, MouTarget
from ..core.transforms import simplex_from_unconstrained
from ..posterior.relabel import TopicDraws, mou_topic_draws, relabel
from .hmc import HmcConfig, SampleSet, hmc_sample

logger = logging.getLogger(__name__)

DRAW_CHUNK = 64


@dataclass
class MouFit:
    """Fitted MoU: raw draws plus relabeled constrained draws."""

    spec: MouSpec
    layout: MouLayout
    samples: SampleSet
    draws: TopicDraws
    permutations: np.ndarray


@dataclass
class HierFit:
    """
    Fitted hMoU.

    draws.theta holds the weight-averaged document proportions of each draw,
    i.e. the population topic shares implied by the effects.
    """

    spec: HierSpec
    layout: HierLayout
    encoder: DesignEncoder
    samples: SampleSet
    draws: TopicDraws
    permutations: np.ndarray
    X: np.ndarray
    Psi: np.ndarray

    def theta_docs_draw(self, i: int) -> np.ndarray:
        """Relabeled per-document proportions (M, J) of flattened draw i."""
        beta, gamma, _, _ = self.layout.unpack(self.samples.flat_draws()[i])
        theta = np.exp(log_softmax_with_reference(self.X @ beta.T + self.Psi @ gamma.T))
        return theta[:, self.permutations[i]]

    def theta_docs_mean(self) -> np.ndarray:
        """Posterior mean of the relabeled per-document proportions, (M, J)."""
        total = np.zeros((self.X.shape[0], self.spec.J))
        for i in range(self.draws.n):
            total += self.theta_docs_draw(i)
        return total / self.draws.n


def fit_mou(
    corpus: Corpus,
    spec: MouSpec,
    config: HmcConfig,
    num_workers: int = 1,
    progress: bool = True,
    reference: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> MouFit:
    """
    Fit the (weighted) MoU.

    Args:
        corpus: Weighted corpus (use Corpus.unweighted() for the baseline model)
        spec: Model specification
        config: Sampler settings
        num_workers: Worker processes for the chains
        progress: Show progress bars
        reference: Optional (theta, phi) to align topics to

    Returns:
        MouFit
    """
    target = MouTarget(corpus, spec)
    samples = hmc_sample(
        target,
        config,
        dim=target.dim,
        param_names=target.layout.names(),
        num_workers=num_workers,
        progress=progress,
    )
    draws, perms = relabel(mou_topic_draws(samples, target.layout), reference)
    return MouFit(spec=spec, layout=target.layout, samples=samples, draws=draws, permutations=perms)


def _hier_topic_draws(
    samples: SampleSet, layout: HierLayout, X: np.ndarray, Psi: np.ndarray, weights: np.ndarray
) -> TopicDraws:
    flat = samples.flat_draws()
    beta, gamma, _, phi_free = layout.unpack(flat)
    phi, _ = simplex_from_unconstrained(phi_free)
    w = weights / weights.sum()

    theta = np.empty((flat.shape[0], layout.spec.J))
    for start in range(0, flat.shape[0], DRAW_CHUNK):
        stop = min(start + DRAW_CHUNK, flat.shape[0])
        xi = np.einsum("mp,njp->nmj", X, beta[start:stop]) + np.einsum(
            "mr,njr->nmj", Psi, gamma[start:stop]
        )
        theta[start:stop] = np.einsum("m,nmj->nj", w, np.exp(log_softmax_with_reference(xi)))
    return TopicDraws(theta=theta, phi=phi, log_post=samples.log_post.reshape(-1))


def fit_hier(
    corpus: Corpus,
    encoder: DesignEncoder,
    spec: HierSpec,
    config: HmcConfig,
    num_workers: int = 1,
    progress: bool = True,
) -> HierFit:
    """
    Fit the hierarchical MoU.

    Args:
        corpus: Weighted corpus whose documents carry every declared covariate
        encoder: Design encoder fitted on the corpus
        spec: Model specification (p, r must match the encoder)
        config: Sampler settings
        num_workers: Worker processes for the chains
        progress: Show progress bars

    Returns:
        HierFit
    """
    target = HierTarget(corpus, encoder, spec)
    samples = hmc_sample(
        target,
        config,
        dim=target.dim,
        param_names=target.layout.names(),
        num_workers=num_workers,
        progress=progress,
    )
    draws = _hier_topic_draws(samples, target.layout, target.X, target.Psi, target.weights)
    draws, perms = relabel(draws)
    return HierFit(
        spec=spec,
        layout=target.layout,
        encoder=encoder,
        samples=samples,
        draws=draws,
        permutations=perms,
        X=target.X,
        Psi=target.Psi,
    )
