"""
Informative sampling: systematic probability-proportional-to-size selection
where documents of one topic are boosted by a factor c.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from ..core.corpus import BowDocument, Corpus, Vocabulary, scale_weights
from ..errors import ConfigError, InfeasibleDesign
from .population import LabeledPopulation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplingDesign:
    """Boost factor c for target_topic's documents and fixed sample size m."""

    target_topic: int = 0
    boost: float = 5.0
    sample_size: int = 100

    def __post_init__(self) -> None:
        if not self.boost > 0:
            raise ConfigError(f"boost must be positive, got {self.boost}")
        if self.sample_size < 1:
            raise ConfigError(f"sample_size must be >= 1, got {self.sample_size}")
        if self.target_topic < 0:
            raise ConfigError(f"target_topic must be a topic index, got {self.target_topic}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mechanism": "systematic PPS, size c for the target topic and 1 otherwise",
            "target_topic": self.target_topic,
            "boost": self.boost,
            "sample_size": self.sample_size,
        }


@dataclass
class InformativeSample:
    """Selected documents as a weighted corpus, with their inclusion probabilities."""

    corpus: Corpus
    inclusion: np.ndarray
    indices: np.ndarray
    labels: np.ndarray


def population_vocabulary(V: int) -> Vocabulary:
    return Vocabulary(tokens=tuple(f"w{v + 1}" for v in range(V)))


def inclusion_probabilities(pop: LabeledPopulation, design: SamplingDesign) -> np.ndarray:
    """pi_d = m s_d / sum(s) with s_d = c for the target topic and 1 otherwise."""
    if design.target_topic >= pop.config.J:
        raise ConfigError(f"target_topic {design.target_topic} >= J={pop.config.J}")
    if design.sample_size > pop.size:
        raise ConfigError(f"sample_size {design.sample_size} exceeds the population {pop.size}")
    size = np.where(pop.labels == design.target_topic, design.boost, 1.0)
    pi = design.sample_size * size / size.sum()
    if np.any(pi > 1.0):
        raise InfeasibleDesign(
            f"Inclusion probability {pi.max():.3f} > 1; lower the boost c or the sample size m"
        )
    return pi


def systematic_pps(pi: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """Fixed-size systematic PPS on a random ordering; sorted population indices."""
    order = rng.permutation(pi.shape[0])
    cum = np.cumsum(pi[order])
    points = rng.uniform() + np.arange(m)
    pos = np.minimum(np.searchsorted(cum, points, side="right"), pi.shape[0] - 1)
    return np.sort(order[pos])


def draw_informative_sample(
    pop: LabeledPopulation, design: SamplingDesign, rng: np.random.Generator
) -> InformativeSample:
    """
    Draw one informative sample and attach scaled design weights.

    Args:
        pop: Labeled population
        design: Sampling design
        rng: Random stream of this sample

    Returns:
        InformativeSample whose corpus weights sum to m
    """
    pi = inclusion_probabilities(pop, design)
    idx = systematic_pps(pi, design.sample_size, rng)
    weights = scale_weights(1.0 / pi[idx])

    docs = []
    for d, w in zip(idx, weights):
        row = pop.counts[d]
        nz = np.flatnonzero(row)
        docs.append(
            BowDocument(
                id=f"d{int(d):06d}",
                counts={int(v): int(row[v]) for v in nz},
                scaled_weight=float(w),
            )
        )
    corpus = Corpus(vocab=population_vocabulary(pop.config.V), docs=docs)
    return InformativeSample(corpus=corpus, inclusion=pi[idx], indices=idx, labels=pop.labels[idx])


def horvitz_thompson_share(sample: InformativeSample, topic: int, M_pop: int) -> float:
    """Design-unbiased population share of a topic: sum over the sample of 1[z = topic] / pi."""
    return float(np.sum((sample.labels == topic) / sample.inclusion) / M_pop)
