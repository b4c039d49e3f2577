"""
Synthetic labeled populations drawn from the MoU generative process.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..core.model import check_simplex
from ..errors import ConfigError, DomainError
from ..utils.rng import make_rng

logger = logging.getLogger(__name__)

POPULATION_STREAM = 0

DEFAULT_THETA = (0.5, 0.3, 0.2)
PEAKED_ROW = (0.5, 0.2, 0.1, 0.1, 0.05, 0.05)


def default_phi(J: int, V: int) -> Tuple[Tuple[float, ...], ...]:
    """Rows are cyclic shifts of a peaked distribution over six words."""
    if V != len(PEAKED_ROW):
        raise ConfigError(
            f"Default phi is defined for V={len(PEAKED_ROW)}; give phi_true for V={V}"
        )
    base = np.array(PEAKED_ROW)
    return tuple(tuple(float(x) for x in np.roll(base, j)) for j in range(J))


@dataclass(frozen=True)
class PopulationConfig:
    """Population size, mean document length and the true MoU parameters."""

    M_pop: int = 10_000
    lam: float = 30.0
    V: int = 6
    J: int = 3
    theta_true: Optional[Tuple[float, ...]] = None
    phi_true: Optional[Tuple[Tuple[float, ...], ...]] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.M_pop < 1 or self.J < 1 or self.V < 2:
            raise ConfigError("M_pop and J must be >= 1 and V >= 2")
        if not self.lam > 0:
            raise ConfigError(f"lam must be positive, got {self.lam}")
        if self.theta_true is None:
            if self.J != len(DEFAULT_THETA):
                raise ConfigError(
                    f"Default theta is defined for J=3; give theta_true for J={self.J}"
                )
            object.__setattr__(self, "theta_true", DEFAULT_THETA)
        if self.phi_true is None:
            object.__setattr__(self, "phi_true", default_phi(self.J, self.V))
        object.__setattr__(self, "theta_true", tuple(float(t) for t in self.theta_true))
        object.__setattr__(
            self, "phi_true", tuple(tuple(float(p) for p in row) for row in self.phi_true)
        )
        try:
            theta, phi = check_simplex(self.theta_true, "theta_true"), check_simplex(
                self.phi_true, "phi_true"
            )
        except DomainError as e:
            raise ConfigError(str(e)) from e
        if theta.shape != (self.J,) or phi.shape != (self.J, self.V):
            raise ConfigError(
                f"theta_true must have J={self.J} entries and phi_true shape ({self.J}, {self.V})"
            )

    @property
    def theta(self) -> np.ndarray:
        return np.array(self.theta_true)

    @property
    def phi(self) -> np.ndarray:
        return np.array(self.phi_true)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "M_pop": self.M_pop,
            "lam": self.lam,
            "V": self.V,
            "J": self.J,
            "theta_true": list(self.theta_true),
            "phi_true": [list(row) for row in self.phi_true],
            "seed": self.seed,
        }


@dataclass
class LabeledPopulation:
    """Population documents as an (M_pop, V) count matrix with true topics and lengths."""

    config: PopulationConfig
    counts: np.ndarray
    labels: np.ndarray
    lengths: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.lengths = self.counts.sum(axis=1)
        if np.any(self.lengths < 1):
            raise DomainError("Every population document needs at least one word")

    @property
    def size(self) -> int:
        return self.counts.shape[0]

    def topic_shares(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.config.J) / self.size


def _truncated_poisson(lam: float, size: int, rng: np.random.Generator) -> np.ndarray:
    n = rng.poisson(lam, size=size)
    zero = np.flatnonzero(n == 0)
    while zero.size:
        n[zero] = rng.poisson(lam, size=zero.size)
        zero = zero[n[zero] == 0]
    return n


def generate_population(config: PopulationConfig) -> LabeledPopulation:
    """
    Draw a population: z ~ Mult(theta), N ~ Poisson(lam) truncated to >= 1,
    counts ~ Multinomial(N, phi_z).

    Args:
        config: Population settings

    Returns:
        LabeledPopulation
    """
    rng = make_rng(config.seed, POPULATION_STREAM)
    M, J = config.M_pop, config.J
    labels = rng.choice(J, size=M, p=config.theta)
    lengths = _truncated_poisson(config.lam, M, rng)

    counts = np.zeros((M, config.V), dtype=np.int64)
    phi = config.phi
    for j in range(J):
        idx = np.flatnonzero(labels == j)
        if idx.size:
            counts[idx] = rng.multinomial(lengths[idx], phi[j])

    logger.info(
        f"Population: {M} documents, mean length {lengths.mean():.2f}, "
        f"topic shares {np.round(np.bincount(labels, minlength=J) / M, 4).tolist()}"
    )
    return LabeledPopulation(config=config, counts=counts, labels=labels)
