"""
Hierarchical Mixture of Unigrams (hMoU).

Per-document topic proportions come from fixed and random effects through a
softmax with the J-th topic as reference (its effects are fixed at zero):

    xi_{d,j}    = x_d . beta_j + psi_d . gamma_j,       j < J
    theta_{d,j} = exp(xi_{d,j}) / (1 + sum_{l<J} exp(xi_{d,l}))

Priors: beta_j ~ N(0, sigma2_beta I_p), gamma_j ~ N(0, sigma2_gamma_j I_r),
sigma2_gamma_j ~ IG(a, b) (or Gamma(a, b) when configured), phi^j ~ Dir(eta).
The likelihood is the same weighted mixture pseudolikelihood as the MoU.
"""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, logsumexp

from ..errors import (
    ConfigError,
    DataError,
    DimensionMismatch,
    DomainError,
    MissingCovariate,
    NonFinite,
    UnknownLevel,
)
from .corpus import Corpus
from .model import dirichlet_terms, mixture_terms, responsibilities
from .transforms import (
    log_det_grad,
    log_simplex_from_unconstrained,
    simplex_from_unconstrained,
    simplex_grad_to_unconstrained,
)

if TYPE_CHECKING:
    from ..inference.hmc import SampleSet

logger = logging.getLogger(__name__)

VARIANCE_PRIORS = ("inverse_gamma", "gamma")
INTERCEPT = "(Intercept)"
_LOG_2PI = float(np.log(2 * np.pi))


@dataclass(frozen=True)
class HierSpec:
    """Dimensions and prior hyperparameters of the hierarchical model."""

    J: int
    V: int
    p: int
    r: int
    a: float = 0.1
    b: float = 0.1
    sigma2_beta: float = 1000.0
    eta: float = 1.0
    variance_prior: str = "inverse_gamma"
    shared_variance: bool = False

    def __post_init__(self) -> None:
        if self.J < 2:
            raise ConfigError(f"The hierarchical model needs J >= 2, got {self.J}")
        if self.V < 2:
            raise DataError(f"Vocabulary size must be >= 2, got V={self.V}")
        if self.p < 0 or self.r < 0:
            raise ConfigError("p and r must be non-negative")
        if not (self.a > 0 and self.b > 0 and self.sigma2_beta > 0 and self.eta > 0):
            raise ConfigError("a, b, sigma2_beta and eta must be positive")
        if self.variance_prior not in VARIANCE_PRIORS:
            raise ConfigError(
                f"variance_prior must be one of {VARIANCE_PRIORS}, got {self.variance_prior!r}"
            )

    @property
    def n_sigma(self) -> int:
        """Number of sampled random-effect variances."""
        if self.r == 0:
            return 0
        return 1 if self.shared_variance else self.J - 1


@dataclass(frozen=True)
class DesignRow:
    """Fixed-effect row x (intercept + dummies) and random-effect incidence psi."""

    x: np.ndarray
    psi: np.ndarray

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.x)):
            raise DataError("Design row has non-finite fixed effects")
        # all-zero psi marks a level unseen during fitting
        if self.psi.size and not (
            np.all((self.psi == 0) | (self.psi == 1)) and self.psi.sum() <= 1
        ):
            raise DataError("psi must be a one-hot incidence vector")


@dataclass(frozen=True)
class HierParams:
    """Effects of the J-1 non-reference topics."""

    beta: np.ndarray  # (J-1, p)
    gamma: np.ndarray  # (J-1, r)
    sigma2_gamma: np.ndarray  # (J-1,) when r > 0, else empty

    def __post_init__(self) -> None:
        if self.beta.shape[0] != self.gamma.shape[0]:
            raise DimensionMismatch("beta and gamma must have J-1 rows each")
        if np.any(self.sigma2_gamma <= 0):
            raise DomainError("Random-effect variances must be positive")


@dataclass
class DesignEncoder:
    """
    Dummy coding of categorical covariates.

    Fixed covariates get an intercept column plus one column per non-reference
    level (reference = first level in sorted order). The random covariate's
    levels seen at fit time define the r incidence columns.
    """

    fixed: Dict[str, List[str]] = field(default_factory=dict)
    random: Optional[str] = None
    random_levels: List[str] = field(default_factory=list)

    @classmethod
    def fit(
        cls, covariates: Sequence[Mapping[str, str]], fixed: Sequence[str], random: Optional[str]
    ) -> "DesignEncoder":
        """Collect levels from every document's covariates."""
        names = list(fixed) + ([random] if random else [])
        for i, cov in enumerate(covariates):
            for name in names:
                if name not in cov:
                    raise MissingCovariate(f"Document #{i} lacks covariate {name!r}")
        fixed_levels = {name: sorted({cov[name] for cov in covariates}) for name in fixed}
        random_levels = sorted({cov[random] for cov in covariates}) if random else []
        return cls(fixed=fixed_levels, random=random, random_levels=random_levels)

    @property
    def columns(self) -> List[str]:
        cols = [INTERCEPT]
        for name, levels in self.fixed.items():
            cols.extend(f"{name}={level}" for level in levels[1:])
        return cols

    @property
    def p(self) -> int:
        return len(self.columns)

    @property
    def r(self) -> int:
        return len(self.random_levels)

    def encode(self, covariates: Mapping[str, str], allow_unseen_random: bool = False) -> DesignRow:
        """
        Encode one covariate map.

        Args:
            covariates: name -> level
            allow_unseen_random: Unseen random level gives psi = 0 with a warning
                instead of UnknownLevel

        Returns:
            DesignRow
        """
        x = [1.0]
        for name, levels in self.fixed.items():
            if name not in covariates:
                raise MissingCovariate(f"Missing covariate {name!r}")
            level = covariates[name]
            if level not in levels:
                raise UnknownLevel(f"Unknown level {level!r} for covariate {name!r}")
            x.extend(1.0 if level == other else 0.0 for other in levels[1:])

        psi = np.zeros(self.r)
        if self.random:
            if self.random not in covariates:
                raise MissingCovariate(f"Missing covariate {self.random!r}")
            level = covariates[self.random]
            if level in self.random_levels:
                psi[self.random_levels.index(level)] = 1.0
            elif allow_unseen_random:
                logger.warning(
                    f"Level {level!r} of {self.random!r} was not seen in fitting; "
                    "using a zero random effect"
                )
            else:
                raise UnknownLevel(f"Unknown level {level!r} for covariate {self.random!r}")
        return DesignRow(x=np.array(x), psi=psi)

    def decode(self, row: DesignRow) -> Dict[str, str]:
        """Recover the covariate map from a DesignRow."""
        out: Dict[str, str] = {}
        col = 1
        for name, levels in self.fixed.items():
            dummies = row.x[col : col + len(levels) - 1]
            hit = np.flatnonzero(dummies == 1.0)
            out[name] = levels[int(hit[0]) + 1] if hit.size else levels[0]
            col += len(levels) - 1
        if self.random and row.psi.any():
            out[self.random] = self.random_levels[int(np.argmax(row.psi))]
        return out

    def design_matrices(self, corpus: Corpus) -> Tuple[np.ndarray, np.ndarray]:
        """(X of shape (M, p), Psi of shape (M, r)) for every document."""
        rows = [self.encode(doc.covariates) for doc in corpus.docs]
        X = np.vstack([row.x for row in rows])
        Psi = np.vstack([row.psi for row in rows]) if self.r else np.zeros((corpus.M, 0))
        return X, Psi

    def to_dict(self) -> Dict[str, Any]:
        return {"fixed": self.fixed, "random": self.random, "random_levels": self.random_levels}

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "DesignEncoder":
        return cls(
            fixed={k: list(v) for k, v in obj["fixed"].items()},
            random=obj.get("random"),
            random_levels=list(obj.get("random_levels", [])),
        )


def log_softmax_with_reference(xi: np.ndarray) -> np.ndarray:
    """Log topic proportions (..., J) from linear predictors (..., J-1); max-shift stabilized."""
    full = np.concatenate([xi, np.zeros(xi.shape[:-1] + (1,))], axis=-1)
    return full - logsumexp(full, axis=-1, keepdims=True)


def topic_proportions_from_effects(row: DesignRow, params: HierParams) -> np.ndarray:
    """
    theta_d from one design row.

    Args:
        row: Encoded covariates of the document or group
        params: Effects

    Returns:
        Topic proportions of length J
    """
    if row.x.shape[0] != params.beta.shape[1] or row.psi.shape[0] != params.gamma.shape[1]:
        raise DimensionMismatch(
            f"Design row (p={row.x.shape[0]}, r={row.psi.shape[0]}) does not match "
            f"effects (p={params.beta.shape[1]}, r={params.gamma.shape[1]})"
        )
    xi = params.beta @ row.x + params.gamma @ row.psi
    return np.exp(log_softmax_with_reference(xi))


def document_topic_proportions(X: np.ndarray, Psi: np.ndarray, params: HierParams) -> np.ndarray:
    """theta_d for every document, shape (M, J)."""
    xi = X @ params.beta.T + Psi @ params.gamma.T
    return np.exp(log_softmax_with_reference(xi))


def _variance_log_density(log_s2: np.ndarray, spec: HierSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Log-density of sigma2 evaluated through tau = log sigma2, and d/d tau (no Jacobian)."""
    a, b = spec.a, spec.b
    const = a * np.log(b) - gammaln(a)
    if spec.variance_prior == "inverse_gamma":
        return const - (a + 1.0) * log_s2 - b * np.exp(-log_s2), -(a + 1.0) + b * np.exp(-log_s2)
    return const + (a - 1.0) * log_s2 - b * np.exp(log_s2), (a - 1.0) - b * np.exp(log_s2)


def log_prior_hier(params: HierParams, spec: HierSpec) -> float:
    """
    Normal priors on the effects and the variance prior on sigma2_gamma.

    In shared-variance mode every row carries the same sigma2 and its prior
    counts once.
    """
    beta, gamma, s2 = params.beta, params.gamma, np.asarray(params.sigma2_gamma, dtype=np.float64)
    if np.any(s2 <= 0):
        raise DomainError("Random-effect variances must be positive")
    if beta.shape != (spec.J - 1, spec.p) or gamma.shape != (spec.J - 1, spec.r):
        raise DimensionMismatch("Effect matrices do not match the spec")

    value = -0.5 * beta.size * (_LOG_2PI + np.log(spec.sigma2_beta))
    value -= 0.5 * float(np.sum(beta**2)) / spec.sigma2_beta
    if spec.r:
        if s2.shape != (spec.J - 1,):
            raise DimensionMismatch(f"Expected {spec.J - 1} random-effect variances")
        value += float(
            np.sum(-0.5 * spec.r * (_LOG_2PI + np.log(s2)) - 0.5 * np.sum(gamma**2, axis=1) / s2)
        )
        tau = np.log(s2[:1] if spec.shared_variance else s2)
        value += float(np.sum(_variance_log_density(tau, spec)[0]))
    return float(value)


@dataclass(frozen=True)
class HierLayout:
    """Packing of (beta, gamma, log sigma2, phi_free) into the sampler's flat vector."""

    spec: HierSpec

    @property
    def dim(self) -> int:
        s = self.spec
        return (s.J - 1) * (s.p + s.r) + s.n_sigma + s.J * (s.V - 1)

    def _slices(self) -> Tuple[slice, slice, slice, slice]:
        s = self.spec
        nb, ng = (s.J - 1) * s.p, (s.J - 1) * s.r
        return (
            slice(0, nb),
            slice(nb, nb + ng),
            slice(nb + ng, nb + ng + s.n_sigma),
            slice(nb + ng + s.n_sigma, self.dim),
        )

    def unpack(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(beta, gamma, tau, phi_free) with leading axes of u preserved."""
        u = np.asarray(u, dtype=np.float64)
        if u.shape[-1] != self.dim:
            raise DimensionMismatch(f"Expected {self.dim} unconstrained values, got {u.shape[-1]}")
        s, lead = self.spec, u.shape[:-1]
        sb, sg, ss, sp = self._slices()
        return (
            u[..., sb].reshape(lead + (s.J - 1, s.p)),
            u[..., sg].reshape(lead + (s.J - 1, s.r)),
            u[..., ss],
            u[..., sp].reshape(lead + (s.J, s.V - 1)),
        )

    def pack(
        self, beta: np.ndarray, gamma: np.ndarray, tau: np.ndarray, phi_free: np.ndarray
    ) -> np.ndarray:
        return np.concatenate([beta.ravel(), gamma.ravel(), np.ravel(tau), phi_free.ravel()])

    def names(self) -> List[str]:
        s = self.spec
        names = [f"beta[{j},{k}]" for j in range(s.J - 1) for k in range(s.p)]
        names += [f"gamma[{j},{k}]" for j in range(s.J - 1) for k in range(s.r)]
        names += [f"log_sigma2_gamma[{j}]" for j in range(s.n_sigma)]
        names += [f"phi_free[{j},{v}]" for j in range(s.J) for v in range(s.V - 1)]
        return names

    def row_variances(self, tau: np.ndarray) -> np.ndarray:
        """sigma2 per non-reference topic from the sampled log-variances."""
        if self.spec.r == 0:
            return np.zeros(tau.shape[:-1] + (0,))
        s2 = np.exp(tau)
        if self.spec.shared_variance:
            s2 = np.repeat(s2, self.spec.J - 1, axis=-1)
        return s2

    def constrain(self, u: np.ndarray) -> Tuple[HierParams, np.ndarray]:
        """Single draw -> (HierParams, phi)."""
        beta, gamma, tau, phi_free = self.unpack(u)
        phi, _ = simplex_from_unconstrained(phi_free)
        return HierParams(beta=beta, gamma=gamma, sigma2_gamma=self.row_variances(tau)), phi


class HierTarget:
    """Picklable (value, grad) callable for the hMoU posterior."""

    def __init__(self, corpus: Corpus, encoder: DesignEncoder, spec: HierSpec):
        if corpus.vocab.V != spec.V:
            raise DimensionMismatch(f"Corpus has V={corpus.vocab.V} but spec has V={spec.V}")
        if encoder.p != spec.p or encoder.r != spec.r:
            raise DimensionMismatch("Design encoder and spec disagree on p or r")
        self.spec = spec
        self.layout = HierLayout(spec)
        self.X, self.Psi = encoder.design_matrices(corpus)
        self.counts = corpus.count_matrix()
        self.weights = corpus.weights

    @property
    def dim(self) -> int:
        return self.layout.dim

    def __call__(self, u: np.ndarray) -> Tuple[float, np.ndarray]:
        spec = self.spec
        if not np.all(np.isfinite(u)):
            raise NonFinite("Unconstrained parameters contain NaN or Inf")
        beta, gamma, tau, phi_free = self.layout.unpack(u)

        xi = self.X @ beta.T + self.Psi @ gamma.T
        log_theta = log_softmax_with_reference(xi)
        log_phi, z_phi, ld_phi = log_simplex_from_unconstrained(phi_free)

        data, g_lt, g_lp = mixture_terms(self.counts, self.weights, log_theta, log_phi)
        theta = np.exp(log_theta)
        g_xi = g_lt[:, :-1] - theta[:, :-1] * g_lt.sum(axis=1, keepdims=True)

        # fixed effects
        value = data - 0.5 * beta.size * (_LOG_2PI + np.log(spec.sigma2_beta))
        value -= 0.5 * float(np.sum(beta**2)) / spec.sigma2_beta
        g_beta = g_xi.T @ self.X - beta / spec.sigma2_beta

        # random effects, variances on the log scale
        g_gamma = g_xi.T @ self.Psi
        g_tau = np.zeros_like(tau)
        if spec.r:
            tau_rows = np.repeat(tau, spec.J - 1) if spec.shared_variance else tau
            inv_s2 = np.exp(-tau_rows)
            sq = np.sum(gamma**2, axis=1)
            value += float(np.sum(-0.5 * spec.r * (_LOG_2PI + tau_rows) - 0.5 * sq * inv_s2))
            g_gamma -= gamma * inv_s2[:, None]
            g_rows = -0.5 * spec.r + 0.5 * sq * inv_s2
            g_tau = np.array([g_rows.sum()]) if spec.shared_variance else g_rows
            v_prior, g_prior = _variance_log_density(tau, spec)
            value += float(np.sum(v_prior)) + float(np.sum(tau))
            g_tau = g_tau + g_prior + 1.0

        prior_phi, pg_phi = dirichlet_terms(log_phi, spec.eta)
        value += prior_phi + float(np.sum(ld_phi))
        g_phi = simplex_grad_to_unconstrained(g_lp + pg_phi, z_phi) + log_det_grad(z_phi)
        return float(value), self.layout.pack(g_beta, g_gamma, g_tau, g_phi)


def log_posterior_and_grad_hier(
    u: np.ndarray, corpus: Corpus, spec: HierSpec, encoder: DesignEncoder
) -> Tuple[float, np.ndarray]:
    """
    Log posterior of the hMoU on the unconstrained space and its gradient.

    Raises MissingCovariate / UnknownLevel when a document cannot be encoded.
    """
    return HierTarget(corpus, encoder, spec)(u)


def document_responsibilities(
    corpus: Corpus, theta_docs: np.ndarray, phi: np.ndarray
) -> np.ndarray:
    """Responsibilities with per-document proportions, via the MoU code path."""
    return np.vstack(
        [responsibilities(doc, theta_d, phi) for doc, theta_d in zip(corpus.docs, theta_docs)]
    )


@dataclass(frozen=True)
class GroupSummary:
    """Posterior summary of theta for one covariate combination."""

    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


def group_topic_proportions(
    covariate_combo: Mapping[str, str],
    samples: "SampleSet",
    encoder: DesignEncoder,
    layout: HierLayout,
    permutations: Optional[np.ndarray] = None,
) -> GroupSummary:
    """
    Posterior of theta for a covariate combination.

    Args:
        covariate_combo: name -> level for every declared covariate
        samples: Retained draws of the hierarchical model
        encoder: Encoder fitted on the training corpus
        layout: Layout the draws were produced with
        permutations: Optional (n_draws, J) topic relabeling per flattened draw

    Returns:
        Per-topic mean and 2.5%/97.5% percentiles
    """
    row = encoder.encode(covariate_combo, allow_unseen_random=True)
    beta, gamma, _, _ = layout.unpack(samples.flat_draws())
    xi = beta @ row.x + gamma @ row.psi
    theta = np.exp(log_softmax_with_reference(xi))
    if permutations is not None:
        theta = np.take_along_axis(theta, permutations, axis=1)
    return GroupSummary(
        mean=theta.mean(axis=0),
        lo=np.percentile(theta, 2.5, axis=0),
        hi=np.percentile(theta, 97.5, axis=0),
    )
