"""
Mixture of Unigrams (MoU) under a survey-weighted pseudolikelihood.

Each document d draws one topic z_d ~ Mult(theta) and then all of its words
from phi^{z_d}. The topic indicator is marginalized analytically, and the
marginal document probability is raised to the document's scaled survey
weight omega_d:

    log L_d = omega_d * logsumexp_j( log theta_j + sum_v n_dv log phi_jv )

Priors: theta ~ Dir(alpha 1_J), phi^j ~ Dir(eta 1_V).

The sampler works on an unconstrained vector (centered stick-breaking of theta
and of each phi row); MouTarget returns the log posterior on that space plus
its exact gradient.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.special import gammaln, logsumexp, xlogy

from ..errors import DataError, DegenerateDocument, DimensionMismatch, DomainError
from .corpus import BowDocument, Corpus
from .transforms import (
    log_det_grad,
    log_simplex_from_unconstrained,
    simplex_from_unconstrained,
    simplex_grad_to_unconstrained,
)

logger = logging.getLogger(__name__)

SIMPLEX_TOL = 1e-10
DEFAULT_MAX_TOPICS = 64


@dataclass(frozen=True)
class MouSpec:
    """Model dimensions and Dirichlet concentrations."""

    J: int
    V: int
    alpha: float = 1.0
    eta: float = 1.0
    max_topics: int = DEFAULT_MAX_TOPICS

    def __post_init__(self) -> None:
        if self.J < 1:
            raise DataError(f"J must be >= 1, got {self.J}")
        if self.J > self.max_topics:
            raise DataError(f"J={self.J} exceeds the configured maximum {self.max_topics}")
        if self.V < 2:
            raise DataError(f"Vocabulary size must be >= 2, got V={self.V}")
        if not (self.alpha > 0 and self.eta > 0):
            raise DataError(f"alpha and eta must be positive (alpha={self.alpha}, eta={self.eta})")


def check_simplex(x: np.ndarray, name: str, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Validate that x is a simplex along its last axis."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise DomainError(f"{name} has negative or non-finite entries")
    if np.any(np.abs(x.sum(axis=-1) - 1.0) > tol):
        raise DomainError(f"{name} does not sum to 1 along its last axis")
    return x


def _check_dims(doc: BowDocument, theta: np.ndarray, phi: np.ndarray) -> None:
    if phi.ndim != 2 or phi.shape[0] != theta.shape[-1]:
        raise DimensionMismatch(
            f"theta has {theta.shape[-1]} topics but phi has shape {phi.shape}"
        )
    if doc.counts and max(doc.counts) >= phi.shape[1]:
        raise DimensionMismatch(
            f"Document {doc.id!r} has a word index >= V={phi.shape[1]}"
        )


def _log_joint(doc: BowDocument, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """log theta_j + sum_v n_dv log phi_jv for each topic j."""
    idx, n = doc.indices(), doc.values()
    with np.errstate(divide="ignore"):
        return np.log(theta) + np.log(phi[:, idx]) @ n


def log_doc_pseudolikelihood(doc: BowDocument, theta: np.ndarray, phi: np.ndarray) -> float:
    """
    Weighted marginal log-likelihood of one document.

    The multinomial coefficient is omitted (constant in the parameters).

    Args:
        doc: Bag-of-words document with scaled weight omega_d
        theta: Topic proportions (J,)
        phi: Topic-word probabilities (J, V)

    Returns:
        omega_d * log p(w_d | theta, phi); -inf when no topic can produce the document
    """
    theta, phi = np.asarray(theta, dtype=np.float64), np.asarray(phi, dtype=np.float64)
    _check_dims(doc, theta, phi)
    if doc.scaled_weight == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        ll = logsumexp(_log_joint(doc, theta, phi))
    return float(doc.scaled_weight * ll)


def responsibilities(doc: BowDocument, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Posterior over the document's topic, r_j proportional to theta_j prod_v phi_jv^n_dv."""
    theta, phi = np.asarray(theta, dtype=np.float64), np.asarray(phi, dtype=np.float64)
    _check_dims(doc, theta, phi)
    a = _log_joint(doc, theta, phi)
    if not np.any(np.isfinite(a)):
        raise DegenerateDocument(f"Document {doc.id!r} has zero probability under every topic")
    r = np.exp(a - a.max())
    return r / r.sum()


def responsibilities_matrix(
    counts: sparse.csr_matrix, log_theta: np.ndarray, log_phi: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Responsibilities for all documents at once.

    Args:
        counts: Sparse (M, V) count matrix
        log_theta: (J,) shared or (M, J) per-document log topic proportions
        log_phi: (J, V) log topic-word probabilities

    Returns:
        (R of shape (M, J), per-document marginal log-likelihood of shape (M,))
    """
    # sparse product only touches observed words, so log(0) at unobserved words is harmless
    a = np.asarray(counts @ log_phi.T) + log_theta
    with np.errstate(invalid="ignore"):
        ll = logsumexp(a, axis=1)
        r = np.exp(a - ll[:, None])
    return r, ll


def log_dirichlet(x: np.ndarray, concentration: float) -> np.ndarray:
    """Symmetric Dirichlet log-density along the last axis, normalizing constant included."""
    x = np.asarray(x, dtype=np.float64)
    K = x.shape[-1]
    if concentration < 1 and np.any(x == 0):
        raise DomainError(
            f"Dirichlet density is unbounded at a zero coordinate when concentration "
            f"{concentration} < 1"
        )
    norm = gammaln(K * concentration) - K * gammaln(concentration)
    return norm + np.sum(xlogy(concentration - 1.0, x), axis=-1)


def log_prior(spec: MouSpec, theta: np.ndarray, phi: np.ndarray) -> float:
    """log Dir(theta | alpha) + sum_j log Dir(phi^j | eta)."""
    theta = check_simplex(theta, "theta")
    phi = check_simplex(phi, "phi")
    if theta.shape != (spec.J,) or phi.shape != (spec.J, spec.V):
        raise DimensionMismatch(
            f"Expected theta ({spec.J},) and phi ({spec.J}, {spec.V}); "
            f"got {theta.shape} and {phi.shape}"
        )
    return float(log_dirichlet(theta, spec.alpha) + np.sum(log_dirichlet(phi, spec.eta)))


def log_multinomial_coefficient(counts: np.ndarray) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    return float(gammaln(counts.sum() + 1) - np.sum(gammaln(counts + 1)))


@dataclass(frozen=True)
class UnconstrainedParams:
    """Unconstrained image of (theta, phi): stick-breaking coordinates."""

    theta_free: np.ndarray  # (J-1,)
    phi_free: np.ndarray  # (J, V-1)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.theta_free.ravel(), self.phi_free.ravel()])


@dataclass(frozen=True)
class MouLayout:
    """Packing of MoU parameters into the flat vector the sampler moves."""

    J: int
    V: int

    @property
    def dim(self) -> int:
        return (self.J - 1) + self.J * (self.V - 1)

    def unpack(self, u: np.ndarray) -> UnconstrainedParams:
        u = np.asarray(u, dtype=np.float64)
        if u.shape[-1] != self.dim:
            raise DimensionMismatch(f"Expected {self.dim} unconstrained values, got {u.shape[-1]}")
        k = self.J - 1
        lead = u.shape[:-1]
        return UnconstrainedParams(
            theta_free=u[..., :k], phi_free=u[..., k:].reshape(lead + (self.J, self.V - 1))
        )

    def pack(self, theta_free: np.ndarray, phi_free: np.ndarray) -> np.ndarray:
        return UnconstrainedParams(np.asarray(theta_free), np.asarray(phi_free)).flat()

    def names(self) -> List[str]:
        names = [f"theta_free[{i}]" for i in range(self.J - 1)]
        names += [f"phi_free[{j},{v}]" for j in range(self.J) for v in range(self.V - 1)]
        return names

    def constrain(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Map unconstrained draws (..., dim) to (theta (..., J), phi (..., J, V)).
        """
        p = self.unpack(u)
        theta, _ = simplex_from_unconstrained(p.theta_free)
        phi, _ = simplex_from_unconstrained(p.phi_free)
        return theta, phi


def dirichlet_terms(
    log_x: np.ndarray, concentration: float
) -> Tuple[float, np.ndarray]:
    """Dirichlet log-density from log coordinates, and its gradient w.r.t. log x."""
    K = log_x.shape[-1]
    norm = gammaln(K * concentration) - K * gammaln(concentration)
    n_rows = int(np.prod(log_x.shape[:-1]))
    value = n_rows * norm + (concentration - 1.0) * float(np.sum(log_x))
    return value, np.full_like(log_x, concentration - 1.0)


def mixture_terms(
    counts: sparse.csr_matrix,
    weights: np.ndarray,
    log_theta: np.ndarray,
    log_phi: np.ndarray,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Weighted pseudolikelihood and its gradients w.r.t. log theta and log phi.

    Shared by the MoU and hierarchical targets; log_theta is (J,) for the MoU
    and (M, J) when every document has its own proportions.

    Returns:
        (value, d/d log_theta, d/d log_phi)
    """
    r, ll = responsibilities_matrix(counts, log_theta, log_phi)
    value = float(np.sum(np.where(weights > 0, weights * ll, 0.0)))
    wr = weights[:, None] * r
    grad_log_theta = wr.sum(axis=0) if log_theta.ndim == 1 else wr
    grad_log_phi = np.asarray(counts.T @ wr).T
    return value, grad_log_theta, grad_log_phi


def log_posterior_and_grad(
    u: np.ndarray, corpus: Corpus, spec: MouSpec
) -> Tuple[float, np.ndarray]:
    """
    Log posterior on the unconstrained space and its analytic gradient.

    value = sum_d omega_d log p(w_d) + log prior + stick-breaking log-Jacobians.

    Args:
        u: Flat unconstrained vector (see MouLayout)
        corpus: Weighted corpus
        spec: Model specification

    Returns:
        (value, gradient with the shape of u)
    """
    return MouTarget(corpus, spec)(u)


class MouTarget:
    """
    Picklable (value, grad) callable for the MoU posterior.

    Holds the sparse count matrix and weights so repeated evaluations inside
    the sampler avoid rebuilding them.
    """

    def __init__(self, corpus: Corpus, spec: MouSpec):
        if corpus.vocab.V != spec.V:
            raise DimensionMismatch(f"Corpus has V={corpus.vocab.V} but spec has V={spec.V}")
        self.spec = spec
        self.layout = MouLayout(spec.J, spec.V)
        self.counts = corpus.count_matrix()
        self.weights = corpus.weights

    @property
    def dim(self) -> int:
        return self.layout.dim

    def __call__(self, u: np.ndarray) -> Tuple[float, np.ndarray]:
        spec = self.spec
        p = self.layout.unpack(u)
        log_theta, z_theta, ld_theta = log_simplex_from_unconstrained(p.theta_free)
        log_phi, z_phi, ld_phi = log_simplex_from_unconstrained(p.phi_free)

        data, g_theta, g_phi = mixture_terms(self.counts, self.weights, log_theta, log_phi)
        prior_theta, pg_theta = dirichlet_terms(log_theta, spec.alpha)
        prior_phi, pg_phi = dirichlet_terms(log_phi, spec.eta)

        value = data + prior_theta + prior_phi + float(ld_theta) + float(np.sum(ld_phi))
        grad_theta = simplex_grad_to_unconstrained(g_theta + pg_theta, z_theta) + log_det_grad(
            z_theta
        )
        grad_phi = simplex_grad_to_unconstrained(g_phi + pg_phi, z_phi) + log_det_grad(z_phi)
        return value, self.layout.pack(grad_theta, grad_phi)


def params_to_json(spec: MouSpec, theta: np.ndarray, phi: np.ndarray) -> Dict[str, Any]:
    return {
        "theta": [float(t) for t in theta],
        "phi": [[float(p) for p in row] for row in phi],
        "spec": {"J": spec.J, "V": spec.V, "alpha": spec.alpha, "eta": spec.eta},
    }


def params_from_json(obj: Dict[str, Any]) -> Tuple[MouSpec, np.ndarray, np.ndarray]:
    try:
        spec = MouSpec(**obj["spec"])
        theta = check_simplex(np.array(obj["theta"], dtype=np.float64), "theta")
        phi = check_simplex(np.array(obj["phi"], dtype=np.float64), "phi")
    except (KeyError, TypeError) as e:
        raise DataError(f"Malformed parameter document: {e}") from e
    if theta.shape != (spec.J,) or phi.shape != (spec.J, spec.V):
        raise DimensionMismatch("Parameter shapes do not match the embedded spec")
    return spec, theta, phi
