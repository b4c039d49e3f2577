"""
Posterior summaries, topic-word tables and document clustering.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..core.corpus import Corpus, Vocabulary
from ..core.model import check_simplex, responsibilities, responsibilities_matrix
from ..errors import DimensionMismatch, InsufficientDraws
from .relabel import TopicDraws

logger = logging.getLogger(__name__)

MIN_INTERVAL_DRAWS = 40
INTERVAL_QUANTILES = (0.025, 0.975)


def quantile_interval(values: np.ndarray, axis: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Equal-tailed 95% interval with linear interpolation between order statistics."""
    lo, hi = np.quantile(values, INTERVAL_QUANTILES, axis=axis, method="linear")
    return lo, hi


def top_words(phi_row: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest probabilities; ties go to the lower vocabulary index."""
    return np.argsort(-phi_row, kind="stable")[:k]


@dataclass(frozen=True)
class TopicSummary:
    """Posterior means and 95% intervals of theta and phi, with the top words of each topic."""

    theta_mean: np.ndarray
    theta_lo: np.ndarray
    theta_hi: np.ndarray
    phi_mean: np.ndarray
    phi_lo: np.ndarray
    phi_hi: np.ndarray
    top_words: List[List[Tuple[str, float]]]
    n_draws: int

    @property
    def J(self) -> int:
        return self.theta_mean.shape[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_draws": self.n_draws,
            "theta": [
                {"topic": j + 1, "mean": float(m), "lo": float(lo), "hi": float(hi)}
                for j, (m, lo, hi) in enumerate(zip(self.theta_mean, self.theta_lo, self.theta_hi))
            ],
            "top_words": [
                {"topic": j + 1, "words": [tok for tok, _ in words]}
                for j, words in enumerate(self.top_words)
            ],
        }


def summarize(draws: TopicDraws, vocab: Vocabulary, top_k: int = 15) -> TopicSummary:
    """
    Summarize relabeled draws.

    Args:
        draws: Relabeled constrained draws
        vocab: Vocabulary the phi columns index
        top_k: Words listed per topic

    Returns:
        TopicSummary
    """
    if draws.n < MIN_INTERVAL_DRAWS:
        raise InsufficientDraws(
            f"A 95% interval needs at least {MIN_INTERVAL_DRAWS} draws, got {draws.n}"
        )
    if draws.phi.shape[2] != vocab.V:
        raise DimensionMismatch(f"phi has {draws.phi.shape[2]} columns but V={vocab.V}")

    theta_mean = draws.theta.mean(axis=0)
    phi_mean = draws.phi.mean(axis=0)
    theta_lo, theta_hi = quantile_interval(draws.theta)
    phi_lo, phi_hi = quantile_interval(draws.phi)

    k = min(top_k, vocab.V)
    words = [
        [(vocab.tokens[v], float(phi_mean[j, v])) for v in top_words(phi_mean[j], k)]
        for j in range(draws.J)
    ]
    return TopicSummary(
        theta_mean=theta_mean,
        theta_lo=theta_lo,
        theta_hi=theta_hi,
        phi_mean=phi_mean,
        phi_lo=phi_lo,
        phi_hi=phi_hi,
        top_words=words,
        n_draws=draws.n,
    )


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-document topic (0-based argmax) and responsibility vector."""

    doc_ids: List[str]
    topic: np.ndarray
    resp: np.ndarray

    def __post_init__(self) -> None:
        if self.resp.shape[0] != len(self.doc_ids) or self.topic.shape != (len(self.doc_ids),):
            raise DimensionMismatch("Assignment arrays do not match the document count")


def assign_documents(
    corpus: Corpus, theta_hat: np.ndarray, phi_hat: np.ndarray
) -> ClusterAssignment:
    """
    Plug-in clustering: responsibilities at point estimates, argmax per document.

    Args:
        corpus: Documents to cluster
        theta_hat: (J,) shared or (M, J) per-document topic proportions
        phi_hat: (J, V) topic-word probabilities

    Returns:
        ClusterAssignment; raises DegenerateDocument for a document no topic can produce
    """
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    phi_hat = check_simplex(phi_hat, "phi")
    if theta_hat.ndim == 1:
        rows = [responsibilities(doc, theta_hat, phi_hat) for doc in corpus.docs]
    else:
        if theta_hat.shape[0] != corpus.M:
            raise DimensionMismatch(f"theta_hat has {theta_hat.shape[0]} rows for M={corpus.M}")
        rows = [responsibilities(doc, t, phi_hat) for doc, t in zip(corpus.docs, theta_hat)]
    resp = np.vstack(rows) if rows else np.zeros((0, phi_hat.shape[0]))
    return ClusterAssignment(doc_ids=corpus.ids, topic=np.argmax(resp, axis=1), resp=resp)


def assign_documents_by_vote(
    corpus: Corpus,
    draws: TopicDraws,
    theta_docs: Optional[Callable[[int], np.ndarray]] = None,
) -> ClusterAssignment:
    """
    Majority vote of per-draw argmax assignments.

    resp holds the vote shares; ties go to the lowest topic index.

    Args:
        corpus: Documents to cluster
        draws: Relabeled draws
        theta_docs: Optional draw index -> (M, J) per-document proportions
            (hierarchical model)
    """
    counts = corpus.count_matrix()
    votes = np.zeros((corpus.M, draws.J))
    rows = np.arange(corpus.M)
    with np.errstate(divide="ignore"):
        for i in range(draws.n):
            log_theta = np.log(draws.theta[i] if theta_docs is None else theta_docs(i))
            r, _ = responsibilities_matrix(counts, log_theta, np.log(draws.phi[i]))
            votes[rows, np.argmax(r, axis=1)] += 1.0
    share = votes / max(draws.n, 1)
    return ClusterAssignment(doc_ids=corpus.ids, topic=np.argmax(votes, axis=1), resp=share)


def topics_frame(summary: TopicSummary) -> pd.DataFrame:
    """topic,rank,token,mean_prob with 1-based topics and ranks."""
    records = [
        {"topic": j + 1, "rank": rank + 1, "token": token, "mean_prob": prob}
        for j, words in enumerate(summary.top_words)
        for rank, (token, prob) in enumerate(words)
    ]
    return pd.DataFrame(records, columns=["topic", "rank", "token", "mean_prob"])


def assignments_frame(assignment: ClusterAssignment) -> pd.DataFrame:
    """doc_id,topic,resp_1..resp_J with 1-based topics."""
    J = assignment.resp.shape[1]
    frame = pd.DataFrame(assignment.resp, columns=[f"resp_{j + 1}" for j in range(J)])
    frame.insert(0, "topic", assignment.topic + 1)
    frame.insert(0, "doc_id", assignment.doc_ids)
    return frame


def interval_rows(
    names: Sequence[str], draws: np.ndarray
) -> List[Dict[str, Any]]:
    """name/mean/lo/hi records for the columns of a (n, k) draw matrix."""
    if draws.shape[0] == 0:
        return [{"name": name, "mean": None, "lo": None, "hi": None} for name in names]
    mean = draws.mean(axis=0)
    lo, hi = quantile_interval(draws)
    return [
        {"name": name, "mean": float(m), "lo": float(a), "hi": float(b)}
        for name, m, a, b in zip(names, mean, lo, hi)
    ]
