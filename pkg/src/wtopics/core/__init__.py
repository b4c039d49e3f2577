"""Corpus handling, simplex transforms and the MoU / hierarchical MoU densities."""

from .corpus import (
    BowDocument,
    Corpus,
    RawDocument,
    TokenizeRules,
    Vocabulary,
    build_corpus,
    build_vocabulary,
    drop_empty_documents,
    load_jsonl,
    load_stopwords,
    scale_weights,
    tokenize,
    write_vocabulary_csv,
)
from .hier import (
    DesignEncoder,
    DesignRow,
    HierLayout,
    HierParams,
    HierSpec,
    HierTarget,
    document_topic_proportions,
    group_topic_proportions,
    log_posterior_and_grad_hier,
    log_prior_hier,
    topic_proportions_from_effects,
)
from .model import (
    MouLayout,
    MouSpec,
    MouTarget,
    log_doc_pseudolikelihood,
    log_posterior_and_grad,
    log_prior,
    responsibilities,
)
from .transforms import simplex_from_unconstrained, unconstrain_simplex

__all__ = [
    "BowDocument",
    "Corpus",
    "DesignEncoder",
    "DesignRow",
    "HierLayout",
    "HierParams",
    "HierSpec",
    "HierTarget",
    "MouLayout",
    "MouSpec",
    "MouTarget",
    "RawDocument",
    "TokenizeRules",
    "Vocabulary",
    "build_corpus",
    "build_vocabulary",
    "document_topic_proportions",
    "drop_empty_documents",
    "group_topic_proportions",
    "load_jsonl",
    "load_stopwords",
    "log_doc_pseudolikelihood",
    "log_posterior_and_grad",
    "log_posterior_and_grad_hier",
    "log_prior",
    "log_prior_hier",
    "responsibilities",
    "scale_weights",
    "simplex_from_unconstrained",
    "tokenize",
    "topic_proportions_from_effects",
    "unconstrain_simplex",
]
