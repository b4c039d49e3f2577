"""
Corpus ingestion: tokenization, vocabulary, bag-of-words documents and
survey weight scaling.

A document enters as a RawDocument (text or precomputed counts plus a design
weight) and leaves as a BowDocument: a sparse count map over the shared
vocabulary with a scaled weight. Scaled weights always sum to the number of
documents in the corpus.
"""

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import sparse

from ..errors import DataError, EmptyCorpus, EmptyVocabulary, NonPositiveWeight

logger = logging.getLogger(__name__)

DEFAULT_STOPWORDS_PATH = Path(__file__).resolve().parent.parent / "data" / "stopwords_en.txt"

_NON_ALPHA = re.compile(r"[^a-z]+")


def load_stopwords(path: Union[str, Path, None] = None) -> FrozenSet[str]:
    """
    Load a stopword list (one token per line, UTF-8).

    Args:
        path: Stopword file; the shipped English list when None

    Returns:
        Frozen set of lowercased stopwords
    """
    path = Path(path) if path is not None else DEFAULT_STOPWORDS_PATH
    if not path.exists():
        raise DataError(f"Stopword file not found: {path}")
    with open(path, encoding="utf-8") as f:
        return frozenset(line.strip().lower() for line in f if line.strip())


@dataclass(frozen=True)
class TokenizeRules:
    """Preprocessing rules applied by tokenize()."""

    stopwords: FrozenSet[str] = field(default_factory=load_stopwords)
    min_len: int = 2
    lowercase: bool = True


@dataclass(frozen=True)
class RawDocument:
    """A document as read from input, before preprocessing."""

    id: str
    text: Optional[str] = None
    counts: Optional[Dict[str, int]] = None
    raw_weight: float = 1.0
    covariates: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.raw_weight > 0:
            raise NonPositiveWeight(
                f"Document {self.id!r}: weight must be positive, got {self.raw_weight}"
            )
        if self.text is None and self.counts is None:
            raise DataError(f"Document {self.id!r}: needs either 'text' or 'counts'")


@dataclass(frozen=True)
class Vocabulary:
    """Ordered set of distinct tokens with a token -> index map."""

    tokens: Tuple[str, ...]
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(set(self.tokens)) != len(self.tokens):
            raise DataError("Vocabulary tokens must be distinct")
        object.__setattr__(self, "index", {tok: i for i, tok in enumerate(self.tokens)})

    @property
    def V(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class BowDocument:
    """
    Bag-of-words document.

    counts maps vocabulary index -> positive count. A document emptied by
    preprocessing has length 0 until drop_empty_documents() removes it.
    """

    id: str
    counts: Dict[int, int]
    scaled_weight: float = 1.0
    covariates: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(c <= 0 for c in self.counts.values()):
            raise DataError(f"Document {self.id!r}: counts must be positive")
        if self.scaled_weight < 0 or not np.isfinite(self.scaled_weight):
            raise NonPositiveWeight(
                f"Document {self.id!r}: invalid scaled weight {self.scaled_weight}"
            )

    @property
    def length(self) -> int:
        """N_d, the number of tokens."""
        return sum(self.counts.values())

    def indices(self) -> np.ndarray:
        return np.fromiter(sorted(self.counts), dtype=np.int64, count=len(self.counts))

    def values(self) -> np.ndarray:
        return np.array([self.counts[i] for i in sorted(self.counts)], dtype=np.float64)


@dataclass
class Corpus:
    """Documents over a shared vocabulary."""

    vocab: Vocabulary
    docs: List[BowDocument]

    def __post_init__(self) -> None:
        V = self.vocab.V
        for doc in self.docs:
            if doc.counts and max(doc.counts) >= V:
                raise DataError(f"Document {doc.id!r}: word index out of range for V={V}")
        self._matrix: Optional[sparse.csr_matrix] = None

    @property
    def M(self) -> int:
        return len(self.docs)

    @property
    def weights(self) -> np.ndarray:
        return np.array([d.scaled_weight for d in self.docs], dtype=np.float64)

    @property
    def ids(self) -> List[str]:
        return [d.id for d in self.docs]

    def count_matrix(self) -> sparse.csr_matrix:
        """Sparse M x V count matrix (cached)."""
        if self._matrix is None:
            rows, cols, vals = [], [], []
            for d, doc in enumerate(self.docs):
                for v in sorted(doc.counts):
                    rows.append(d)
                    cols.append(v)
                    vals.append(float(doc.counts[v]))
            self._matrix = sparse.csr_matrix(
                (vals, (rows, cols)), shape=(self.M, self.vocab.V), dtype=np.float64
            )
        return self._matrix

    def token_totals(self) -> np.ndarray:
        return np.asarray(self.count_matrix().sum(axis=0)).ravel()

    def with_weights(self, weights: Sequence[float]) -> "Corpus":
        """Copy of the corpus with scaled weights replaced."""
        if len(weights) != self.M:
            raise DataError(f"Expected {self.M} weights, got {len(weights)}")
        docs = [replace(doc, scaled_weight=float(w)) for doc, w in zip(self.docs, weights)]
        return Corpus(vocab=self.vocab, docs=docs)

    def unweighted(self) -> "Corpus":
        """Copy with every weight set to 1 (the non-informative baseline)."""
        return self.with_weights(np.ones(self.M))


def tokenize(text: str, rules: Optional[TokenizeRules] = None) -> List[str]:
    """
    Split text into tokens.

    Lowercases, replaces every non-alphabetic character (punctuation, digits)
    with a space, splits on whitespace, then removes stopwords and tokens
    shorter than rules.min_len.

    Args:
        text: Raw document text
        rules: Preprocessing rules (defaults when None)

    Returns:
        List of tokens, possibly empty
    """
    rules = rules or TokenizeRules()
    if rules.lowercase:
        text = text.lower()
    tokens = _NON_ALPHA.sub(" ", text).split()
    return [t for t in tokens if len(t) >= rules.min_len and t not in rules.stopwords]


def build_vocabulary(docs: Iterable[Sequence[str]], min_count: int = 1) -> Vocabulary:
    """
    Build the vocabulary from tokenized documents.

    Tokens whose total count reaches min_count are kept in first-appearance
    order.

    Args:
        docs: Token lists, one per document
        min_count: Minimum total count for a token to be kept

    Returns:
        Vocabulary
    """
    if min_count < 1:
        raise DataError(f"min_count must be >= 1, got {min_count}")
    totals: Counter = Counter()
    order: List[str] = []
    for tokens in docs:
        for tok in tokens:
            if tok not in totals:
                order.append(tok)
            totals[tok] += 1
    kept = tuple(tok for tok in order if totals[tok] >= min_count)
    if not kept:
        raise EmptyVocabulary(f"No token occurs at least {min_count} time(s)")
    return Vocabulary(tokens=kept)


def scale_weights(raw_weights: Sequence[float]) -> np.ndarray:
    """
    Scale design weights so they sum to the number of documents.

    omega_d = M * w_d / sum_j w_j. Equal inputs map to exactly 1.

    Args:
        raw_weights: Positive design weights

    Returns:
        Scaled weights in input order
    """
    w = np.asarray(raw_weights, dtype=np.float64)
    if w.size == 0:
        return w
    bad = np.flatnonzero(~(w > 0))
    if bad.size:
        raise NonPositiveWeight(
            f"Weights must be positive; found {w[bad[0]]} at position {int(bad[0])}"
        )
    if np.all(w == w[0]):
        return np.ones_like(w)
    return w.size * (w / w.sum())


def drop_empty_documents(corpus: Corpus) -> Tuple[Corpus, List[str]]:
    """
    Remove documents with N_d = 0 and rescale weights over the survivors.

    Args:
        corpus: Corpus possibly containing empty documents

    Returns:
        (corpus of non-empty documents, ids of dropped documents)
    """
    kept = [doc for doc in corpus.docs if doc.length > 0]
    dropped = [doc.id for doc in corpus.docs if doc.length == 0]
    if not kept:
        raise EmptyCorpus("Every document is empty after preprocessing")
    if dropped:
        logger.warning(
            f"Dropped {len(dropped)} empty document(s) after preprocessing: "
            f"{', '.join(dropped[:10])}{' ...' if len(dropped) > 10 else ''}"
        )
    weights = scale_weights([doc.scaled_weight for doc in kept])
    docs = [replace(doc, scaled_weight=float(w)) for doc, w in zip(kept, weights)]
    return Corpus(vocab=corpus.vocab, docs=docs), dropped


def _document_tokens(raw: RawDocument, rules: TokenizeRules) -> List[str]:
    if raw.text is not None:
        return tokenize(raw.text, rules)
    tokens: List[str] = []
    for tok, n in raw.counts.items():  # type: ignore[union-attr]
        tokens.extend([tok] * int(n))
    return tokens


def build_corpus(
    raw_docs: Sequence[RawDocument],
    rules: Optional[TokenizeRules] = None,
    min_count: int = 1,
    unweighted: bool = False,
) -> Tuple[Corpus, List[str]]:
    """
    Full ingestion pipeline: tokenize, build vocabulary, count, drop empties, scale.

    Documents given as counts bypass the tokenizer.

    Returns:
        (corpus, dropped document ids)
    """
    rules = rules or TokenizeRules()
    ids = [raw.id for raw in raw_docs]
    if len(set(ids)) != len(ids):
        dup = next(i for i, n in Counter(ids).items() if n > 1)
        raise DataError(f"Duplicate document id {dup!r}")

    token_lists = [_document_tokens(raw, rules) for raw in raw_docs]
    vocab = build_vocabulary(token_lists, min_count=min_count)

    docs = []
    for raw, tokens in zip(raw_docs, token_lists):
        counts = Counter(vocab.index[t] for t in tokens if t in vocab.index)
        docs.append(
            BowDocument(
                id=raw.id,
                counts=dict(sorted(counts.items())),
                scaled_weight=1.0 if unweighted else raw.raw_weight,
                covariates=dict(raw.covariates),
            )
        )
    corpus, dropped = drop_empty_documents(Corpus(vocab=vocab, docs=docs))
    logger.info(f"Corpus: M={corpus.M} documents, V={vocab.V} tokens")
    return corpus, dropped


def load_jsonl(path: Union[str, Path]) -> List[RawDocument]:
    """
    Read documents from a JSON-lines file.

    Each line: {"id": str, "text": str | "counts": {token: int},
    "weight": number (default 1), "covariates": {name: level}}.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"Input file not found: {path}")

    docs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}:{lineno}: malformed JSON ({e.msg})") from e
            if not isinstance(obj, dict):
                raise DataError(f"{path}:{lineno}: expected a JSON object")
            if "id" not in obj:
                raise DataError(f"{path}:{lineno}: missing field 'id'")
            counts = obj.get("counts")
            if counts is not None:
                try:
                    counts = {str(k): int(v) for k, v in counts.items()}
                except (AttributeError, TypeError, ValueError) as e:
                    raise DataError(f"{path}:{lineno}: field 'counts' must map token -> int") from e
                if any(v < 0 for v in counts.values()):
                    raise DataError(f"{path}:{lineno}: field 'counts' has a negative count")
                counts = {k: v for k, v in counts.items() if v > 0}
            text = obj.get("text")
            if text is not None and not isinstance(text, str):
                raise DataError(f"{path}:{lineno}: field 'text' must be a string")
            try:
                weight = float(obj.get("weight", 1.0))
            except (TypeError, ValueError) as e:
                raise DataError(f"{path}:{lineno}: field 'weight' must be a number") from e
            raw_covariates = obj.get("covariates") or {}
            if not isinstance(raw_covariates, dict):
                raise DataError(f"{path}:{lineno}: field 'covariates' must map name -> level")
            covariates = {str(k): str(v) for k, v in raw_covariates.items()}
            try:
                docs.append(
                    RawDocument(
                        id=str(obj["id"]),
                        text=text,
                        counts=counts,
                        raw_weight=weight,
                        covariates=covariates,
                    )
                )
            except DataError as e:
                raise type(e)(f"{path}:{lineno}: {e}") from e
    logger.info(f"Loaded {len(docs)} documents from {path}")
    return docs


def vocabulary_frame(corpus: Corpus) -> pd.DataFrame:
    """Vocabulary table with columns index, token, total_count."""
    totals = corpus.token_totals()
    return pd.DataFrame(
        {
            "index": np.arange(corpus.vocab.V),
            "token": list(corpus.vocab.tokens),
            "total_count": totals.astype(np.int64),
        }
    )


def write_vocabulary_csv(corpus: Corpus, path: Union[str, Path]) -> None:
    vocabulary_frame(corpus).to_csv(path, index=False, lineterminator="\n")
