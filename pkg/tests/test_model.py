"""Tests for the mixture-of-unigrams pseudolikelihood and posterior."""

import itertools
from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import dirichlet
from src.wtopics.core.corpus import BowDocument, Corpus, Vocabulary
from src.wtopics.core.model import (
    MouLayout,
    MouSpec,
    MouTarget,
    log_dirichlet,
    log_doc_pseudolikelihood,
    log_multinomial_coefficient,
    log_posterior_and_grad,
    log_prior,
    params_from_json,
    params_to_json,
    responsibilities,
    responsibilities_matrix,
)
from src.wtopics.core.transforms import simplex_from_unconstrained
from src.wtopics.errors import (
    DataError,
    DegenerateDocument,
    DimensionMismatch,
    DomainError,
)


def _random_simplex(rng, *shape):
    x = rng.gamma(1.0, size=shape)
    return x / x.sum(axis=-1, keepdims=True)


def _doc(counts, weight=1.0, doc_id="d"):
    counts = {v: int(n) for v, n in enumerate(counts) if n}
    return BowDocument(id=doc_id, counts=counts, scaled_weight=weight)


def _random_corpus(rng, M, V, max_len=6):
    docs = []
    for d in range(M):
        counts = rng.multinomial(int(rng.integers(1, max_len + 1)), np.full(V, 1.0 / V))
        docs.append(_doc(counts, weight=float(rng.uniform(0.2, 3.0)), doc_id=f"d{d}"))
    vocab = Vocabulary(tokens=tuple(f"w{v}" for v in range(V)))
    return Corpus(vocab=vocab, docs=docs)


def test_spec_validation():
    with pytest.raises(DataError):
        MouSpec(J=0, V=5)
    with pytest.raises(DataError):
        MouSpec(J=2, V=1)
    with pytest.raises(DataError):
        MouSpec(J=2, V=5, alpha=0.0)
    with pytest.raises(DataError):
        MouSpec(J=65, V=5)


def test_likelihood_normalizes_over_count_vectors():
    rng = np.random.default_rng(0)
    for _ in range(20):
        theta, phi = _random_simplex(rng, 2), _random_simplex(rng, 2, 3)
        total = 0.0
        for counts in itertools.product(range(4), repeat=3):
            if sum(counts) != 3:
                continue
            ll = log_doc_pseudolikelihood(_doc(counts), theta, phi)
            total += np.exp(ll + log_multinomial_coefficient(np.array(counts)))
        assert total == pytest.approx(1.0, abs=1e-10)


def test_likelihood_matches_enumeration():
    rng = np.random.default_rng(1)
    for counts in [(3, 0, 0), (1, 1, 1), (0, 2, 1)]:
        theta, phi = _random_simplex(rng, 2), _random_simplex(rng, 2, 3)
        explicit = sum(theta[j] * np.prod(phi[j] ** np.array(counts)) for j in range(2))
        ll = log_doc_pseudolikelihood(_doc(counts), theta, phi)
        assert ll == pytest.approx(np.log(explicit), abs=1e-12)


def test_weight_scales_log_likelihood():
    theta, phi = np.array([0.3, 0.7]), np.array([[0.2, 0.8], [0.6, 0.4]])
    base = log_doc_pseudolikelihood(_doc((2, 1)), theta, phi)
    weighted = log_doc_pseudolikelihood(_doc((2, 1), weight=2.5), theta, phi)
    assert weighted == pytest.approx(2.5 * base)
    assert log_doc_pseudolikelihood(_doc((2, 1), weight=0.0), theta, phi) == 0.0


def test_impossible_document():
    theta, phi = np.array([0.5, 0.5]), np.array([[1.0, 0.0], [1.0, 0.0]])
    assert log_doc_pseudolikelihood(_doc((0, 2)), theta, phi) == -np.inf
    with pytest.raises(DegenerateDocument):
        responsibilities(_doc((0, 2)), theta, phi)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        log_doc_pseudolikelihood(_doc((1, 1)), np.array([0.5, 0.5]), np.full((3, 2), 0.5))
    with pytest.raises(DimensionMismatch):
        log_doc_pseudolikelihood(_doc((1, 1, 1)), np.array([1.0]), np.full((1, 2), 0.5))


def test_responsibilities_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(10):
        theta, phi = _random_simplex(rng, 2), _random_simplex(rng, 2, 3)
        counts = rng.multinomial(4, [1 / 3] * 3)
        joint = np.array([theta[j] * np.prod(phi[j] ** counts) for j in range(2)])
        r = responsibilities(_doc(counts), theta, phi)
        assert np.allclose(r, joint / joint.sum(), atol=1e-12)


def test_responsibilities_matrix_agrees_with_single():
    rng = np.random.default_rng(3)
    corpus = _random_corpus(rng, M=8, V=4)
    theta, phi = _random_simplex(rng, 3), _random_simplex(rng, 3, 4)
    R, ll = responsibilities_matrix(corpus.count_matrix(), np.log(theta), np.log(phi))
    for d, doc in enumerate(corpus.docs):
        assert np.allclose(R[d], responsibilities(doc, theta, phi), atol=1e-12)
        expected = log_doc_pseudolikelihood(doc, theta, phi) / doc.scaled_weight
        assert ll[d] == pytest.approx(expected, abs=1e-10)


def test_log_dirichlet_matches_scipy():
    x = np.array([0.2, 0.3, 0.5])
    assert log_dirichlet(x, 1.7) == pytest.approx(dirichlet.logpdf(x, [1.7] * 3))
    assert log_dirichlet(np.array([0.0, 1.0]), 1.0) == pytest.approx(0.0)
    with pytest.raises(DomainError):
        log_dirichlet(np.array([0.0, 1.0]), 0.5)


def test_log_prior_validates_simplex():
    spec = MouSpec(J=2, V=2)
    with pytest.raises(DomainError):
        log_prior(spec, np.array([0.6, 0.6]), np.full((2, 2), 0.5))
    assert log_prior(spec, np.array([0.4, 0.6]), np.full((2, 2), 0.5)) == pytest.approx(0.0)


def test_posterior_value_decomposes():
    rng = np.random.default_rng(4)
    corpus = _random_corpus(rng, M=6, V=4)
    spec = MouSpec(J=3, V=4, alpha=1.3, eta=0.8)
    layout = MouLayout(3, 4)
    u = rng.normal(size=layout.dim)

    value, grad = log_posterior_and_grad(u, corpus, spec)
    p = layout.unpack(u)
    theta, ld_theta = simplex_from_unconstrained(p.theta_free)
    phi, ld_phi = simplex_from_unconstrained(p.phi_free)
    expected = sum(log_doc_pseudolikelihood(doc, theta, phi) for doc in corpus.docs)
    expected += log_prior(spec, theta, phi) + ld_theta + ld_phi.sum()
    assert value == pytest.approx(expected, rel=1e-10)
    assert grad.shape == u.shape


def _fd_relative_error(target, u, h=1e-5):
    _, grad = target(u)
    numeric = np.empty_like(u)
    for i in range(u.shape[0]):
        e = np.zeros_like(u)
        e[i] = h
        numeric[i] = (target(u + e)[0] - target(u - e)[0]) / (2 * h)
    return np.max(np.abs(grad - numeric)) / max(np.max(np.abs(grad)), 1.0)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        J, V = int(rng.integers(1, 4)), int(rng.integers(2, 5))
        corpus = _random_corpus(rng, M=int(rng.integers(1, 6)), V=V)
        spec = MouSpec(J=J, V=V, alpha=float(rng.uniform(0.5, 2)), eta=float(rng.uniform(0.5, 2)))
        target = MouTarget(corpus, spec)
        u = rng.normal(size=target.dim)
        worst = max(worst, _fd_relative_error(target, u))
    assert worst < 1e-6


def test_bag_of_words_matches_word_sequence_likelihood():
    rng = np.random.default_rng(6)
    one_hot = np.eye(5)
    for _ in range(20):
        theta, phi = _random_simplex(rng, 3), _random_simplex(rng, 3, 5)
        words = rng.integers(0, 5, size=int(rng.integers(1, 9)))
        per_topic = np.array([np.prod([one_hot[w] @ phi[j] for w in words]) for j in range(3)])
        ll = log_doc_pseudolikelihood(_doc(np.bincount(words, minlength=5)), theta, phi)
        assert ll == pytest.approx(np.log(theta @ per_topic), rel=1e-10)


def test_topic_permutation_equivariance():
    rng = np.random.default_rng(7)
    corpus = _random_corpus(rng, M=6, V=4)
    theta, phi = _random_simplex(rng, 4), _random_simplex(rng, 4, 4)
    for perm in map(list, itertools.permutations(range(4))):
        for doc in corpus.docs:
            ll = log_doc_pseudolikelihood(doc, theta[perm], phi[perm])
            assert ll == pytest.approx(log_doc_pseudolikelihood(doc, theta, phi), rel=1e-12)
            r = responsibilities(doc, theta[perm], phi[perm])
            assert np.allclose(r, responsibilities(doc, theta, phi)[perm], atol=1e-12)


def test_zero_weights_leave_prior_and_jacobian():
    rng = np.random.default_rng(8)
    corpus = _random_corpus(rng, M=5, V=4)
    silent = Corpus(vocab=corpus.vocab, docs=[replace(d, scaled_weight=0.0) for d in corpus.docs])
    empty = Corpus(vocab=corpus.vocab, docs=[])
    spec = MouSpec(J=3, V=4, alpha=1.4, eta=0.7)
    layout = MouLayout(3, 4)
    u = rng.normal(size=layout.dim)

    value, grad = log_posterior_and_grad(u, silent, spec)
    p = layout.unpack(u)
    theta, ld_theta = simplex_from_unconstrained(p.theta_free)
    phi, ld_phi = simplex_from_unconstrained(p.phi_free)
    assert value == pytest.approx(log_prior(spec, theta, phi) + ld_theta + ld_phi.sum(), rel=1e-10)
    assert np.allclose(grad, log_posterior_and_grad(u, empty, spec)[1], atol=1e-12)


def test_doubling_weights_doubles_data_term():
    rng = np.random.default_rng(9)
    corpus = _random_corpus(rng, M=6, V=4)
    doubled = Corpus(
        vocab=corpus.vocab,
        docs=[replace(d, scaled_weight=2 * d.scaled_weight) for d in corpus.docs],
    )
    spec = MouSpec(J=2, V=4)
    u = rng.normal(size=MouLayout(2, 4).dim)
    prior_only, _ = log_posterior_and_grad(u, Corpus(vocab=corpus.vocab, docs=[]), spec)
    single = log_posterior_and_grad(u, corpus, spec)[0] - prior_only
    double = log_posterior_and_grad(u, doubled, spec)[0] - prior_only
    assert double == pytest.approx(2 * single, rel=1e-10)


def test_layout_names_and_constrain():
    layout = MouLayout(2, 3)
    assert layout.dim == 1 + 4
    assert layout.names()[:2] == ["theta_free[0]", "phi_free[0,0]"]
    theta, phi = layout.constrain(np.zeros((7, layout.dim)))
    assert theta.shape == (7, 2) and phi.shape == (7, 2, 3)
    assert np.allclose(phi, 1 / 3)
    with pytest.raises(DimensionMismatch):
        layout.unpack(np.zeros(4))


def test_params_json_round_trip():
    spec = MouSpec(J=2, V=3)
    theta, phi = np.array([0.25, 0.75]), np.array([[0.2, 0.3, 0.5], [0.1, 0.1, 0.8]])
    spec2, theta2, phi2 = params_from_json(params_to_json(spec, theta, phi))
    assert spec2 == spec
    assert np.array_equal(theta2, theta) and np.array_equal(phi2, phi)
    with pytest.raises(DataError):
        params_from_json({"theta": [1.0]})
