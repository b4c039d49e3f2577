"""Tests for the hierarchical mixture of unigrams."""

from dataclasses import replace

import numpy as np
import pytest
from scipy import stats
from src.wtopics.core.corpus import BowDocument, Corpus, Vocabulary
from src.wtopics.core.hier import (
    DesignEncoder,
    DesignRow,
    HierLayout,
    HierParams,
    HierSpec,
    HierTarget,
    document_responsibilities,
    document_topic_proportions,
    group_topic_proportions,
    log_posterior_and_grad_hier,
    log_prior_hier,
    log_softmax_with_reference,
    topic_proportions_from_effects,
)
from src.wtopics.core.model import dirichlet_terms, log_doc_pseudolikelihood, responsibilities
from src.wtopics.core.transforms import simplex_from_unconstrained
from src.wtopics.errors import ConfigError, DimensionMismatch, MissingCovariate, UnknownLevel
from src.wtopics.inference.diagnostics import ess
from src.wtopics.inference.hmc import HmcConfig, SampleSet, hmc_sample


def _corpus(rng, M=8, V=4):
    docs = []
    for d in range(M):
        counts = rng.multinomial(int(rng.integers(1, 7)), np.full(V, 1.0 / V))
        docs.append(
            BowDocument(
                id=f"d{d}",
                counts={v: int(n) for v, n in enumerate(counts) if n},
                scaled_weight=float(rng.uniform(0.3, 2.0)),
                covariates={
                    "gender": str(rng.choice(["F", "M"])),
                    "age": str(rng.choice(["young", "mid", "old"])),
                    "state": str(rng.choice(["CA", "NY", "TX"])),
                },
            )
        )
    return Corpus(vocab=Vocabulary(tokens=tuple(f"w{v}" for v in range(V))), docs=docs)


def _encoder():
    return DesignEncoder(
        fixed={"age": ["mid", "old", "young"], "gender": ["F", "M"]},
        random="state",
        random_levels=["CA", "NY", "TX"],
    )


def test_spec_validation():
    with pytest.raises(ConfigError):
        HierSpec(J=1, V=4, p=1, r=0)
    with pytest.raises(ConfigError):
        HierSpec(J=3, V=4, p=1, r=0, variance_prior="lognormal")
    assert HierSpec(J=3, V=4, p=1, r=2).n_sigma == 2
    assert HierSpec(J=3, V=4, p=1, r=2, shared_variance=True).n_sigma == 1
    assert HierSpec(J=3, V=4, p=1, r=0).n_sigma == 0


def test_encoder_fit_and_columns():
    covs = [{"g": "b", "s": "x"}, {"g": "a", "s": "y"}, {"g": "c", "s": "x"}]
    enc = DesignEncoder.fit(covs, ["g"], "s")
    assert enc.columns == ["(Intercept)", "g=b", "g=c"]
    assert enc.p == 3 and enc.r == 2

    row = enc.encode({"g": "c", "s": "y"})
    assert np.array_equal(row.x, [1.0, 0.0, 1.0])
    assert np.array_equal(row.psi, [0.0, 1.0])
    assert enc.decode(row) == {"g": "c", "s": "y"}
    assert DesignEncoder.from_dict(enc.to_dict()) == enc


def test_encoder_errors():
    enc = _encoder()
    with pytest.raises(MissingCovariate):
        DesignEncoder.fit([{"gender": "F"}], ["gender", "age"], None)
    with pytest.raises(MissingCovariate):
        enc.encode({"gender": "F", "state": "CA"})
    with pytest.raises(UnknownLevel):
        enc.encode({"gender": "X", "age": "old", "state": "CA"})
    with pytest.raises(UnknownLevel):
        enc.encode({"gender": "F", "age": "old", "state": "WA"})

    row = enc.encode({"gender": "F", "age": "old", "state": "WA"}, allow_unseen_random=True)
    assert not row.psi.any()


def test_zero_effects_give_uniform_proportions():
    params = HierParams(beta=np.zeros((3, 4)), gamma=np.zeros((3, 3)), sigma2_gamma=np.ones(3))
    row = _encoder().encode({"gender": "M", "age": "young", "state": "TX"})
    assert np.allclose(topic_proportions_from_effects(row, params), 0.25, atol=1e-15)


def test_identical_rows_give_identical_proportions():
    rng = np.random.default_rng(0)
    params = HierParams(
        beta=rng.normal(size=(2, 4)), gamma=rng.normal(size=(2, 3)), sigma2_gamma=np.ones(2)
    )
    X = np.tile([1.0, 0.0, 1.0, 1.0], (3, 1))
    Psi = np.tile([0.0, 1.0, 0.0], (3, 1))
    theta = document_topic_proportions(X, Psi, params)
    assert np.array_equal(theta[0], theta[1]) and np.array_equal(theta[1], theta[2])
    row = DesignRow(x=X[0], psi=Psi[0])
    assert np.allclose(theta[0], topic_proportions_from_effects(row, params), atol=1e-15)


def test_softmax_outputs_are_simplices():
    rng = np.random.default_rng(1)
    xi = rng.normal(scale=30.0, size=(10_000, 4))
    theta = np.exp(log_softmax_with_reference(xi))
    assert np.all(theta >= 0)
    assert np.allclose(theta.sum(axis=1), 1.0, atol=1e-12)


def test_proportions_monotone_and_injective_in_predictor():
    rng = np.random.default_rng(6)
    for _ in range(200):
        xi = rng.normal(scale=2.0, size=3)
        theta = np.exp(log_softmax_with_reference(xi))
        # log-odds against the reference topic recover xi exactly
        assert np.allclose(np.log(theta[:-1] / theta[-1]), xi, atol=1e-10)

        j = int(rng.integers(3))
        bumped = xi.copy()
        bumped[j] += rng.uniform(0.01, 1.0)
        moved = np.exp(log_softmax_with_reference(bumped))
        assert moved[j] > theta[j]
        assert np.all(np.delete(moved, j) < np.delete(theta, j))

        other = rng.normal(scale=2.0, size=3)
        assert not np.allclose(np.exp(log_softmax_with_reference(other)), theta, atol=1e-12)


def test_effect_dimension_mismatch():
    params = HierParams(beta=np.zeros((2, 3)), gamma=np.zeros((2, 0)), sigma2_gamma=np.zeros(0))
    with pytest.raises(DimensionMismatch):
        topic_proportions_from_effects(DesignRow(x=np.ones(4), psi=np.zeros(0)), params)


@pytest.mark.parametrize("variance_prior", ["inverse_gamma", "gamma"])
def test_log_prior_matches_scipy(variance_prior):
    rng = np.random.default_rng(2)
    spec = HierSpec(
        J=3, V=4, p=2, r=3, a=0.7, b=1.3, sigma2_beta=4.0, variance_prior=variance_prior
    )
    params = HierParams(
        beta=rng.normal(size=(2, 2)),
        gamma=rng.normal(size=(2, 3)),
        sigma2_gamma=rng.uniform(0.5, 2.0, size=2),
    )
    if variance_prior == "inverse_gamma":
        var_prior = stats.invgamma.logpdf(params.sigma2_gamma, 0.7, scale=1.3).sum()
    else:
        var_prior = stats.gamma.logpdf(params.sigma2_gamma, 0.7, scale=1 / 1.3).sum()
    expected = (
        stats.norm.logpdf(params.beta, scale=2.0).sum()
        + sum(
            stats.norm.logpdf(params.gamma[j], scale=np.sqrt(params.sigma2_gamma[j])).sum()
            for j in range(2)
        )
        + var_prior
    )
    assert log_prior_hier(params, spec) == pytest.approx(expected, rel=1e-10)


def test_posterior_value_decomposes():
    rng = np.random.default_rng(3)
    corpus = _corpus(rng)
    enc = DesignEncoder.fit([d.covariates for d in corpus.docs], ["gender", "age"], "state")
    spec = HierSpec(J=3, V=4, p=enc.p, r=enc.r, eta=1.4)
    layout = HierLayout(spec)
    u = rng.normal(scale=0.5, size=layout.dim)

    value, _ = log_posterior_and_grad_hier(u, corpus, spec, enc)
    params, phi = layout.constrain(u)
    _, _, tau, phi_free = layout.unpack(u)
    _, ld_phi = simplex_from_unconstrained(phi_free)
    X, Psi = enc.design_matrices(corpus)
    theta_docs = document_topic_proportions(X, Psi, params)

    expected = sum(
        log_doc_pseudolikelihood(doc, t, phi) for doc, t in zip(corpus.docs, theta_docs)
    )
    expected += log_prior_hier(params, spec) + tau.sum()
    expected += dirichlet_terms(np.log(phi), spec.eta)[0] + ld_phi.sum()
    assert value == pytest.approx(expected, rel=1e-9)


def _fd_relative_error(target, u, h=1e-5):
    _, grad = target(u)
    numeric = np.empty_like(u)
    for i in range(u.shape[0]):
        e = np.zeros_like(u)
        e[i] = h
        numeric[i] = (target(u + e)[0] - target(u - e)[0]) / (2 * h)
    return np.max(np.abs(grad - numeric)) / max(np.max(np.abs(grad)), 1.0)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    worst = 0.0
    for i in range(100):
        corpus = _corpus(rng, M=int(rng.integers(2, 7)), V=3)
        covs = [d.covariates for d in corpus.docs]
        fixed = ["gender", "age"] if i % 3 else []
        enc = DesignEncoder.fit(covs, fixed, "state" if i % 2 else None)
        spec = HierSpec(
            J=int(rng.integers(2, 4)),
            V=3,
            p=enc.p,
            r=enc.r,
            sigma2_beta=float(rng.uniform(0.5, 10.0)),
            variance_prior="gamma" if i % 4 == 0 else "inverse_gamma",
            shared_variance=bool(i % 5 == 0),
        )
        target = HierTarget(corpus, enc, spec)
        u = rng.normal(scale=0.7, size=target.dim)
        worst = max(worst, _fd_relative_error(target, u))
    assert worst < 1e-6


def test_intercept_only_reduces_to_mixture_of_unigrams():
    rng = np.random.default_rng(8)
    corpus = _corpus(rng)
    enc = DesignEncoder.fit([d.covariates for d in corpus.docs], [], None)
    spec = HierSpec(J=3, V=4, p=enc.p, r=enc.r)
    assert (spec.p, spec.r) == (1, 0)
    layout = HierLayout(spec)
    params, phi = layout.constrain(rng.normal(size=layout.dim))

    X, Psi = enc.design_matrices(corpus)
    theta_docs = document_topic_proportions(X, Psi, params)
    theta = np.exp(log_softmax_with_reference(params.beta[:, 0]))
    assert np.allclose(theta_docs, theta, atol=1e-15)
    R = document_responsibilities(corpus, theta_docs, phi)
    for d, doc in enumerate(corpus.docs):
        assert np.allclose(R[d], responsibilities(doc, theta, phi), atol=1e-12)


def test_zero_weight_documents_leave_the_prior():
    rng = np.random.default_rng(9)
    corpus = _corpus(rng, M=6, V=3)
    silent = Corpus(vocab=corpus.vocab, docs=[replace(d, scaled_weight=0.0) for d in corpus.docs])
    reshuffled = Corpus(
        vocab=corpus.vocab,
        docs=[replace(d, counts={0: 4}, scaled_weight=0.0) for d in corpus.docs],
    )
    enc = DesignEncoder.fit([d.covariates for d in corpus.docs], ["gender"], None)
    spec = HierSpec(J=3, V=3, p=enc.p, r=enc.r, sigma2_beta=1.0)

    # the target cannot depend on counts the weights switch off
    u = rng.normal(size=HierLayout(spec).dim)
    value, grad = HierTarget(silent, enc, spec)(u)
    other_value, other_grad = HierTarget(reshuffled, enc, spec)(u)
    assert value == pytest.approx(other_value, rel=1e-12)
    assert np.allclose(grad, other_grad, atol=1e-12)

    config = HmcConfig(iterations=1250, burn_in=250, chains=4, seed=13)
    samples = hmc_sample(HierTarget(silent, enc, spec), config, progress=False)
    beta, _, _, _ = HierLayout(spec).unpack(samples.draws)
    beta = beta.reshape(beta.shape[:2] + (-1,))
    mc_se = 1.0 / np.sqrt(ess(beta))
    assert np.all(np.abs(beta.reshape(-1, beta.shape[-1]).mean(axis=0)) < 3 * mc_se)
    assert beta.reshape(-1, beta.shape[-1]).var(axis=0) == pytest.approx(
        np.ones(beta.shape[-1]), rel=0.15
    )


def test_target_rejects_mismatched_encoder():
    rng = np.random.default_rng(5)
    corpus = _corpus(rng)
    enc = DesignEncoder.fit([d.covariates for d in corpus.docs], ["gender"], None)
    with pytest.raises(DimensionMismatch):
        HierTarget(corpus, enc, HierSpec(J=2, V=4, p=5, r=0))


def test_group_proportions_with_zero_effects():
    enc = _encoder()
    spec = HierSpec(J=3, V=4, p=enc.p, r=enc.r)
    layout = HierLayout(spec)
    draws = np.zeros((2, 50, layout.dim))
    samples = SampleSet(
        draws=draws,
        log_post=np.zeros((2, 50)),
        accept_prob=np.ones((2, 50)),
        divergent=np.zeros((2, 50), dtype=bool),
        step_size=np.ones(2),
        param_names=layout.names(),
        config=HmcConfig(iterations=60, burn_in=10, chains=2),
    )
    combo = {"gender": "F", "age": "mid", "state": "CA"}
    result = group_topic_proportions(combo, samples, enc, layout)
    assert np.allclose(result.mean, 1 / 3)
    assert np.allclose(result.lo, result.hi)

    with pytest.raises(UnknownLevel):
        group_topic_proportions({"gender": "Q", "age": "mid", "state": "CA"}, samples, enc, layout)
