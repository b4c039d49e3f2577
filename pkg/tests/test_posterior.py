"""Tests for relabeling, posterior summaries, clustering and topic-count selection."""

import itertools

import numpy as np
import pytest
from src.wtopics.core.corpus import BowDocument, Corpus, Vocabulary
from src.wtopics.core.model import MouSpec, responsibilities
from src.wtopics.errors import CapReached, ConfigError, InsufficientDraws
from src.wtopics.inference.fit import fit_mou
from src.wtopics.inference.hmc import HmcConfig
from src.wtopics.posterior.relabel import TopicDraws, l1_to_reference, relabel
from src.wtopics.posterior.selection import select_num_topics
from src.wtopics.posterior.summary import (
    assign_documents,
    assign_documents_by_vote,
    assignments_frame,
    interval_rows,
    quantile_interval,
    summarize,
    top_words,
    topics_frame,
)


def _vocab(V):
    return Vocabulary(tokens=tuple(f"w{v}" for v in range(V)))


def _noisy_draws(n=60, seed=0):
    """Draws scattered around a fixed three-topic solution, already in canonical order."""
    rng = np.random.default_rng(seed)
    theta0 = np.array([0.5, 0.3, 0.2])
    phi0 = np.array(
        [
            [0.7, 0.1, 0.1, 0.1],
            [0.1, 0.7, 0.1, 0.1],
            [0.1, 0.1, 0.1, 0.7],
        ]
    )
    theta = np.vstack([rng.dirichlet(200 * theta0) for _ in range(n)])
    phi = np.stack([np.vstack([rng.dirichlet(300 * row) for row in phi0]) for _ in range(n)])
    log_post = rng.normal(size=n)
    return TopicDraws(theta=theta, phi=phi, log_post=log_post)


class TestRelabel:
    def test_aligned_draws_unchanged(self):
        draws = _noisy_draws()
        out, perms = relabel(draws)
        assert np.array_equal(perms, np.tile(np.arange(3), (draws.n, 1)))
        assert np.array_equal(out.theta, draws.theta)
        assert np.array_equal(out.phi, draws.phi)

    def test_swapped_draw_recovered(self):
        draws = _noisy_draws()
        theta, phi = draws.theta.copy(), draws.phi.copy()
        theta[5] = theta[5][[1, 0, 2]]
        phi[5] = phi[5][[1, 0, 2]]
        swapped = TopicDraws(theta=theta, phi=phi, log_post=draws.log_post)
        out, perms = relabel(swapped)
        assert list(perms[5]) == [1, 0, 2]
        assert np.allclose(out.phi[5], draws.phi[5])
        assert np.allclose(out.theta[5], draws.theta[5])

    def test_l1_never_increases(self):
        rng = np.random.default_rng(4)
        draws = _noisy_draws(seed=1)
        perms = np.vstack([rng.permutation(3) for _ in range(draws.n)])
        scrambled = draws.permute(perms)
        ref = draws.phi[int(np.argmax(draws.log_post))]
        out, _ = relabel(scrambled, reference=(None, ref))
        before = l1_to_reference(scrambled, ref)
        after = l1_to_reference(out, ref)
        assert np.all(after <= before + 1e-12)

    def test_invariant_to_input_labeling(self):
        draws = _noisy_draws(seed=2)
        base, _ = relabel(draws)
        for perm in itertools.permutations(range(3)):
            perms = np.tile(np.array(perm), (draws.n, 1))
            out, _ = relabel(draws.permute(perms))
            assert np.allclose(out.theta, base.theta)
            assert np.allclose(out.phi, base.phi)

    def test_permutations_apply_to_original(self):
        draws = _noisy_draws(seed=3)
        out, perms = relabel(draws)
        assert np.array_equal(np.take_along_axis(draws.theta, perms, axis=1), out.theta)


class TestSummary:
    def test_quantiles_of_one_to_hundred(self):
        lo, hi = quantile_interval(np.arange(1, 101, dtype=float))
        assert lo == pytest.approx(3.475)
        assert hi == pytest.approx(97.525)

    def test_interval_coverage_of_normal_mean(self):
        # flat-prior posterior of a normal mean from 25 observations
        rng = np.random.default_rng(17)
        mu, se = 2.0, 1.0 / np.sqrt(25)
        covered = 0
        for _ in range(500):
            xbar = rng.normal(mu, se)
            lo, hi = quantile_interval(rng.normal(xbar, se, size=2000))
            covered += lo <= mu <= hi
        assert abs(covered / 500 - 0.95) <= 0.03

    def test_repeated_draw_collapses_interval(self):
        theta = np.tile([0.6, 0.4], (50, 1))
        phi = np.tile([[[0.5, 0.5], [0.2, 0.8]]], (50, 1, 1))
        summary = summarize(TopicDraws(theta, phi, np.zeros(50)), _vocab(2))
        assert np.array_equal(summary.theta_lo, summary.theta_mean)
        assert np.array_equal(summary.theta_hi, summary.theta_mean)
        assert np.array_equal(summary.phi_lo, summary.phi_hi)

    def test_intervals_contain_means(self):
        summary = summarize(_noisy_draws(), _vocab(4), top_k=2)
        assert np.all(summary.theta_lo <= summary.theta_mean)
        assert np.all(summary.theta_mean <= summary.theta_hi)
        assert summary.top_words[0][0][0] == "w0"
        assert summary.top_words[2][0][0] == "w3"

    def test_uniform_row_lists_first_words(self):
        assert list(top_words(np.full(6, 1 / 6), 3)) == [0, 1, 2]

    def test_top_k_capped_at_vocabulary(self):
        summary = summarize(_noisy_draws(), _vocab(4), top_k=15)
        assert all(len(words) == 4 for words in summary.top_words)

    def test_too_few_draws(self):
        draws = _noisy_draws(n=39)
        with pytest.raises(InsufficientDraws):
            summarize(draws, _vocab(4))

    def test_frames(self):
        summary = summarize(_noisy_draws(), _vocab(4), top_k=2)
        frame = topics_frame(summary)
        assert list(frame.columns) == ["topic", "rank", "token", "mean_prob"]
        assert len(frame) == 6
        assert frame["topic"].min() == 1

    def test_interval_rows_without_draws(self):
        rows = interval_rows(["a", "b"], np.zeros((0, 2)))
        assert rows[0] == {"name": "a", "mean": None, "lo": None, "hi": None}


def _corpus(doc_counts, V):
    docs = [BowDocument(id=f"d{i}", counts=c) for i, c in enumerate(doc_counts)]
    return Corpus(vocab=_vocab(V), docs=docs)


class TestAssign:
    def test_identical_rows_follow_theta(self):
        corpus = _corpus([{0: 3}, {1: 2, 2: 1}], 3)
        phi = np.tile([0.2, 0.3, 0.5], (3, 1))
        out = assign_documents(corpus, np.array([0.2, 0.5, 0.3]), phi)
        assert list(out.topic) == [1, 1]

    def test_exclusive_word_goes_to_its_topic(self):
        corpus = _corpus([{2: 1}], 3)
        phi = np.array([[0.5, 0.5, 0.0], [0.1, 0.1, 0.8]])
        out = assign_documents(corpus, np.array([0.99, 0.01]), phi)
        assert out.topic[0] == 1
        assert out.resp[0] == pytest.approx([0.0, 1.0])

    def test_matches_brute_force(self):
        rng = np.random.default_rng(7)
        counts = [{int(v): int(rng.integers(1, 4)) for v in rng.choice(5, 3)} for _ in range(20)]
        corpus = _corpus(counts, 5)
        theta = rng.dirichlet(np.ones(3))
        phi = rng.dirichlet(np.ones(5), size=3)
        out = assign_documents(corpus, theta, phi)
        for d, doc in enumerate(corpus.docs):
            scores = [
                np.log(theta[j]) + sum(n * np.log(phi[j, v]) for v, n in doc.counts.items())
                for j in range(3)
            ]
            assert out.topic[d] == int(np.argmax(scores))
            assert np.allclose(out.resp[d], responsibilities(doc, theta, phi))

    def test_per_document_theta(self):
        corpus = _corpus([{0: 1}, {0: 1}], 2)
        phi = np.full((2, 2), 0.5)
        out = assign_documents(corpus, np.array([[0.9, 0.1], [0.1, 0.9]]), phi)
        assert list(out.topic) == [0, 1]

    def test_vote(self):
        corpus = _corpus([{0: 4}, {3: 4}, {1: 3}], 4)
        draws = _noisy_draws()
        vote = assign_documents_by_vote(corpus, draws)
        assert list(vote.topic) == [0, 2, 1]
        assert np.allclose(vote.resp.sum(axis=1), 1.0)
        frame = assignments_frame(vote)
        assert list(frame.columns) == ["doc_id", "topic", "resp_1", "resp_2", "resp_3"]
        assert list(frame["topic"]) == [1, 3, 2]


class TestSelection:
    def test_stops_when_topic_empties(self):
        def fit_fn(corpus, J):
            return np.array([1.0 / J] * J) if J < 4 else np.array([0.5, 0.3, 0.195, 0.005])

        j_star, trace = select_num_topics(_corpus([{0: 1}], 2), fit_fn, progress=False)
        assert j_star == 3
        assert [J for J, _ in trace] == [2, 3, 4]
        assert trace[-1][1] == pytest.approx(0.005)

    def test_cap_reached_carries_trace(self):
        def fit_fn(corpus, J):
            return np.full(J, 1.0 / J)

        with pytest.raises(CapReached) as exc:
            select_num_topics(_corpus([{0: 1}], 2), fit_fn, j_max=3, progress=False)
        assert [J for J, _ in exc.value.trace] == [2, 3]

    def test_bad_bounds(self):
        with pytest.raises(ConfigError):
            select_num_topics(_corpus([{0: 1}], 2), lambda c, J: np.ones(J), j_start=1)
        with pytest.raises(ConfigError):
            select_num_topics(_corpus([{0: 1}], 2), lambda c, J: np.ones(J), j_start=5, j_max=4)

    @pytest.mark.slow
    def test_synthetic_three_topic_corpus(self):
        rng = np.random.default_rng(12)
        phi = np.array(
            [
                [0.45, 0.45, 0.025, 0.025, 0.025, 0.025],
                [0.025, 0.025, 0.45, 0.45, 0.025, 0.025],
                [0.025, 0.025, 0.025, 0.025, 0.45, 0.45],
            ]
        )
        counts = []
        for z in rng.choice(3, size=400, p=[0.5, 0.3, 0.2]):
            n = rng.multinomial(30, phi[z])
            counts.append({v: int(c) for v, c in enumerate(n) if c})
        corpus = _corpus(counts, 6)
        config = HmcConfig(iterations=600, burn_in=300, chains=2, seed=1)

        def fit_fn(corp, J):
            fit = fit_mou(corp, MouSpec(J=J, V=6), config, progress=False)
            return fit.draws.theta.mean(axis=0)

        j_star, trace = select_num_topics(corpus, fit_fn, j_max=5, progress=False)
        proportions = dict(trace)
        assert j_star == 3
        assert proportions[3] > 0.1
        assert proportions[4] < 0.01
