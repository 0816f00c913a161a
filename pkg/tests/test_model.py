import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gsdmm.errors import InactiveCluster, NonFiniteScore
from gsdmm.model import (
    EntropyTable,
    ModelState,
    UniformBeta,
    cluster_log_scores,
    conditional_distribution,
    doc_cluster_log_score,
    posterior_phi,
    prior_cluster_factor,
    top_words,
    word_entropy,
)
from gsdmm.synth import oracle_delta_ratio
from gsdmm.corpus import Vocabulary

from conftest import make_doc, make_state, random_triple


class TestPriorClusterFactor:
    def test_emptied_cluster_alpha_zero(self):
        state = make_state([0, 3], [[0, 0], [2, 1]], alpha=0.0)
        assert prior_cluster_factor(state, 0, excluding_doc=0) == 0.0

    def test_hand_evaluated(self):
        # (1 + 0.1) / (2 - 1 + 2*0.1), cross-checked against the
        # delta-ratio oracle below
        state = make_state([1, 1], [[2, 0], [0, 3]], alpha=0.1)
        factor = prior_cluster_factor(state, 0, excluding_doc=1)
        assert factor == pytest.approx(0.9166666666666667, rel=1e-12)
        oracle = oracle_delta_ratio(make_doc({}), 0, state, UniformBeta(0.1))
        assert factor == pytest.approx(oracle / (state.D - 1 + 2 * 0.1), rel=1e-12)

    def test_single_cluster_forced_normalization(self):
        # all D docs in the lone cluster, so m_excl = D - 1 and the factor
        # is (D - 1 + alpha) / (D - 1 + alpha)
        state = make_state([7], [[4, 2]], alpha=0.7)
        assert prior_cluster_factor(state, 0, excluding_doc=0) == pytest.approx(1.0)

    def test_inactive_cluster(self):
        state = make_state([2], [[1, 1]], alpha=0.1)
        with pytest.raises(InactiveCluster):
            prior_cluster_factor(state, 3, excluding_doc=0)


class TestDocClusterLogScore:
    def test_single_cluster_conditional_is_one(self):
        state = make_state([4], [[5, 1, 2]], alpha=0.3)
        doc = make_doc({0: 2, 2: 1})
        p = conditional_distribution(doc, state, UniformBeta(0.1))
        assert p.tolist() == [1.0]

    def test_burstiness_product_on_empty_cluster(self):
        # word appearing twice in a doc scored against a zero-count cluster
        # contributes beta * (beta + 1)
        beta, alpha, v = 0.1, 0.1, 4
        state = make_state([0, 5], [[0] * v, [3, 2, 1, 1]], alpha=alpha)
        doc = make_doc({1: 2})
        score = doc_cluster_log_score(doc, 0, state, UniformBeta(beta))
        expected = alpha * (beta * (beta + 1)) / ((v * beta) * (v * beta + 1))
        assert math.exp(score) == pytest.approx(expected, rel=1e-12)

    def test_matches_delta_ratio_oracle(self, rng):
        for _ in range(300):
            state, doc, weights, z = random_triple(rng)
            score = doc_cluster_log_score(doc, z, state, weights)
            oracle = oracle_delta_ratio(doc, z, state, weights)
            if oracle == 0.0:
                assert math.exp(score) == 0.0
            else:
                assert math.exp(score) == pytest.approx(oracle, rel=1e-9)

    def test_vectorized_matches_scalar(self, rng):
        for _ in range(100):
            state, doc, weights, _ = random_triple(rng)
            words = np.fromiter(doc.counts.keys(), dtype=np.int64)
            counts = np.fromiter(doc.counts.values(), dtype=np.int64)
            word_rep = np.repeat(words, counts)
            occ = np.concatenate([np.arange(c, dtype=np.float64) for c in counts]) \
                if len(counts) else np.zeros(0)
            vec = cluster_log_scores(state, word_rep, occ, doc.total_len, weights)
            for z in range(state.k_active):
                scalar = doc_cluster_log_score(doc, z, state, weights)
                if math.isinf(scalar):
                    assert vec[z] == scalar
                else:
                    assert vec[z] == pytest.approx(scalar, rel=1e-12)

    def test_nonfinite_score_diagnostics(self):
        state = make_state([2], [[3, 1]], alpha=0.1)
        state.nzw[0, 0] = -5  # corrupted count drives a log argument <= 0
        state.n[0] = -4
        with pytest.raises(NonFiniteScore):
            doc_cluster_log_score(make_doc({0: 1}), 0, state, UniformBeta(0.1))

    def test_zero_pseudocounts_rejected_at_construction(self):
        with pytest.raises(ValueError):
            UniformBeta(0.0)
        with pytest.raises(ValueError):
            EntropyTable(h=np.array([0.0, 0.5]), sum_h=0.5, epsilon=1e-9,
                         normalized=True)


class TestConditionalDistribution:
    def test_symmetric_clusters(self):
        state = make_state([3, 3], [[2, 1], [2, 1]], alpha=0.1)
        p = conditional_distribution(make_doc({0: 1, 1: 1}), state, UniformBeta(0.1))
        assert p.tolist() == [0.5, 0.5]

    def test_sums_to_one(self, rng):
        for _ in range(50):
            state, doc, weights, _ = random_triple(rng)
            p = conditional_distribution(doc, state, weights)
            assert abs(p.sum() - 1.0) <= 1e-12
            assert (p >= 0).all()

    def test_all_zero_probability_raises(self):
        state = make_state([0, 0], [[0, 0], [0, 0]], alpha=0.0, n_docs=1)
        with pytest.raises(NonFiniteScore):
            conditional_distribution(make_doc({0: 1}), state, UniformBeta(0.1))


class TestWordEntropy:
    def test_uniform_counts_exactly_one(self):
        state = make_state([1, 1, 1], [[4, 7], [4, 7], [4, 7]], alpha=0.1)
        table = word_entropy(state, epsilon=1e-9, normalized=True)
        assert table.h.tolist() == [1.0, 1.0]
        assert table.sum_h == 2.0

    def test_degenerate_word_entropy_tends_to_zero(self):
        state = make_state([1, 1], [[6, 0], [0, 3]], alpha=0.1)
        table = word_entropy(state, epsilon=1e-12, normalized=True)
        assert table.h[0] < 1e-9
        assert table.h[1] < 1e-9

    def test_two_cluster_value(self):
        # -(0.75 log2 0.75 + 0.25 log2 0.25), smoothing negligible
        state = make_state([1, 1], [[3], [1]], alpha=0.1)
        table = word_entropy(state, epsilon=1e-12, normalized=True)
        assert table.h[0] == pytest.approx(0.8112781244591328, rel=1e-9)

    def test_unnormalized_scales_by_log_k(self):
        state = make_state([1, 1], [[3], [1]], alpha=0.1)
        norm = word_entropy(state, epsilon=1e-12, normalized=True)
        raw = word_entropy(state, epsilon=1e-12, normalized=False)
        assert raw.h[0] == pytest.approx(norm.h[0] * math.log(2), rel=1e-12)

    def test_bounds_and_monotone_concentration(self):
        # mass concentrating into fewer clusters strictly lowers entropy
        tables = [[4, 4, 4], [6, 4, 2], [8, 2, 2], [10, 1, 1], [12, 0, 0]]
        values = []
        for col in tables:
            state = make_state([1, 1, 1], [[c] for c in col], alpha=0.1)
            h = word_entropy(state, epsilon=1e-9, normalized=True).h[0]
            assert 0.0 <= h <= 1.0
            values.append(h)
        assert values[0] == 1.0
        for lo, hi in zip(values[1:], values):
            assert lo < hi

    def test_single_active_cluster_all_ones(self):
        state = make_state([2], [[5, 0, 1]], alpha=0.1)
        assert word_entropy(state, 1e-9, True).h.tolist() == [1.0, 1.0, 1.0]

    def test_word_absent_everywhere_is_uninformative(self):
        state = make_state([1, 1], [[3, 0], [2, 0]], alpha=0.1)
        assert word_entropy(state, 1e-9, True).h[1] == 1.0


class TestPosteriorPhi:
    def test_empty_cluster_uniform(self):
        state = make_state([0, 1], [[0, 0, 0], [1, 0, 1]], alpha=0.1)
        assert posterior_phi(state, 0, beta=0.5).tolist() == [1 / 3] * 3

    def test_hand_evaluated(self):
        state = make_state([2], [[3, 1]], alpha=0.1)
        phi = posterior_phi(state, 0, beta=0.1)
        assert phi[0] == pytest.approx(3.1 / 4.2, rel=1e-12)
        assert phi[1] == pytest.approx(1.1 / 4.2, rel=1e-12)

    def test_normalization(self, rng):
        for _ in range(20):
            state, _, _, z = random_triple(rng)
            phi = posterior_phi(state, z, beta=0.05)
            assert abs(phi.sum() - 1.0) <= 1e-12
            assert (phi >= 0).all()


class TestTopWords:
    VOCAB = Vocabulary(
        word_to_id={"vote": 0, "game": 1, "rain": 2},
        id_to_word=("vote", "game", "rain"),
        doc_freq=(1, 1, 1),
    )

    def test_single_word_cluster(self):
        state = make_state([1], [[4, 0, 0]], alpha=0.1)
        assert top_words(state, self.VOCAB, 0, 1, beta=0.1)[0][0] == "vote"

    def test_tie_breaks_to_lower_id(self):
        state = make_state([1], [[2, 2, 0]], alpha=0.1)
        ranked = top_words(state, self.VOCAB, 0, 2, beta=0.1)
        assert [w for w, _ in ranked] == ["vote", "game"]

    def test_dominant_word_ranks_first_across_seeds(self):
        # cluster counts drawn from a distribution with one word at mass 0.5
        v = 10
        phi = np.full(v, 0.5 / (v - 1))
        phi[0] = 0.5
        vocab = Vocabulary(
            word_to_id={f"w{i}": i for i in range(v)},
            id_to_word=tuple(f"w{i}" for i in range(v)),
            doc_freq=tuple([1] * v),
        )
        wins = 0
        for seed in range(100):
            counts = np.random.default_rng(seed).multinomial(200, phi)
            state = make_state([1], [counts], alpha=0.1)
            ranked = top_words(state, vocab, 0, 1, beta=0.1)
            wins += ranked[0][0] == "w0"
        assert wins >= 99


class TestModelState:
    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_remove_then_restore_bit_identical(self, seed):
        gen = np.random.default_rng(seed)
        state, doc, _, _ = random_triple(gen)
        d = int(gen.integers(0, state.D)) if state.D else 0
        if state.D == 0:
            return
        z = int(state.assignments[d])
        words = np.fromiter(doc.counts.keys(), dtype=np.int64)
        counts = np.fromiter(doc.counts.values(), dtype=np.int64)
        # simulate the doc's counts being part of cluster z first
        state.nzw[z, words] += counts
        state.n[z] += doc.total_len
        before = state.copy()
        got = state.remove_doc(d, words, counts, doc.total_len)
        assert got == z
        state.add_doc(d, words, counts, doc.total_len, z)
        assert np.array_equal(before.m, state.m)
        assert np.array_equal(before.n, state.n)
        assert np.array_equal(before.nzw, state.nzw)
        assert np.array_equal(before.assignments, state.assignments)
        assert before.members == state.members

    def test_burstiness_gap_strictly_increasing(self):
        # identical totals, cluster 0 holds the word, cluster 1 does not:
        # the score gap must grow with each repetition of the word
        state = make_state([2, 2], [[5, 3], [0, 8]], alpha=0.1)
        beta = UniformBeta(0.1)
        gaps = []
        for r in range(1, 11):
            doc = make_doc({0: r})
            gap = doc_cluster_log_score(doc, 0, state, beta) - \
                doc_cluster_log_score(doc, 1, state, beta)
            gaps.append(gap)
        assert all(b > a for a, b in zip(gaps, gaps[1:]))

    def test_cluster_stats_snapshot(self):
        state = make_state([3, 1], [[4, 0, 2], [0, 1, 0]], alpha=0.1)
        stats = state.cluster_stats(0)
        assert stats.m == 3
        assert stats.n == 6
        assert stats.word_counts == {0: 4, 2: 2}
        assert stats.n == sum(stats.word_counts.values())
        with pytest.raises(InactiveCluster):
            state.cluster_stats(2)

    def test_validate_catches_drift(self):
        state = make_state([2, 1], [[1, 0], [0, 2]], alpha=0.1)
        state.validate()
        state.n[0] += 1
        with pytest.raises(AssertionError):
            state.validate()

    def test_deactivate_requires_empty(self):
        state = make_state([1, 1], [[1, 0], [0, 1]], alpha=0.1)
        with pytest.raises(InactiveCluster):
            state.deactivate_cluster(0)
