"""Core probabilistic kernels for the Dirichlet multinomial mixture.

The collapsed conditional for a document choosing a cluster factorizes into
a cluster-size prior (m_z + alpha, up to a constant denominator) and a
word-match term: a rising product (n + c_w)(n + c_w + 1)... per word over a
matching product on cluster totals. c_w is either a uniform pseudo-count
beta or a per-word entropy value. All evaluation is in log space; the
z-constant denominator D - 1 + K*alpha is omitted from scores and only
reappears in the standalone prior factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .corpus import Document, Vocabulary
from .errors import InactiveCluster, NonFiniteScore

__all__ = [
    "ClusterStats",
    "ModelState",
    "UniformBeta",
    "EntropyTable",
    "WeightingScheme",
    "prior_cluster_factor",
    "cluster_log_scores",
    "doc_cluster_log_score",
    "conditional_distribution",
    "word_entropy",
    "posterior_phi",
    "top_words",
]


@dataclass(frozen=True)
class ClusterStats:
    """Read-only snapshot of one cluster: document count, token count, and
    sparse per-word token counts."""

    m: int
    n: int
    word_counts: dict[int, int]


@dataclass(frozen=True)
class UniformBeta:
    """Uniform per-word pseudo-count."""

    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")


@dataclass(frozen=True)
class EntropyTable:
    """Per-word pseudo-counts derived from word entropy across clusters.

    h[w] is strictly positive for epsilon > 0 and lies in [0, 1] when
    normalized (division by log of the cluster count).
    """

    h: np.ndarray
    sum_h: float
    epsilon: float
    normalized: bool

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=np.float64))
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if len(self.h) and not self.h.min() > 0:
            raise ValueError("entropy table must be strictly positive")
        if not math.isclose(self.sum_h, float(self.h.sum()), rel_tol=1e-9):
            raise ValueError("sum_h inconsistent with table")


WeightingScheme = Union[UniformBeta, EntropyTable]


def _pseudocounts(weights: WeightingScheme, v: int):
    """Return (per-word pseudo-count lookup, total over the vocabulary)."""
    if isinstance(weights, UniformBeta):
        return weights.beta, v * weights.beta
    if len(weights.h) != v:
        raise ValueError(f"entropy table covers {len(weights.h)} words, state has {v}")
    return weights.h, weights.sum_h


class ModelState:
    """Mutable sufficient statistics: the sole object the sampler writes.

    Clusters live in rows [0, k_active) of fixed-capacity arrays. m[z] is
    the document count, n[z] the token count, nzw[z, w] the per-word token
    count. members[z] mirrors the assignment array so pruning can relabel
    one cluster's documents without scanning the corpus.
    """

    def __init__(self, n_docs: int, vocab_size: int, k_max: int, alpha: float,
                 k_active: int | None = None):
        if k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {k_max}")
        if alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {alpha}")
        self.D = n_docs
        self.V = vocab_size
        self.k_max = k_max
        self.k_active = k_max if k_active is None else k_active
        self.alpha = float(alpha)
        self.m = np.zeros(k_max, dtype=np.int64)
        self.n = np.zeros(k_max, dtype=np.int64)
        self.nzw = np.zeros((k_max, vocab_size), dtype=np.int64)
        self.assignments = np.full(n_docs, -1, dtype=np.int64)
        self.members: list[set[int]] = [set() for _ in range(k_max)]

    def copy(self) -> "ModelState":
        dup = ModelState.__new__(ModelState)
        dup.D, dup.V, dup.k_max = self.D, self.V, self.k_max
        dup.k_active, dup.alpha = self.k_active, self.alpha
        dup.m = self.m.copy()
        dup.n = self.n.copy()
        dup.nzw = self.nzw.copy()
        dup.assignments = self.assignments.copy()
        dup.members = [set(s) for s in self.members]
        return dup

    def add_doc(self, d: int, words: np.ndarray, counts: np.ndarray,
                total: int, z: int) -> None:
        self.m[z] += 1
        self.n[z] += total
        self.nzw[z, words] += counts
        self.assignments[d] = z
        self.members[z].add(d)

    def remove_doc(self, d: int, words: np.ndarray, counts: np.ndarray,
                   total: int) -> int:
        """Detach document d; returns the cluster it was in. assignments[d]
        is set to -1 until the document is re-added."""
        z = int(self.assignments[d])
        self.m[z] -= 1
        self.n[z] -= total
        self.nzw[z, words] -= counts
        self.assignments[d] = -1
        self.members[z].discard(d)
        return z

    def deactivate_cluster(self, z: int) -> None:
        """Remove an emptied cluster and keep indices contiguous by moving
        the last active cluster into its slot. O(m_last)."""
        last = self.k_active - 1
        if self.m[z] != 0 or self.n[z] != 0:
            raise InactiveCluster(f"cluster {z} is not empty")
        if z != last:
            self.m[z] = self.m[last]
            self.n[z] = self.n[last]
            self.nzw[z] = self.nzw[last]
            self.members[z] = self.members[last]
            for d in self.members[z]:
                self.assignments[d] = z
        self.m[last] = 0
        self.n[last] = 0
        self.nzw[last] = 0
        self.members[last] = set()
        self.k_active = last

    def cluster_stats(self, z: int) -> ClusterStats:
        self._check_active(z)
        row = self.nzw[z]
        ids = np.flatnonzero(row)
        return ClusterStats(
            m=int(self.m[z]),
            n=int(self.n[z]),
            word_counts={int(w): int(row[w]) for w in ids},
        )

    def nonempty_count(self) -> int:
        return int(np.count_nonzero(self.m[: self.k_active]))

    def validate(self, require_nonempty: bool = False) -> None:
        """Exact integer consistency checks; raises AssertionError on drift."""
        k = self.k_active
        assert int(self.m[:k].sum()) == self.D, "sum(m) != D"
        assert (self.nzw[:k].sum(axis=1) == self.n[:k]).all(), "n != sum(nzw)"
        assert (self.m[k:] == 0).all() and (self.n[k:] == 0).all()
        assert (self.nzw >= 0).all() and (self.m >= 0).all()
        active = self.assignments[self.assignments >= 0]
        assert (active < k).all(), "assignment outside active range"
        for z in range(k):
            assert len(self.members[z]) == self.m[z], "members index out of sync"
        if require_nonempty:
            assert (self.n[:k] > 0).all(), "active cluster with zero tokens"

    def _check_active(self, z: int) -> None:
        if not 0 <= z < self.k_active:
            raise InactiveCluster(f"cluster {z} not in [0, {self.k_active})")


def prior_cluster_factor(state: ModelState, z: int, excluding_doc: int) -> float:
    """Cluster-size prior (m_excl + alpha) / (D - 1 + K*alpha).

    The membership of excluding_doc is simulated as removed if the state
    still contains it. K is the allotted capacity k_max, held fixed for the
    whole run; it shifts all clusters identically so sampled distributions
    are unaffected.
    """
    state._check_active(z)
    m = int(state.m[z])
    if state.assignments[excluding_doc] == z:
        m -= 1
    return (m + state.alpha) / (state.D - 1 + state.k_max * state.alpha)


def cluster_log_scores(
    state: ModelState,
    word_rep: np.ndarray,
    occ_offset: np.ndarray,
    total: int,
    weights: WeightingScheme,
    clusters: np.ndarray | None = None,
) -> np.ndarray:
    """Unnormalized log conditional over active clusters, vectorized.

    The document's counts must already be excluded from the state. Entries
    are -inf exactly for empty clusters when alpha == 0; any other
    non-finite value signals a broken weighting and raises NonFiniteScore.
    Passing an index array restricts scoring to those clusters.
    """
    if clusters is None:
        m = state.m[: state.k_active]
        nzw = state.nzw[: state.k_active]
        n = state.n[: state.k_active]
    else:
        m = state.m[clusters]
        nzw = state.nzw[clusters]
        n = state.n[clusters]
    cw, ctot = _pseudocounts(weights, state.V)
    if isinstance(weights, UniformBeta):
        add = cw + occ_offset
    else:
        add = cw[word_rep] + occ_offset
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = np.log(m + state.alpha)
        if total:
            scores = scores + np.log(nzw[:, word_rep] + add[None, :]).sum(axis=1)
            scores -= np.log(
                n[:, None] + ctot + np.arange(total, dtype=np.float64)[None, :]
            ).sum(axis=1)
    bad = ~np.isfinite(scores)
    if bad.any() and not ((scores[bad] == -np.inf) & (m[bad] == 0)).all():
        raise NonFiniteScore(
            f"non-finite score for clusters {np.flatnonzero(bad).tolist()}; "
            "check that all pseudo-counts are strictly positive"
        )
    return scores


def doc_cluster_log_score(
    doc: Document,
    z: int,
    state: ModelState,
    weights: WeightingScheme,
) -> float:
    """Scalar log score of one document against one cluster.

    Reference form of the conditional kernel: exp of it equals the
    Dirichlet-normalizer ratio times (m + alpha). The document's counts
    must already be excluded from cluster z.
    """
    state._check_active(z)
    cw, ctot = _pseudocounts(weights, state.V)
    uniform = isinstance(weights, UniformBeta)
    score = -math.inf if state.m[z] == 0 and state.alpha == 0 else \
        math.log(state.m[z] + state.alpha)
    for w, c in doc.counts.items():
        base = state.nzw[z, w] + (cw if uniform else cw[w])
        for j in range(c):
            arg = base + j
            if arg <= 0:
                raise NonFiniteScore(
                    f"word {w}: log argument {arg} <= 0 (pseudo-count "
                    f"{cw if uniform else cw[w]}, count {state.nzw[z, w]})"
                )
            score += math.log(arg)
    for i in range(doc.total_len):
        arg = state.n[z] + ctot + i
        if arg <= 0:
            raise NonFiniteScore(f"cluster total: log argument {arg} <= 0")
        score -= math.log(arg)
    return score


def conditional_distribution(
    doc: Document,
    state: ModelState,
    weights: WeightingScheme,
) -> np.ndarray:
    """Normalized conditional over active clusters (max-subtracted softmax).

    The document's counts must already be excluded from its cluster.
    """
    words = np.fromiter(doc.counts.keys(), dtype=np.int64, count=len(doc.counts))
    counts = np.fromiter(doc.counts.values(), dtype=np.int64, count=len(doc.counts))
    word_rep = np.repeat(words, counts)
    occ = np.concatenate([np.arange(c, dtype=np.float64) for c in counts]) \
        if len(counts) else np.zeros(0, dtype=np.float64)
    scores = cluster_log_scores(state, word_rep, occ, doc.total_len, weights)
    return normalize_log_scores(scores)


def normalize_log_scores(scores: np.ndarray) -> np.ndarray:
    top = scores.max()
    if top == -np.inf:
        raise NonFiniteScore("every active cluster has zero probability")
    p = np.exp(scores - top)
    total = p.sum()
    if not np.isfinite(total) or total <= 0:
        raise NonFiniteScore(f"degenerate normalizer {total}")
    return p / total


def word_entropy(
    state: ModelState,
    epsilon: float = 1e-9,
    normalized: bool = True,
) -> EntropyTable:
    """Entropy of each word's distribution over the active clusters.

    p_k(w) is the epsilon-smoothed share of word w's occurrences in cluster
    k. Words spread evenly across clusters score high; words concentrated
    in one cluster score near zero. With normalized on, values are divided
    by log(k_active) so the table lies in [0, 1]. A word with equal counts
    in every cluster gets the exact maximum; a lone active cluster defines
    the whole table as ones.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    k = state.k_active
    if k < 1:
        raise InactiveCluster("no active clusters")
    if k == 1:
        # degenerate but reachable mid-run; an all-ones table keeps the
        # conditional well-defined and is maximally uninformative
        h = np.ones(state.V, dtype=np.float64)
    else:
        counts = state.nzw[:k].astype(np.float64)
        p = (counts + epsilon) / (counts.sum(axis=0) + k * epsilon)
        h = -(p * np.log(p)).sum(axis=0)
        top = math.log(k)
        # a word with equal counts everywhere is exactly uniform after
        # smoothing; pin it to the exact maximum instead of 1 +/- ulps
        uniform = counts.min(axis=0) == counts.max(axis=0)
        h[uniform] = top
        np.clip(h, None, top, out=h)
        if normalized:
            h = h / top
            h[uniform] = 1.0
    return EntropyTable(h=h, sum_h=float(h.sum()), epsilon=epsilon,
                        normalized=normalized)


def posterior_phi(state: ModelState, z: int, beta: float) -> np.ndarray:
    """Posterior mean word distribution of a cluster: (count + beta) over
    (total + V*beta)."""
    state._check_active(z)
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    row = state.nzw[z].astype(np.float64)
    return (row + beta) / (state.n[z] + state.V * beta)


def top_words(
    state: ModelState,
    vocab: Vocabulary,
    z: int,
    n: int,
    beta: float,
) -> list[tuple[str, float]]:
    """Most representative words of a cluster, highest posterior mass first.

    Ties break toward the lower word id.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    phi = posterior_phi(state, z, beta)
    order = np.lexsort((np.arange(len(phi)), -phi))[:n]
    return [(vocab.id_to_word[w], float(phi[w])) for w in order]
