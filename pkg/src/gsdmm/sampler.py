"""Gibbs sampling drivers: initialization, sweeps, pruning, entropy refresh.

Two run modes share one sweep kernel. The classic sampler starts from a
uniform random assignment and keeps emptied clusters selectable (they get
zero probability automatically when alpha == 0, which the fast path
exploits by not scoring them). The enhanced sampler seeds clusters from
sampled documents, prunes emptied clusters with index compaction, reweights
words by entropy on a fixed refresh schedule, and merges down to a target
cluster count afterwards.

Randomness discipline: one seed feeds two independent generator streams,
stream 0 for initialization and stream 1 for sweeps, so instrumentation
added between phases cannot perturb sampling.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .errors import ConfigError, KMaxExceedsCorpus
from .evaluation import LabeledPartitionPair, accuracy, nmi
from .merge import MergeLog, merge_to_k
from .model import (
    EntropyTable,
    ModelState,
    UniformBeta,
    WeightingScheme,
    cluster_log_scores,
    normalize_log_scores,
    word_entropy,
)

__all__ = [
    "GSDMM",
    "GSDMM_PLUS",
    "RunConfig",
    "SweepRecord",
    "SweepTrace",
    "random_init",
    "adaptive_init",
    "gibbs_sweep",
    "run_gsdmm",
    "run_gsdmm_plus",
]

log = logging.getLogger("gsdmm")

GSDMM = "gsdmm"
GSDMM_PLUS = "gsdmm+"


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = GSDMM
    k_max: int = 500
    k_real: int | None = None
    alpha: float = 0.1
    beta: float = 0.1
    iterations: int = 20
    seed: int = 0
    entropy_refreshes_per_sweep: int = 15
    entropy_epsilon: float = 1e-9
    entropy_normalized: bool = True
    # fixed corpus-order visits by default; shuffling trades determinism of
    # the visit order for nothing at desk scale
    shuffle_each_sweep: bool = False
    validate_every_sweep: bool = False

    def __post_init__(self):
        if self.algorithm not in (GSDMM, GSDMM_PLUS):
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.k_max < 1:
            raise ConfigError(f"k_max must be >= 1, got {self.k_max}")
        if self.k_real is not None and not 1 <= self.k_real <= self.k_max:
            raise ConfigError(
                f"need 1 <= k_real <= k_max, got k_real={self.k_real}, "
                f"k_max={self.k_max}"
            )
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta <= 0:
            raise ConfigError(f"beta must be > 0, got {self.beta}")
        if self.entropy_refreshes_per_sweep < 0:
            raise ConfigError("entropy_refreshes_per_sweep must be >= 0")
        if self.entropy_epsilon <= 0:
            raise ConfigError("entropy_epsilon must be > 0")


@dataclass
class SweepRecord:
    iteration: int
    active_clusters: int
    moved_docs: int
    acc: float | None = None
    nmi: float | None = None


@dataclass
class SweepTrace:
    records: list[SweepRecord] = field(default_factory=list)
    merge_log: MergeLog | None = None
    notes: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def to_csv(self) -> str:
        lines = ["iteration,active_clusters,moved_docs,acc,nmi"]
        for r in self.records:
            acc = "" if r.acc is None else f"{r.acc:.6f}"
            nm = "" if r.nmi is None else f"{r.nmi:.6f}"
            lines.append(f"{r.iteration},{r.active_clusters},{r.moved_docs},{acc},{nm}")
        return "\n".join(lines) + "\n"


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    init_ss, sweep_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(init_ss), np.random.default_rng(sweep_ss)


def _draw(rng: np.random.Generator, p: np.ndarray) -> int:
    """Sample an index from a probability vector; zero-mass entries are
    never selected."""
    cum = np.cumsum(p)
    z = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    z = min(z, len(p) - 1)
    while p[z] == 0.0:  # guards the clamp against a trailing zero-width slot
        z -= 1
    return z


def random_init(corpus: Corpus, cfg: RunConfig, rng: np.random.Generator) -> ModelState:
    """Assign every document to one of k_max clusters uniformly at random."""
    state = ModelState(len(corpus), corpus.vocabulary.size, cfg.k_max, cfg.alpha)
    draws = rng.integers(0, cfg.k_max, size=len(corpus))
    for d, view in enumerate(corpus.token_views):
        words, counts, _, _, total = view
        state.add_doc(d, words, counts, total, int(draws[d]))
    return state


def adaptive_init(corpus: Corpus, cfg: RunConfig, rng: np.random.Generator) -> ModelState:
    """Seed each cluster with one sampled document, then let the remaining
    documents join by their conditional probability.

    Seeds are distinct (sampled without replacement). The state grows as
    documents join, so later documents see the clusters the earlier ones
    built up.
    """
    d_total = len(corpus)
    if cfg.k_max > d_total:
        raise KMaxExceedsCorpus(f"k_max={cfg.k_max} exceeds corpus size {d_total}")
    state = ModelState(d_total, corpus.vocabulary.size, cfg.k_max, cfg.alpha)
    state.D = 0
    views = corpus.token_views
    weights = UniformBeta(cfg.beta)

    seeds = rng.choice(d_total, size=cfg.k_max, replace=False)
    for z, d in enumerate(seeds):
        words, counts, _, _, total = views[d]
        state.add_doc(int(d), words, counts, total, z)
        state.D += 1

    seeded = set(int(d) for d in seeds)
    for d in range(d_total):
        if d in seeded:
            continue
        words, counts, word_rep, occ, total = views[d]
        scores = cluster_log_scores(state, word_rep, occ, total, weights)
        z = _draw(rng, normalize_log_scores(scores))
        state.add_doc(d, words, counts, total, z)
        state.D += 1
    return state


def gibbs_sweep(
    state: ModelState,
    corpus: Corpus,
    weights: WeightingScheme,
    cfg: RunConfig,
    rng: np.random.Generator,
    prune_empty: bool = False,
) -> int:
    """One full pass reseating every document; returns how many moved.

    Per document: detach its counts, prune its cluster if that emptied it
    (compacting indices), refresh the entropy table when the schedule says
    so, then sample a new cluster from the conditional and re-attach. The
    entropy refresh positions are the multiples of ceil(D / refreshes), so
    a sweep refreshes at most cfg.entropy_refreshes_per_sweep times.
    """
    d_total = len(corpus)
    views = corpus.token_views
    entropy_mode = isinstance(weights, EntropyTable)
    if entropy_mode and cfg.entropy_refreshes_per_sweep > 0:
        refresh_step = math.ceil(d_total / cfg.entropy_refreshes_per_sweep)
    else:
        refresh_step = 0
    order = rng.permutation(d_total) if cfg.shuffle_each_sweep else range(d_total)
    fast_skip_empty = state.alpha == 0 and not prune_empty

    moved = 0
    for i, d in enumerate(order):
        words, counts, word_rep, occ, total = views[d]
        z_old = state.remove_doc(d, words, counts, total)
        pruned = False
        if prune_empty and state.n[z_old] == 0:
            state.deactivate_cluster(z_old)
            pruned = True
        if refresh_step and i % refresh_step == 0:
            weights = word_entropy(state, cfg.entropy_epsilon, cfg.entropy_normalized)
        if fast_skip_empty:
            # alpha == 0: emptied clusters can never be re-chosen, so skip
            # scoring them entirely
            live = np.flatnonzero(state.m[: state.k_active])
            sub = cluster_log_scores(state, word_rep, occ, total, weights, clusters=live)
            scores = np.full(state.k_active, -np.inf)
            scores[live] = sub
        else:
            scores = cluster_log_scores(state, word_rep, occ, total, weights)
        z_new = _draw(rng, normalize_log_scores(scores))
        state.add_doc(d, words, counts, total, z_new)
        if pruned or z_new != z_old:
            moved += 1
    return moved


def _record(trace: SweepTrace, corpus: Corpus, state: ModelState,
            iteration: int, active: int, moved: int) -> None:
    rec = SweepRecord(iteration=iteration, active_clusters=active, moved_docs=moved)
    labels = [doc.gold_label for doc in corpus.documents]
    if all(lab is not None for lab in labels) and len(labels):
        pair = LabeledPartitionPair.from_labels(
            _dense_labels(state), labels)
        rec.acc = accuracy(pair)
        rec.nmi = nmi(pair)
    trace.records.append(rec)


def _dense_labels(state: ModelState) -> np.ndarray:
    """Assignments relabeled densely over non-empty clusters, preserving
    cluster-index order."""
    used = np.flatnonzero(state.m[: state.k_active])
    remap = np.full(state.k_active, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return remap[state.assignments]


def run_gsdmm(corpus: Corpus, cfg: RunConfig) -> tuple[np.ndarray, ModelState, SweepTrace]:
    """Classic run: random initialization, uniform-beta sweeps, no pruning.

    Emptied clusters stay selectable (alpha > 0) or are skipped by the
    alpha == 0 fast path. Returns assignments relabeled over non-empty
    clusters, the final state, and the per-sweep trace.
    """
    if cfg.algorithm != GSDMM:
        raise ConfigError(f"run_gsdmm called with algorithm {cfg.algorithm!r}")
    init_rng, sweep_rng = _streams(cfg.seed)
    state = random_init(corpus, cfg, init_rng)
    weights = UniformBeta(cfg.beta)
    trace = SweepTrace()
    for it in range(1, cfg.iterations + 1):
        moved = gibbs_sweep(state, corpus, weights, cfg, sweep_rng, prune_empty=False)
        if cfg.validate_every_sweep:
            state.validate()
        _record(trace, corpus, state, it, state.nonempty_count(), moved)
    return _dense_labels(state), state, trace


def run_gsdmm_plus(corpus: Corpus, cfg: RunConfig) -> tuple[np.ndarray, ModelState, SweepTrace]:
    """Enhanced run: adaptive initialization, entropy-weighted sweeps with
    pruning, then merging down to k_real when one is configured.

    If sampling already ended at or below k_real clusters the merge is
    skipped (and reported in trace.notes when it ended below).
    """
    if cfg.algorithm != GSDMM_PLUS:
        raise ConfigError(f"run_gsdmm_plus called with algorithm {cfg.algorithm!r}")
    init_rng, sweep_rng = _streams(cfg.seed)
    state = adaptive_init(corpus, cfg, init_rng)
    weights = word_entropy(state, cfg.entropy_epsilon, cfg.entropy_normalized)
    trace = SweepTrace()
    for it in range(1, cfg.iterations + 1):
        moved = gibbs_sweep(state, corpus, weights, cfg, sweep_rng, prune_empty=True)
        if cfg.validate_every_sweep:
            state.validate(require_nonempty=True)
        _record(trace, corpus, state, it, state.k_active, moved)
    if cfg.k_real is not None:
        if cfg.k_real > state.k_active:
            msg = (f"k_real={cfg.k_real} exceeds {state.k_active} active "
                   f"clusters; merge skipped")
            log.warning(msg)
            trace.notes.append(msg)
        elif cfg.k_real < state.k_active:
            trace.merge_log = merge_to_k(state, cfg.k_real)
    return state.assignments.copy(), state, trace
