"""Clustering quality metrics: optimal-matching accuracy and NMI.

Accuracy maximizes the matched-document count over one-to-one maps between
predicted clusters and gold labels (Hungarian assignment on the zero-padded
confusion matrix). NMI is mutual information normalized by the geometric
mean of the two partition entropies, natural logs, with 0*log(0) taken as 0.
Both are invariant under relabeling either side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import LengthMismatch

__all__ = [
    "LabeledPartitionPair",
    "EvalReport",
    "confusion_matrix",
    "accuracy",
    "nmi",
    "evaluate",
]


@dataclass(frozen=True)
class LabeledPartitionPair:
    """Aligned predicted/gold labelings with dense ids in [0, K)."""

    pred: np.ndarray
    gold: np.ndarray

    def __post_init__(self):
        pred = np.asarray(self.pred, dtype=np.int64)
        gold = np.asarray(self.gold, dtype=np.int64)
        object.__setattr__(self, "pred", pred)
        object.__setattr__(self, "gold", gold)
        if len(pred) != len(gold):
            raise LengthMismatch(
                f"pred has {len(pred)} entries, gold has {len(gold)}"
            )
        if len(pred) == 0:
            raise LengthMismatch("empty partitions")
        for name, arr in (("pred", pred), ("gold", gold)):
            if arr.min() < 0 or not np.array_equal(
                np.unique(arr), np.arange(arr.max() + 1)
            ):
                raise ValueError(f"{name} ids must be dense in [0, K)")

    @property
    def D(self) -> int:
        return len(self.pred)

    @property
    def k_pred(self) -> int:
        return int(self.pred.max()) + 1

    @property
    def k_gold(self) -> int:
        return int(self.gold.max()) + 1

    @classmethod
    def from_labels(cls, pred, gold) -> "LabeledPartitionPair":
        """Densify arbitrary hashable labels by first appearance."""
        return cls(_densify(pred), _densify(gold))


def _densify(labels) -> np.ndarray:
    mapping: dict = {}
    out = np.empty(len(labels), dtype=np.int64)
    for i, lab in enumerate(labels):
        out[i] = mapping.setdefault(lab, len(mapping))
    return out


@dataclass(frozen=True)
class EvalReport:
    acc: float
    nmi: float
    k_pred: int
    k_gold: int
    confusion: np.ndarray

    def to_json_dict(self) -> dict:
        return {"acc": self.acc, "nmi": self.nmi,
                "k_pred": self.k_pred, "k_gold": self.k_gold}


def confusion_matrix(pair: LabeledPartitionPair) -> np.ndarray:
    """Dense k_pred x k_gold count matrix."""
    mat = np.zeros((pair.k_pred, pair.k_gold), dtype=np.int64)
    np.add.at(mat, (pair.pred, pair.gold), 1)
    return mat


def accuracy(pair: LabeledPartitionPair) -> float:
    """Fraction of documents matched under the best one-to-one cluster to
    label mapping. Extra clusters on either side pad with zero rows or
    columns and contribute nothing."""
    mat = confusion_matrix(pair)
    size = max(mat.shape)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[: mat.shape[0], : mat.shape[1]] = mat
    rows, cols = linear_sum_assignment(padded, maximize=True)
    return float(padded[rows, cols].sum()) / pair.D


def nmi(pair: LabeledPartitionPair) -> float:
    """Mutual information over the geometric mean of marginal entropies.

    Two single-cluster partitions are identical, hence 1.0; one degenerate
    side against a non-degenerate one carries no information, hence 0.0.
    """
    counts = confusion_matrix(pair)
    if counts.shape[0] == counts.shape[1] and \
            np.count_nonzero(counts) == counts.shape[0]:
        return 1.0  # identical partitions up to relabeling
    mat = counts.astype(np.float64) / pair.D
    pi = mat.sum(axis=1)
    pj = mat.sum(axis=0)
    h_pred = _entropy(pi)
    h_gold = _entropy(pj)
    if h_pred == 0.0 and h_gold == 0.0:
        return 1.0
    if h_pred == 0.0 or h_gold == 0.0:
        return 0.0
    nz = mat > 0
    mi = float((mat[nz] * np.log(mat[nz] / np.outer(pi, pj)[nz])).sum())
    return min(1.0, max(0.0, mi / np.sqrt(h_pred * h_gold)))


def _entropy(p: np.ndarray) -> float:
    nz = p > 0
    return float(-(p[nz] * np.log(p[nz])).sum())


def evaluate(pair: LabeledPartitionPair) -> EvalReport:
    return EvalReport(
        acc=accuracy(pair),
        nmi=nmi(pair),
        k_pred=pair.k_pred,
        k_gold=pair.k_gold,
        confusion=confusion_matrix(pair),
    )
