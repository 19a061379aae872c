"""Clustering quality measures computed from a contingency table.

Conventions for degenerate labelings follow the common toolkit ones:
homogeneity is 1 when there is a single class, completeness is 1 with a
single cluster, AMI and ARI are 1 when both sides are a single block.
When the margins force a unique mutual information, AMI is 1 for
identical partitions and 0 otherwise.
AMI uses the ``max(H(C), H(K))`` normaliser.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import gammaln

from .emulation import as_centroids, pairwise_sq_distances
from .errors import LengthMismatch, ShapeMismatch


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Counts of ``(predicted cluster, true class)`` pairs."""

    counts: np.ndarray

    @classmethod
    def from_labels(cls, pred, true):
        pred = np.asarray(pred).ravel()
        true = np.asarray(true).ravel()
        if pred.size != true.size:
            raise LengthMismatch(f"{pred.size} predicted labels vs {true.size} true labels")
        _, p_idx = np.unique(pred, return_inverse=True)
        _, t_idx = np.unique(true, return_inverse=True)
        counts = np.zeros((p_idx.max(initial=-1) + 1, t_idx.max(initial=-1) + 1), dtype=np.int64)
        np.add.at(counts, (p_idx, t_idx), 1)
        return cls(counts)

    @property
    def n(self):
        return int(self.counts.sum())

    @property
    def cluster_sizes(self):
        return self.counts.sum(axis=1)

    @property
    def class_sizes(self):
        return self.counts.sum(axis=0)


def accuracy(pred_labels, true_labels):
    """Best fraction correct over one-to-one cluster-to-class mappings."""
    table = ContingencyTable.from_labels(pred_labels, true_labels)
    if table.n == 0:
        return 1.0
    rows, cols = linear_sum_assignment(table.counts, maximize=True)
    return float(table.counts[rows, cols].sum() / table.n)


def _entropy(sizes):
    n = sizes.sum()
    p = sizes[sizes > 0] / n
    return float(-np.sum(p * np.log(p)))


def _mutual_info(counts):
    n = counts.sum()
    a = counts.sum(axis=1, keepdims=True)
    b = counts.sum(axis=0, keepdims=True)
    nz = counts > 0
    nij = counts[nz].astype(np.float64)
    outer = (a @ b)[nz].astype(np.float64)
    return float(np.sum(nij / n * (np.log(nij * n) - np.log(outer))))


def expected_mutual_info(counts):
    """Expected mutual information under the hypergeometric permutation model."""
    n = int(counts.sum())
    a = counts.sum(axis=1).astype(np.int64)
    b = counts.sum(axis=0).astype(np.int64)
    emi = 0.0
    lg_n = gammaln(n + 1)
    for ai in a:
        for bj in b:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1, dtype=np.float64)
            term1 = nij / n * (np.log(nij * n) - np.log(float(ai) * float(bj)))
            log_p = (
                gammaln(ai + 1) + gammaln(bj + 1) + gammaln(n - ai + 1) + gammaln(n - bj + 1)
                - lg_n - gammaln(nij + 1) - gammaln(ai - nij + 1) - gammaln(bj - nij + 1)
                - gammaln(n - ai - bj + nij + 1)
            )
            emi += float(np.sum(term1 * np.exp(log_p)))
    return emi


def _comb2(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2


def adjusted_rand_index(table):
    c = table.counts
    n = table.n
    sum_comb = _comb2(c).sum()
    sum_a = _comb2(table.cluster_sizes).sum()
    sum_b = _comb2(table.class_sizes).sum()
    total = _comb2(n)
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:
        return 1.0
    return float((sum_comb - expected) / (max_index - expected))


@dataclass(frozen=True)
class InfoMetrics:
    homogeneity: float
    completeness: float
    v_measure: float
    ami: float
    ari: float
    degenerate: bool = False

    def as_dict(self):
        return {
            "HOM": self.homogeneity,
            "COMP": self.completeness,
            "V-M": self.v_measure,
            "AMI": self.ami,
            "ARI": self.ari,
        }


def _is_permutation(c):
    nz = c > 0
    return c.shape[0] == c.shape[1] and bool(np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1))


def info_metrics(pred_labels, true_labels):
    """Homogeneity, completeness, V-measure, AMI and ARI in one pass."""
    table = ContingencyTable.from_labels(pred_labels, true_labels)
    c = table.counts
    h_class = _entropy(table.class_sizes)
    h_clust = _entropy(table.cluster_sizes)
    mi = _mutual_info(c) if table.n else 0.0
    degenerate = c.shape[0] <= 1 or c.shape[1] <= 1

    hom = 1.0 if h_class == 0 else mi / h_class
    comp = 1.0 if h_clust == 0 else mi / h_clust
    vm = 0.0 if hom + comp == 0 else 2 * hom * comp / (hom + comp)

    if c.shape[0] == c.shape[1] == 1 or table.n == 0:
        ami = 1.0
    else:
        emi = expected_mutual_info(c)
        denom = max(h_class, h_clust) - emi
        tiny = np.finfo(np.float64).eps
        if abs(denom) <= 64 * tiny * max(1.0, emi):
            # every table with these margins has the same MI; score agreement
            ami = 1.0 if _is_permutation(c) else 0.0
        else:
            ami = (mi - emi) / denom

    return InfoMetrics(
        homogeneity=float(hom),
        completeness=float(comp),
        v_measure=float(vm),
        ami=float(ami),
        ari=adjusted_rand_index(table),
        degenerate=degenerate,
    )


def rmsec(C_ref, C_test):
    """Root-mean-square coordinate error after optimally matching centroids.

    Rows of ``C_test`` are matched to rows of ``C_ref`` by a minimum-cost
    assignment on squared distance; the error is averaged over ``k * d``
    coordinates.
    """
    A = as_centroids(C_ref).centroids
    B = as_centroids(C_test).centroids
    if A.shape != B.shape:
        raise ShapeMismatch(f"centroid shapes differ: {A.shape} vs {B.shape}")
    cost = pairwise_sq_distances(A, B)
    rows, cols = linear_sum_assignment(cost)
    return float(np.sqrt(cost[rows, cols].sum() / A.size))


def all_metrics(pred_labels, true_labels):
    """ACC plus the five information metrics, keyed like the result tables."""
    out = {"ACC": accuracy(pred_labels, true_labels)}
    out.update(info_metrics(pred_labels, true_labels).as_dict())
    return out
