"""Lloyd's k-means, δ-k-means and the emulated q-means pipeline.

All three share initialisation, empty-cluster handling, the convergence
test and trace recording; they differ only in how labels and centroids
are produced each iteration.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .emulation import (
    CentroidSet,
    ErrorBudget,
    argmin_labels,
    as_centroids,
    cluster_means,
    noisy_distance_matrix,
    pairwise_sq_distances,
    recover_centroid,
)
from .errors import EmptyCluster, KTooLarge
from .matrixcore import as_matrix

logger = logging.getLogger(__name__)

ALGORITHMS = ("kmeans", "delta_kmeans", "qmeans")
EMPTY_POLICIES = ("reseed", "keep", "fail")
QMEANS_POLICIES = ("argmin", "margin")


@dataclass
class IterationRecord:
    iteration: int
    labels: np.ndarray
    centroids: np.ndarray
    rss: float
    movement: float
    discarded_count: int = 0
    failed_estimates: int = 0
    reseeded: tuple = ()


@dataclass
class ClusteringRun:
    algorithm: str
    k: int
    init: np.ndarray
    records: list = field(default_factory=list)
    terminal: str = "max_iters"

    @property
    def n_iter(self):
        return len(self.records)

    @property
    def converged(self):
        return self.terminal == "converged"

    @property
    def labels(self):
        return self.records[-1].labels if self.records else None

    @property
    def centroids(self):
        return self.records[-1].centroids if self.records else self.init

    def centroids_before(self, t):
        """Centroids that iteration ``t`` assigned against."""
        return self.init if t == 0 else self.records[t - 1].centroids

    def rss_trace(self):
        return np.array([r.rss for r in self.records])


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def kmeanspp_init(V, k, seed=None, n_local_trials=1):
    """k-means++ seeding: pick rows with probability proportional to D^2.

    Args:
        V: data, ``N x d``.
        k: number of centroids.
        seed: int or numpy ``Generator``.
        n_local_trials: with more than one trial, each step draws that many
            D^2-weighted candidates and keeps the one that lowers the total
            potential most (the greedy variant common in toolkits).

    Raises:
        KTooLarge: if ``k`` exceeds the number of rows.
    """
    X = as_matrix(V).data
    n = X.shape[0]
    if k > n:
        raise KTooLarge(f"k={k} exceeds N={n}")
    if k < 1:
        raise ValueError("k must be positive")
    if n_local_trials < 1:
        raise ValueError("n_local_trials must be at least 1")
    rng = _rng(seed)
    chosen = [int(rng.integers(n))]
    d2 = pairwise_sq_distances(X, X[chosen[0]][None, :])[:, 0]
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            cands = rng.choice(n, size=n_local_trials, p=d2 / total)
        else:
            # every remaining row duplicates a chosen one
            free = np.setdiff1d(np.arange(n), chosen)
            cands = [rng.choice(free)]
        best = None
        for idx in cands:
            trial = np.minimum(d2, pairwise_sq_distances(X, X[int(idx)][None, :])[:, 0])
            trial[chosen + [int(idx)]] = 0.0
            if best is None or trial.sum() < best[1].sum():
                best = (int(idx), trial)
        chosen.append(best[0])
        d2 = best[1]
    return CentroidSet(X[chosen].copy())


def greedy_trials(k):
    """Candidate count ``2 + floor(ln k)`` for greedy k-means++."""
    return 2 + int(math.log(k)) if k > 1 else 1


def assign_labels_exact(V, C):
    """Nearest centroid by exact Euclidean distance, lowest index on ties."""
    return np.argmin(pairwise_sq_distances(np.asarray(V), np.asarray(C)), axis=1)


def delta_label_sets(V, C, delta):
    """Boolean ``N x k`` mask of each point's admissible set ``L_delta``."""
    D = pairwise_sq_distances(np.asarray(V), np.asarray(C))
    return (D - D.min(axis=1, keepdims=True)) <= delta


def assign_labels_delta(V, C, delta, seed=None):
    """Pick a label uniformly from each point's δ-admissible set."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    mask = delta_label_sets(V, C, delta)
    rng = _rng(seed)
    counts = mask.sum(axis=1)
    pick = np.floor(rng.random(mask.shape[0]) * counts).astype(np.int64)
    # position of the pick-th True in each row
    rank = np.cumsum(mask, axis=1) - 1
    hit = mask & (rank == pick[:, None])
    return np.argmax(hit, axis=1)


def _bounded_noise(rng, d, radius):
    """Random direction scaled to length ``u * radius``, ``u ~ U[0, 1)``."""
    g = rng.standard_normal(d)
    n = np.linalg.norm(g)
    u = rng.random()
    if n == 0 or radius == 0:
        return np.zeros(d)
    return g / n * (u * radius)


def update_centroids_delta(V, labels, delta, seed=None, k=None):
    """Exact means moved by a random offset of norm strictly below δ/2.

    Raises:
        EmptyCluster: a cluster in ``range(k)`` has no points.
    """
    X = as_matrix(V).data
    labels = np.asarray(labels)
    if k is None:
        k = int(labels.max()) + 1
    means, counts = cluster_means(X, labels, k)
    rng = _rng(seed)
    out = means.copy()
    for j in range(k):
        if counts[j] == 0:
            raise EmptyCluster(j)
        out[j] = means[j] + _bounded_noise(rng, X.shape[1], delta / 2)
    return CentroidSet(out)


def rss(V, C, labels):
    """Residual sum of squares; points labelled ``-1`` are skipped."""
    X = np.asarray(V, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    labels = np.asarray(labels)
    keep = labels >= 0
    diff = X[keep] - C[labels[keep]]
    return float(np.einsum("ij,ij->", diff, diff))


def _reseed_empty(X, C, labels, counts, empty):
    """Give each empty cluster the point farthest from its current centroid."""
    labels = labels.copy()
    counts = counts.copy()
    moved = []
    dist = np.full(X.shape[0], -np.inf)
    keep = labels >= 0
    diff = X[keep] - C[labels[keep]]
    dist[keep] = np.einsum("ij,ij->i", diff, diff)
    for j in empty:
        cand = np.where((labels >= 0) & (counts[np.maximum(labels, 0)] > 1), dist, -np.inf)
        i = int(np.argmax(cand))
        if not np.isfinite(cand[i]):
            raise EmptyCluster(j, f"cannot reseed cluster {j}: no donor point")
        counts[labels[i]] -= 1
        labels[i] = j
        counts[j] = 1
        dist[i] = -np.inf
        moved.append(j)
    return labels, tuple(moved)


def _apply_empty_policy(X, C, labels, k, policy):
    counts = np.bincount(labels[labels >= 0], minlength=k)
    empty = [j for j in range(k) if counts[j] == 0]
    if not empty:
        return labels, (), ()
    if policy == "fail":
        raise EmptyCluster(empty[0])
    if policy == "keep":
        return labels, (), tuple(empty)
    labels, moved = _reseed_empty(X, C, labels, counts, empty)
    logger.debug("reseeded empty clusters %s", moved)
    return labels, moved, ()


def qmeans_assign(X, C, budget, iteration, policy="argmin", rng=None):
    """Steps 1-2: noisy distances then minimum finding.

    Returns:
        ``(labels, failed_count)``; with the ``margin`` policy a point gets
        label ``-1`` unless one estimate beats every other by more than
        ``2 * delta``.
    """
    est, _, failed = noisy_distance_matrix(X, C, budget, iteration, rng)
    labels = argmin_labels(est)
    if policy == "margin" and est.shape[1] > 1:
        part = np.partition(est, 1, axis=1)
        clear = part[:, 0] < part[:, 1] - 2 * budget.delta
        labels = np.where(clear, labels, -1)
    return labels, int(failed.sum())


def qmeans_update(X, labels, budget, iteration, k, keep=(), previous=None, rng=None):
    """Steps 3-4: emulated centroid recovery for every nonempty cluster."""
    means, counts = cluster_means(X, labels, k)
    out = np.empty_like(means)
    norms = np.empty(k)
    for j in range(k):
        if counts[j] == 0:
            if j not in keep:
                raise EmptyCluster(j)
            out[j] = previous[j]
            norms[j] = np.linalg.norm(previous[j])
            continue
        out[j], norms[j] = recover_centroid(means[j], budget, j, iteration, rng)
    return CentroidSet(out, norms)


def qmeans_step(V, C, budget, iteration, policy="argmin", empty_policy="reseed", rng=None):
    """One full q-means iteration from centroids ``C``.

    Returns:
        ``(labels, CentroidSet, info)`` where ``info`` carries failure,
        discard and reseed counts.
    """
    X = as_matrix(V).data
    C = np.asarray(C, dtype=np.float64)
    k = C.shape[0]
    labels, failed = qmeans_assign(X, C, budget, iteration, policy, rng)
    labels, moved, keep = _apply_empty_policy(X, C, labels, k, empty_policy)
    new = qmeans_update(X, labels, budget, iteration, k, keep, C, rng)
    info = {"failed": failed, "discarded": int(np.sum(labels < 0)), "reseeded": moved}
    return labels, new, info


def _exact_update(X, labels, k, keep, previous):
    means, counts = cluster_means(X, labels, k)
    for j in keep:
        means[j] = previous[j]
    return means


def _delta_update(X, labels, k, keep, previous, delta, rng):
    means, counts = cluster_means(X, labels, k)
    out = means.copy()
    for j in range(k):
        if counts[j] == 0:
            out[j] = previous[j]
        else:
            out[j] = means[j] + _bounded_noise(rng, X.shape[1], delta / 2)
    return out


def default_tau(V):
    """Scale-relative convergence threshold ``1e-4 * sqrt(eta)``."""
    return 1e-4 * math.sqrt(as_matrix(V).eta)


def run(
    algorithm,
    V,
    k,
    budget=None,
    init=None,
    max_iters=100,
    tau=None,
    *,
    empty_policy="reseed",
    qmeans_policy="argmin",
    seed=None,
):
    """Iterate assignment and update until centroids stop moving.

    Args:
        algorithm: ``"kmeans"``, ``"delta_kmeans"`` or ``"qmeans"``.
        V: data, ``N x d``.
        k: number of clusters.
        budget: ``ErrorBudget``; δ-k-means reads ``delta`` and
            ``master_seed``, q-means reads all of it. Ignored by k-means.
        init: starting centroids; k-means++ with ``seed`` when omitted.
        max_iters: iteration cap.
        tau: convergence threshold on the mean centroid movement; δ/2 is
            added for the noisy algorithms. Defaults to ``1e-4 sqrt(eta)``.
        empty_policy: ``"reseed"`` (farthest point), ``"keep"`` (previous
            centroid) or ``"fail"``.
        qmeans_policy: ``"argmin"`` or ``"margin"``.
        seed: seed for k-means++ when ``init`` is omitted.

    Returns:
        ClusteringRun with one record per executed iteration.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if empty_policy not in EMPTY_POLICIES:
        raise ValueError(f"unknown empty-cluster policy {empty_policy!r}")
    if qmeans_policy not in QMEANS_POLICIES:
        raise ValueError(f"unknown q-means policy {qmeans_policy!r}")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    M = as_matrix(V)
    X = M.data
    if budget is None:
        budget = ErrorBudget.zero()
    if init is None:
        init = kmeanspp_init(M, k, seed)
    C = as_centroids(init).centroids.copy()
    if C.shape[0] != k:
        raise ValueError(f"init has {C.shape[0]} centroids, expected {k}")
    if tau is None:
        tau = default_tau(M)
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    delta = 0.0 if algorithm == "kmeans" else budget.delta
    threshold = tau + delta / 2
    rng = np.random.default_rng(budget.master_seed)

    out = ClusteringRun(algorithm=algorithm, k=k, init=C.copy())
    for t in range(max_iters):
        failed = 0
        if algorithm == "kmeans":
            labels = assign_labels_exact(X, C)
        elif algorithm == "delta_kmeans":
            labels = assign_labels_delta(X, C, delta, rng)
        else:
            labels, failed = qmeans_assign(X, C, budget, t, qmeans_policy, rng)
        labels, moved, keep = _apply_empty_policy(X, C, labels, k, empty_policy)

        if algorithm == "kmeans":
            new = _exact_update(X, labels, k, keep, C)
        elif algorithm == "delta_kmeans":
            new = _delta_update(X, labels, k, keep, C, delta, rng)
        else:
            new = qmeans_update(X, labels, budget, t, k, keep, C, rng).centroids

        movement = float(np.mean(np.linalg.norm(new - C, axis=1)))
        out.records.append(
            IterationRecord(
                iteration=t,
                labels=labels,
                centroids=new,
                rss=rss(X, new, labels),
                movement=movement,
                discarded_count=int(np.sum(labels < 0)),
                failed_estimates=failed,
                reseeded=moved,
            )
        )
        C = new
        if movement <= threshold:
            out.terminal = "converged"
            break
    return out
