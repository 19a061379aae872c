"""Error-contract emulation of the q-means quantum subroutines.

Nothing here simulates a Hilbert space. Each subroutine returns what its
guarantee allows: the exact classical quantity plus a perturbation that
never exceeds the advertised error.

* distance estimation perturbs the swap-test probability
  ``p = (1 - <v/|v|, c/|c|>) / 2`` and maps it back through the norms;
* minimum finding is an exact argmin with lowest-index ties;
* centroid recovery combines an exact cluster mean with a tomography-style
  direction error and a relative norm error.

Noise is drawn from generators keyed by ``(master_seed, context)``, so the
same estimate requested twice gives the same answer. That deterministic
keying stands in for consistent phase estimation.
"""

import hashlib
import math
import struct
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import EmptyCluster, EmptyInput, NonFiniteInput, ZeroVector
from .matrixcore import as_matrix

NOISE_MODES = ("adversarial", "uniform", "zero")
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ErrorBudget:
    """Precision knobs of one q-means run.

    Attributes:
        delta: δ of δ-k-means; also widens the convergence threshold.
        eps1: additive error of each squared-distance estimate.
        eps2: state error of the matrix multiplication, folded into the
            centroid direction error.
        eps3: relative error of the centroid norm estimate.
        eps4: l2 error of the tomography unit vector.
        capital_delta: each distance estimate fails with probability
            ``2 * capital_delta``.
        noise_mode: ``"adversarial"`` (errors sit on their bound),
            ``"uniform"`` or ``"zero"``.
        consistent: key noise by context so repeated estimates agree.
        master_seed: 64-bit seed for every noise stream.
    """

    delta: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0
    eps3: float = 0.0
    eps4: float = 0.0
    capital_delta: float = 0.0
    noise_mode: str = "uniform"
    consistent: bool = True
    master_seed: int = 0

    def __post_init__(self):
        for name in ("delta", "eps1", "eps2", "eps3", "eps4"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not 0 <= self.capital_delta < 0.5:
            raise ValueError("capital_delta must lie in [0, 0.5)")
        if self.noise_mode not in NOISE_MODES:
            raise ValueError(f"noise_mode must be one of {NOISE_MODES}")

    @classmethod
    def zero(cls, master_seed=0):
        return cls(noise_mode="zero", master_seed=master_seed)

    @classmethod
    def derive_default(cls, delta, eta, d, **overrides):
        """Budget under which q-means stays consistent with δ-k-means.

        ``eps1 = δ/2``, ``eps3 = eps4 = δ/(4 sqrt(eta))`` and
        ``eps2 = eps4^2 / (10 d ln d)``; ``ln d`` is floored at ``ln 2``.
        """
        eps1 = delta / 2
        eps34 = delta / (4 * math.sqrt(eta))
        eps2 = eps34**2 / (10 * d * math.log(max(d, 2)))
        fields = dict(delta=delta, eps1=eps1, eps2=eps2, eps3=eps34, eps4=eps34)
        fields.update(overrides)
        return cls(**fields)

    @property
    def centroid_error(self):
        """Per-unit-norm bound on recovered-centroid error."""
        return self.eps3 + self.eps4 + self.eps2

    def with_seed(self, seed):
        return replace(self, master_seed=seed)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class NoisyEstimate:
    value: float
    true_value: float
    failed: bool = False


@dataclass(frozen=True, eq=False)
class CentroidSet:
    """``k x d`` centroid matrix plus the norms the producer reported."""

    centroids: np.ndarray
    reported_norms: np.ndarray = None

    def __post_init__(self):
        C = np.array(self.centroids, dtype=np.float64, copy=True)
        if C.ndim == 1:
            C = C.reshape(-1, 1)
        if np.isnan(C).any():
            raise NonFiniteInput("centroids contain NaN")
        object.__setattr__(self, "centroids", C)
        norms = self.reported_norms
        if norms is None:
            norms = np.linalg.norm(C, axis=1)
        object.__setattr__(self, "reported_norms", np.asarray(norms, dtype=np.float64))

    @property
    def k(self):
        return self.centroids.shape[0]

    @property
    def d(self):
        return self.centroids.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.centroids if dtype is None else self.centroids.astype(dtype)


def as_centroids(C):
    return C if isinstance(C, CentroidSet) else CentroidSet(np.asarray(C, dtype=np.float64))


# --- noise streams -----------------------------------------------------------


def keyed_rng(seed, context):
    """A numpy ``Generator`` that is a pure function of ``(seed, context)``."""
    key = (int(seed) & _SEED_MASK).to_bytes(8, "little")
    digest = hashlib.blake2b(bytes(context), digest_size=16, key=key).digest()
    return np.random.default_rng(int.from_bytes(digest, "little"))


def context_bytes(tag, *ints):
    return tag.encode() + struct.pack(f"<{len(ints)}q", *ints)


def _signed(u, bound, mode):
    # u in [0, 1): map to an offset in [-bound, bound]
    if mode == "zero" or bound == 0:
        return np.zeros_like(u)
    if mode == "adversarial":
        return np.where(u < 0.5, bound, -bound)
    return (2.0 * u - 1.0) * bound


def consistent_noise(seed, context, bound, mode):
    """Deterministic offset with ``|offset| <= bound``.

    ``adversarial`` returns ``±bound``, ``uniform`` a value in
    ``[-bound, bound)``, ``zero`` returns 0.
    """
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    if mode not in NOISE_MODES:
        raise ValueError(f"mode must be one of {NOISE_MODES}")
    u = keyed_rng(seed, context).random()
    return float(_signed(np.float64(u), bound, mode))


def _uniforms(budget, context, shape, rng):
    if budget.consistent:
        return keyed_rng(budget.master_seed, context).random(shape)
    if rng is None:
        rng = np.random.default_rng()
    return rng.random(shape)


# --- distance estimation -------------------------------------------------------


def pairwise_sq_distances(V, C):
    """Exact ``N x k`` squared Euclidean distances, one centroid at a time."""
    V = np.asarray(V, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    out = np.empty((V.shape[0], C.shape[0]))
    for j in range(C.shape[0]):
        diff = V - C[j]
        out[:, j] = np.einsum("ij,ij->i", diff, diff)
    return out


def _perturb(true, nv, nc, dots, draws, budget):
    """Apply the swap-test error path to arrays of exact distances.

    ``draws[..., 0]`` sets the estimation offset, ``draws[..., 1]`` decides
    failure and ``draws[..., 2]`` places a failed estimate.
    """
    scale = nv * nc
    if np.any(scale == 0):
        raise ZeroVector("distance estimation needs nonzero vectors")
    p = np.clip((1.0 - dots / scale) / 2.0, 0.0, 1.0)
    offset = _signed(draws[..., 0], budget.eps1, budget.noise_mode)
    p_est = np.clip(p + offset / (4.0 * scale), 0.0, 1.0)
    value = true + 4.0 * scale * (p_est - p)
    # rounding in the round trip through p must not leak past the bound
    eps = budget.eps1
    hi = true + eps
    hi = np.where(hi - true > eps, np.nextafter(hi, -np.inf), hi)
    lo = true - eps
    lo = np.where(true - lo > eps, np.nextafter(lo, np.inf), lo)
    # a swap-test estimate is never negative
    value = np.maximum(np.clip(value, lo, hi), 0.0)
    failed = np.zeros(true.shape, dtype=bool)
    if budget.capital_delta > 0:
        failed = draws[..., 1] < 2 * budget.capital_delta
        cap = (nv + nc) ** 2
        junk = np.clip(true + (2.0 * draws[..., 2] - 1.0) * cap, 0.0, cap)
        value = np.where(failed, junk, value)
    return value, failed


def noisy_sq_distance(v, c, budget, context, rng=None):
    """Emulated estimate of ``||v - c||^2`` within ``budget.eps1``."""
    v = np.asarray(v, dtype=np.float64).ravel()
    c = np.asarray(c, dtype=np.float64).ravel()
    nv, nc = np.linalg.norm(v), np.linalg.norm(c)
    if nv == 0 or nc == 0:
        raise ZeroVector("distance estimation needs nonzero vectors")
    diff = v - c
    true = np.array([diff @ diff])
    draws = _uniforms(budget, context, (1, 3), rng)
    value, failed = _perturb(true, np.array([nv]), np.array([nc]), np.array([v @ c]), draws, budget)
    return NoisyEstimate(value=float(value[0]), true_value=float(true[0]), failed=bool(failed[0]))


def noisy_distance_matrix(V, C, budget, iteration=0, rng=None):
    """All ``N x k`` emulated squared distances for one iteration.

    Returns:
        ``(estimates, true_values, failed)``, each of shape ``(N, k)``.
    """
    V = np.asarray(V, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    true = pairwise_sq_distances(V, C)
    nv = np.linalg.norm(V, axis=1)[:, None]
    nc = np.linalg.norm(C, axis=1)[None, :]
    dots = V @ C.T
    draws = _uniforms(budget, context_bytes("dist", iteration), true.shape + (3,), rng)
    value, failed = _perturb(true, nv, nc, dots, draws, budget)
    return value, true, failed


def argmin_label(estimates):
    """Index of the smallest estimate; ties go to the lowest index."""
    a = np.asarray(estimates, dtype=np.float64)
    if a.size == 0:
        raise EmptyInput("no estimates")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput("estimates must be finite")
    return int(np.argmin(a))


def argmin_labels(estimates):
    """Row-wise ``argmin_label`` over an ``N x k`` matrix."""
    a = np.asarray(estimates, dtype=np.float64)
    if a.shape[-1] == 0:
        raise EmptyInput("no estimates")
    return np.argmin(a, axis=-1)


# --- centroid recovery ---------------------------------------------------------


def characteristic_vectors(labels, k):
    """``k x N`` matrix whose row ``j`` is the l1-normalised indicator of cluster ``j``."""
    labels = np.asarray(labels)
    chi = np.zeros((k, labels.size))
    for j in range(k):
        members = labels == j
        n = members.sum()
        if n:
            chi[j, members] = 1.0 / n
    return chi


def cluster_means(V, labels, k):
    """Exact cluster means and sizes; rows of empty clusters are zero.

    Points labelled ``-1`` are ignored.
    """
    V = np.asarray(V, dtype=np.float64)
    labels = np.asarray(labels)
    keep = labels >= 0
    counts = np.bincount(labels[keep], minlength=k)[:k]
    sums = np.zeros((k, V.shape[1]))
    np.add.at(sums, labels[keep], V[keep])
    means = np.zeros_like(sums)
    nz = counts > 0
    means[nz] = sums[nz] / counts[nz, None]
    return means, counts


def _rotate_towards(unit, gen, chord):
    """Unit vector at Euclidean distance ``chord`` from ``unit``."""
    d = unit.size
    if chord == 0 or d < 2:
        return unit
    w = gen.standard_normal(d)
    w -= (w @ unit) * unit
    nw = np.linalg.norm(w)
    if nw == 0:
        return unit
    w /= nw
    theta = 2.0 * math.asin(min(chord, 2.0) / 2.0)
    return math.cos(theta) * unit + math.sin(theta) * w


def recover_centroid(mean, budget, cluster, iteration=0, rng=None):
    """Noisy reconstruction of one centroid from its exact mean.

    Returns:
        ``(centroid, reported_norm)``.
    """
    m = float(np.linalg.norm(mean))
    if m == 0:
        return mean.copy(), 0.0
    if budget.consistent:
        gen = keyed_rng(budget.master_seed, context_bytes("centroid", iteration, cluster))
    else:
        gen = rng if rng is not None else np.random.default_rng()
    u_dir, u_extra, u_norm = gen.random(3)
    mode = budget.noise_mode
    if mode == "zero":
        chord = 0.0
    elif mode == "adversarial":
        chord = budget.eps4 + budget.eps2
    else:
        chord = u_dir * budget.eps4 + u_extra * budget.eps2
    unit = mean / m
    unit_est = _rotate_towards(unit, gen, chord) if chord > 0 else unit
    r = float(_signed(np.float64(u_norm), budget.eps3, mode))
    norm_est = m * (1.0 + r)
    # written as mean + error so a noiseless budget returns the mean bit for bit
    centroid = mean + m * (unit_est - unit) + (norm_est - m) * unit_est
    return centroid, norm_est


def recover_centroids(V, labels, budget, iteration=0, k=None, rng=None):
    """Emulate matrix multiplication, norm estimation and tomography.

    For each cluster ``j`` the exact centroid is ``V^T chi_j``; the output
    differs from it by at most ``||V^T chi_j|| (eps3 + eps4 + eps2)``,
    which is below ``sqrt(eta) (eps3 + eps4 + eps2)``.

    Raises:
        EmptyCluster: some cluster ``j < k`` has no points.
    """
    M = as_matrix(V)
    labels = np.asarray(labels)
    if k is None:
        k = int(labels.max()) + 1
    means, counts = cluster_means(M.data, labels, k)
    out = np.empty_like(means)
    norms = np.empty(k)
    for j in range(k):
        if counts[j] == 0:
            raise EmptyCluster(j)
        out[j], norms[j] = recover_centroid(means[j], budget, j, iteration, rng)
    return CentroidSet(out, norms)


# --- cluster sampling ----------------------------------------------------------


def sample_cluster_sequence(cluster_sizes, rng):
    """Draw cluster indices ``j`` with probability ``|C_j| / N`` until all are seen."""
    sizes = np.asarray(cluster_sizes, dtype=np.int64)
    if sizes.size == 0:
        raise EmptyInput("no clusters")
    if np.any(sizes < 1):
        raise EmptyCluster(int(np.flatnonzero(sizes < 1)[0]))
    probs = sizes / sizes.sum()
    seen = np.zeros(sizes.size, dtype=bool)
    seq = []
    while not seen.all():
        j = int(rng.choice(sizes.size, p=probs))
        seq.append(j)
        seen[j] = True
    return seq


def expected_collection_bound(cluster_sizes):
    """Upper bound ``(N / min_j |C_j|) * H_k`` on the expected sequence length."""
    sizes = np.asarray(cluster_sizes, dtype=np.float64)
    k = sizes.size
    harmonic = sum(1.0 / i for i in range(1, k + 1))
    return float(sizes.sum() / sizes.min() * harmonic)
