"""Well-clusterable datasets: parameters, checks, generator and claims.

A dataset is well-clusterable with parameters ``(xi, beta, lam, eta)``
when its centroids are pairwise at least ``xi`` apart, at least
``lam * N`` points sit within ``beta`` of their nearest centroid, and

    4 sqrt(eta) sqrt(lam beta^2 + (1 - lam) 4 eta) <= xi^2 - 2 sqrt(eta) beta.

The two sides of that inequality bound the admissible δ for δ-k-means.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .emulation import CentroidSet, as_centroids, pairwise_sq_distances
from .errors import EmptyWindow, InfeasibleSeparation, KTooLarge
from .matrixcore import DataMatrix, as_matrix, frobenius_ratio, low_rank_approx, min_norm_scale, svd


@dataclass(frozen=True)
class WellClusterableParams:
    xi: float
    beta: float
    lam: float
    eta: float
    k: int

    def __post_init__(self):
        if self.xi <= 0 or self.beta < 0 or self.eta <= 0:
            raise ValueError("xi and eta must be positive, beta nonnegative")
        if not 0 <= self.lam <= 1:
            raise ValueError("lam must lie in [0, 1]")

    @property
    def epsilon_prime(self):
        """``sqrt(lam beta^2 + (1 - lam) 4 eta)``, the relative rank-k residual bound."""
        return math.sqrt(self.lam * self.beta**2 + (1 - self.lam) * 4 * self.eta)

    @property
    def window_lo(self):
        return 4 * math.sqrt(self.eta) * self.epsilon_prime

    @property
    def window_hi(self):
        return self.xi**2 - 2 * math.sqrt(self.eta) * self.beta

    @property
    def separated_enough(self):
        # lo == hi leaves no strictly admissible delta
        return self.window_lo < self.window_hi


def delta_window(p):
    """Open interval of δ for which δ-k-means provably labels most points right.

    Raises:
        EmptyWindow: when ``lo >= hi``.
    """
    lo, hi = p.window_lo, p.window_hi
    if lo >= hi:
        raise EmptyWindow(f"delta window is empty: lo={lo:.6g} >= hi={hi:.6g}")
    return lo, hi


@dataclass
class WellClusterableReport:
    min_centroid_distance: float
    max_centroid_distance: float
    xi: float
    proximity_fraction: float
    lam: float
    condition_lhs: float
    condition_rhs: float
    separation_ok: bool
    proximity_ok: bool
    condition_ok: bool
    upper_bound_ok: bool

    @property
    def verdict(self):
        return self.separation_ok and self.proximity_ok and self.condition_ok


def _pairwise_centroid_distances(C):
    k = C.shape[0]
    if k < 2:
        return np.array([np.inf])
    D = np.sqrt(pairwise_sq_distances(C, C))
    return D[np.triu_indices(k, 1)]


def nearest_centroid_distances(V, C):
    D = pairwise_sq_distances(np.asarray(V), np.asarray(C))
    return np.sqrt(D.min(axis=1))


def check_well_clusterable(V, C, p):
    """Evaluate the three defining conditions for ``(V, C)`` under ``p``.

    Also reports whether every centroid pair is within ``2 sqrt(eta)``,
    the upper bound used when separating points from foreign centroids.
    """
    M = as_matrix(V)
    Cm = as_centroids(C).centroids
    dists = _pairwise_centroid_distances(Cm)
    near = nearest_centroid_distances(M.data, Cm)
    frac = float(np.mean(near <= p.beta * (1 + 1e-12)))
    lhs, rhs = p.window_lo, p.window_hi
    max_d = float(np.max(dists)) if Cm.shape[0] > 1 else 0.0
    return WellClusterableReport(
        min_centroid_distance=float(np.min(dists)),
        max_centroid_distance=max_d,
        xi=p.xi,
        proximity_fraction=frac,
        lam=p.lam,
        condition_lhs=lhs,
        condition_rhs=rhs,
        separation_ok=bool(np.min(dists) >= p.xi * (1 - 1e-12)),
        proximity_ok=frac >= p.lam - 1e-12,
        condition_ok=lhs < rhs,
        upper_bound_ok=max_d <= 2 * math.sqrt(p.eta) * (1 + 1e-12),
    )


def fit_params(V, C, quantiles=(0.9, 0.95, 0.99, 1.0)):
    """Measure ``(xi, beta, lam, eta)`` for a dataset and its centroids.

    ``xi`` is the smallest centroid distance and ``eta`` the largest
    squared row norm. Each quantile of the point-to-nearest-centroid
    distance is a candidate ``beta`` (with ``lam`` the fraction it
    covers); the candidate with the widest δ window wins.
    """
    M = as_matrix(V)
    Cm = as_centroids(C).centroids
    xi = float(np.min(_pairwise_centroid_distances(Cm)))
    if not np.isfinite(xi):
        # a single centroid is trivially separated; use the data diameter scale
        xi = 2 * math.sqrt(M.eta)
    near = nearest_centroid_distances(M.data, Cm)
    best = None
    for q in quantiles:
        beta = float(np.quantile(near, q))
        lam = float(np.mean(near <= beta))
        p = WellClusterableParams(xi=xi, beta=beta, lam=lam, eta=M.eta, k=Cm.shape[0])
        margin = p.window_hi - p.window_lo
        if best is None or margin > best[0]:
            best = (margin, p)
    return best[1]


@dataclass
class GeneratedDataset:
    matrix: DataMatrix
    labels: np.ndarray
    centroids: CentroidSet
    params: WellClusterableParams
    scale: float = 1.0
    raw_centers: np.ndarray = field(default=None, repr=False)


def _place_centers(k, d, separation, radius, rng, attempts=200):
    if k == 1:
        u = rng.standard_normal(d)
        return radius * u / np.linalg.norm(u)
    if k <= d:
        # random orthonormal frame: pairwise distance is exactly radius * sqrt(2)
        Q, R = np.linalg.qr(rng.standard_normal((d, k)))
        Q = Q * np.sign(np.diag(R))
        return radius * Q.T
    for _ in range(attempts):
        U = rng.standard_normal((k, d))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        C = radius * U
        if np.min(_pairwise_centroid_distances(C)) >= separation:
            return C
    raise InfeasibleSeparation(
        f"could not place {k} centers {separation} apart in {d} dimensions after {attempts} attempts"
    )


def generate_well_clusterable(k, d, N, sigma, separation, seed=None, radius=None):
    """Gaussian clusters around well-separated centers, min-norm normalised.

    Centers sit on a sphere; when ``k <= d`` they form a random orthonormal
    frame scaled so that neighbours are exactly ``separation`` apart,
    otherwise random directions on a sphere of radius ``separation`` are
    drawn until every pair is at least ``separation`` apart. Each cluster
    gets ``N // k`` or ``N // k + 1`` points with isotropic noise ``sigma``.

    Returns:
        GeneratedDataset whose ``centroids`` are the true centers after the
        same rescaling as the data, and whose ``params`` are fitted post hoc.
    """
    if k > N:
        raise KTooLarge(f"k={k} exceeds N={N}")
    if d < 1 or k < 1:
        raise ValueError("k and d must be positive")
    rng = np.random.default_rng(seed)
    if radius is None:
        radius = separation / math.sqrt(2) if k <= d else separation
    centers = _place_centers(k, d, separation, radius, rng)
    centers = np.atleast_2d(centers)
    sizes = np.full(k, N // k)
    sizes[: N % k] += 1
    labels = np.repeat(np.arange(k), sizes)
    X = centers[labels] + sigma * rng.standard_normal((N, d))
    order = rng.permutation(N)
    X, labels = X[order], labels[order]
    scale = min_norm_scale(X)
    M = DataMatrix(X * scale)
    C = CentroidSet(centers * scale)
    return GeneratedDataset(
        matrix=M,
        labels=labels,
        centroids=C,
        params=fit_params(M, C),
        scale=scale,
        raw_centers=centers,
    )


def gaussian_benchmark(N=20000, d=10, k=4, sigma=2.5, seed=None, radius=30.0):
    """Four-cluster Gaussian benchmark, 20000 points in 10 dimensions by default.

    A center radius of 30 against ``sigma = 2.5`` makes the largest
    normalised squared norm land near 4.
    """
    return generate_well_clusterable(k, d, N, sigma, separation=radius * math.sqrt(2), seed=seed, radius=radius)


@dataclass
class ClaimCheck:
    name: str
    lhs: float
    rhs: float
    holds: bool
    detail: dict = field(default_factory=dict)


@dataclass
class ClaimsReport:
    checks: list

    @property
    def all_hold(self):
        return all(c.holds for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def verify_claims(V, C, p, eps_tau_grid=(0.1, 0.2, 0.3), rtol=1e-9):
    """Numerically evaluate the four structural claims on ``(V, C, p)``.

    * ``low_rank``: ``||V - V_k||_F^2 <= eps'^2 ||V||_F^2``.
    * ``mu``: ``||V||_F / ||V|| <= sqrt(k) / (1 - eps')`` (vacuous when
      ``eps' >= 1``).
    * ``kappa[eps_tau]``: with ``tau = eps_tau ||V||_F / sqrt(k)``,
      ``||V - V_{>=tau}||_F <= (eps_hat + eps_tau) ||V||_F`` where
      ``eps_hat = ||V - V_k||_F / ||V||_F``.
    * ``distcentroid``: at least ``lam N`` points have a squared-distance
      gap to every foreign centroid of at least
      ``xi^2 - 2 beta max(xi, sqrt(eta))``. The triangle-inequality argument
      gives ``D^2 - 2 D beta`` for centroid distance ``D``, smallest at
      ``D = xi``; the shorter ``xi^2 - 2 sqrt(eta) beta`` only follows when
      ``xi <= sqrt(eta)``. Its outcome is kept in the check's detail.
    """
    M = as_matrix(V)
    Cm = as_centroids(C).centroids
    k = min(p.k, min(M.shape))
    fro = M.frobenius_norm
    checks = []

    resid = float(np.linalg.norm(M.data - low_rank_approx(M, k).data))
    eps_p = p.epsilon_prime
    lhs, rhs = resid**2, eps_p**2 * fro**2
    slack = 1e-12 * fro**2
    checks.append(ClaimCheck("low_rank", lhs, rhs, lhs <= rhs * (1 + rtol) + slack))

    ratio = frobenius_ratio(M)
    bound = math.sqrt(p.k) / (1 - eps_p) if eps_p < 1 else math.inf
    checks.append(ClaimCheck("mu", ratio, bound, ratio <= bound * (1 + rtol), {"eps_prime": eps_p}))

    s = svd(M)
    eps_hat = resid / fro
    for eps_tau in eps_tau_grid:
        tau = eps_tau * fro / math.sqrt(p.k)
        r = int(np.sum(s.singular_values >= tau))
        approx = s.reconstruct(r) if r else np.zeros(M.shape)
        lhs = float(np.linalg.norm(M.data - approx))
        rhs = (eps_hat + eps_tau) * fro
        checks.append(
            ClaimCheck(f"kappa[{eps_tau:g}]", lhs, rhs, lhs <= rhs * (1 + rtol) + 1e-12, {"tau": tau, "kept": r})
        )

    D = pairwise_sq_distances(M.data, Cm)
    if Cm.shape[0] > 1:
        own = np.argmin(D, axis=1)
        d_own = D[np.arange(M.rows), own]
        foreign = D.copy()
        foreign[np.arange(M.rows), own] = np.inf
        gap = foreign.min(axis=1) - d_own
    else:
        gap = np.full(M.rows, np.inf)
    need = p.xi**2 - 2 * p.beta * max(p.xi, math.sqrt(p.eta))
    good = int(np.sum(gap >= need))
    short = int(np.sum(gap >= p.window_hi))
    required = p.lam * M.rows
    detail = {"gap_bound": need, "short_bound": p.window_hi, "short_bound_holds": short >= required - 1e-9}
    checks.append(ClaimCheck("distcentroid", float(good), required, good >= required - 1e-9, detail))
    return ClaimsReport(checks)
