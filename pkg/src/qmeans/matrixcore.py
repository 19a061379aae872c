"""Dense linear algebra shared by the rest of the package.

Everything here is a pure function of its inputs. ``DataMatrix`` wraps a
read-only ``(N, d)`` float array and caches the quantities the clustering
and cost-model code keep asking for (row norms, ``eta``, matrix norms).
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NonFiniteInput, RankOutOfRange, SingularMatrix, ZeroRow


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """An ``N x d`` dataset, one point per row."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-d array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteInput("data contains NaN or infinite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    @cached_property
    def row_norms(self):
        norms = np.linalg.norm(self.data, axis=1)
        norms.setflags(write=False)
        return norms

    @cached_property
    def eta(self):
        """Largest squared row norm."""
        return float(np.max(self.row_norms) ** 2)

    @cached_property
    def frobenius_norm(self):
        return float(np.linalg.norm(self.data))

    @cached_property
    def spectral_norm(self):
        return float(np.linalg.norm(self.data, 2))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.data
        return self.data.astype(dtype)

    def __len__(self):
        return self.rows


def as_matrix(V):
    """Coerce an array-like or ``DataMatrix`` into a ``DataMatrix``."""
    if isinstance(V, DataMatrix):
        return V
    return DataMatrix(np.asarray(V, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class SvdResult:
    """Thin SVD ``V = U diag(s) W^T``.

    Columns of ``left_vectors`` and ``right_vectors`` are the singular
    vectors, ordered like ``singular_values`` (nonincreasing).
    """

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    def reconstruct(self, rank=None):
        r = len(self.singular_values) if rank is None else rank
        U = self.left_vectors[:, :r]
        W = self.right_vectors[:, :r]
        return (U * self.singular_values[:r]) @ W.T


def svd(V):
    """Deterministic thin SVD.

    Each right singular vector is sign-flipped so that its first
    non-negligible component is positive; the matching left vector is
    flipped with it.
    """
    M = as_matrix(V).data
    U, s, Wt = np.linalg.svd(M, full_matrices=False)
    W = Wt.T.copy()
    U = U.copy()
    for i in range(W.shape[1]):
        col = W[:, i]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            W[:, i] = -col
            U[:, i] = -U[:, i]
    return SvdResult(singular_values=s, left_vectors=U, right_vectors=W)


def singular_values(V):
    return np.linalg.svd(as_matrix(V).data, compute_uv=False)


def condition_number(V, tau=None):
    """Ratio of largest to smallest singular value.

    The matrix is first rescaled to unit spectral norm, so ``tau`` is a
    threshold on the rescaled singular values: with a threshold, only
    singular values ``>= tau`` take part.
    """
    s = singular_values(V)
    if s[0] <= 0:
        raise SingularMatrix("matrix has zero spectral norm")
    s = s / s[0]
    if tau is None:
        if s[-1] <= 0:
            raise SingularMatrix("smallest singular value is zero")
        return float(1.0 / s[-1])
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    kept = s[s >= tau]
    kept = kept[kept > 0]
    if kept.size == 0:
        raise SingularMatrix(f"no singular value is >= tau={tau}")
    return float(1.0 / kept[-1])


def spectrally_normalized(V):
    M = as_matrix(V)
    if M.spectral_norm <= 0:
        raise SingularMatrix("matrix has zero spectral norm")
    return M.data / M.spectral_norm


def frobenius_ratio(V):
    """``||V||_F / ||V||_2``, the closed form used when bounding ``mu``."""
    M = as_matrix(V)
    if M.spectral_norm <= 0:
        raise SingularMatrix("matrix has zero spectral norm")
    return M.frobenius_norm / M.spectral_norm


def _max_row_power_sum(A, p):
    # 0**p is 1 at p == 0 and inf for p < 0; inf terms simply lose the min.
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return float(np.max(np.sum(A**p, axis=1)))


def mu(V, p_grid_size=21):
    """Grid-search estimate of the QRAM data-structure parameter ``mu``.

    Minimum of the Frobenius norm and ``sqrt(s_{2p}(V) s_{1-2p}(V^T))``
    over ``p_grid_size`` evenly spaced ``p`` in ``[0, 1]``, evaluated on
    ``|V|`` after rescaling to unit spectral norm.
    """
    if p_grid_size < 2:
        raise ValueError("p_grid_size must be at least 2")
    A = np.abs(spectrally_normalized(V))
    best = float(np.linalg.norm(A))
    for p in np.linspace(0.0, 1.0, p_grid_size):
        rows = _max_row_power_sum(A, 2 * p)
        cols = _max_row_power_sum(A.T, 1 - 2 * p)
        val = np.sqrt(rows * cols)
        if np.isfinite(val) and val < best:
            best = float(val)
    return best


def low_rank_approx(V, k):
    """Best rank-``k`` approximation (Eckart-Young)."""
    M = as_matrix(V)
    if not 1 <= k <= min(M.shape):
        raise RankOutOfRange(f"k={k} outside [1, {min(M.shape)}]")
    return DataMatrix(svd(M).reconstruct(k))


def threshold_approx(V, tau):
    """Keep only singular triplets with ``sigma >= tau`` (absolute scale).

    Returns the zero matrix when nothing survives.
    """
    res = svd(V)
    r = int(np.sum(res.singular_values >= tau))
    if r == 0:
        return DataMatrix(np.zeros(as_matrix(V).shape))
    return DataMatrix(res.reconstruct(r))


def pca_project(V, m):
    """Center the rows, then project onto the top ``m`` principal axes."""
    M = as_matrix(V)
    if not 1 <= m <= M.cols:
        raise RankOutOfRange(f"m={m} outside [1, {M.cols}]")
    X = M.data - M.data.mean(axis=0)
    res = svd(X)
    W = res.right_vectors
    if W.shape[1] < m:
        # fewer rows than requested components: pad with an orthonormal complement
        Q, _ = np.linalg.qr(np.hstack([W, np.eye(M.cols)]))
        W = np.hstack([W, Q[:, W.shape[1]:m]])
    return DataMatrix(X @ W[:, :m])


def _min_norm_factor(X):
    norms = np.linalg.norm(X, axis=1)
    smallest = float(np.min(norms))
    if smallest == 0:
        raise ZeroRow(f"row {int(np.argmin(norms))} has zero norm")
    scale = 1.0 / smallest
    # rounding can leave the smallest norm an ulp below 1; nudge up
    for _ in range(8):
        if np.min(np.linalg.norm(X * scale, axis=1)) >= 1.0:
            break
        scale = np.nextafter(scale, np.inf)
    return float(scale)


def normalize_min_norm(V):
    """Rescale every row so the smallest row norm becomes 1 (never below)."""
    M = as_matrix(V)
    return DataMatrix(M.data * _min_norm_factor(M.data))


def min_norm_scale(V):
    """The factor ``normalize_min_norm`` multiplies the data by."""
    return _min_norm_factor(as_matrix(V).data)
