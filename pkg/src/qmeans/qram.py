"""Binary partial-sum tree over squared row norms.

This is the classical skeleton of the QRAM structure: leaves hold
``||v_i||^2``, every internal node holds the sum of its children, and the
root is ``||V||_F^2``. Updating a row touches one leaf-to-root path, and
descending from the root with a uniform number samples row ``i`` with
probability ``||v_i||^2 / ||V||_F^2`` (what measuring the norm-weighted
index state would give).

The quantum structure pays ``O(log^2 N)`` per update because each node
also drives amplitude arithmetic. Here we only count touched nodes, which
is ``depth + 1``.
"""

import numpy as np

from .errors import EmptyTree, IndexOutOfRange
from .matrixcore import as_matrix


class QramTree:
    """Array-backed complete binary tree; node 1 is the root.

    Leaves live at ``capacity .. 2*capacity - 1``. ``capacity`` is the
    smallest power of two >= ``size``; the padding leaves stay at zero
    weight and can never be sampled.
    """

    def __init__(self, sq_norms):
        values = np.asarray(sq_norms, dtype=np.float64).ravel()
        if values.size < 1:
            raise ValueError("tree needs at least one leaf")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("leaf weights must be finite and nonnegative")
        self.size = int(values.size)
        self.depth = int(np.ceil(np.log2(self.size))) if self.size > 1 else 0
        self.capacity = 1 << self.depth
        self.nodes = np.zeros(2 * self.capacity, dtype=np.float64)
        self.nodes[self.capacity:self.capacity + self.size] = values
        for node in range(self.capacity - 1, 0, -1):
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1]

    @property
    def leaf_count(self):
        return self.capacity

    @property
    def root(self):
        return float(self.nodes[1])

    def leaf(self, i):
        self._check_index(i)
        return float(self.nodes[self.capacity + i])

    def leaves(self):
        return self.nodes[self.capacity:self.capacity + self.size].copy()

    def _check_index(self, i):
        if not 0 <= i < self.size:
            raise IndexOutOfRange(f"row {i} outside [0, {self.size})")

    def update_row(self, i, new_sq_norm):
        """Set leaf ``i`` and refresh its ancestors.

        Returns:
            Number of nodes written, always ``depth + 1``.
        """
        self._check_index(i)
        if new_sq_norm < 0 or not np.isfinite(new_sq_norm):
            raise ValueError("squared norm must be finite and nonnegative")
        node = self.capacity + i
        self.nodes[node] = new_sq_norm
        touched = 1
        while node > 1:
            node >>= 1
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1]
            touched += 1
        return touched

    def sample_row_index(self, u):
        """Map ``u`` in ``[0, 1)`` to a row index by descending the tree."""
        total = self.nodes[1]
        if total <= 0:
            raise EmptyTree("all leaves have zero weight")
        if not 0 <= u < 1:
            raise ValueError("u must lie in [0, 1)")
        target = u * total
        node = 1
        while node < self.capacity:
            left = self.nodes[2 * node]
            right = self.nodes[2 * node + 1]
            if (target < left or right <= 0) and left > 0:
                node = 2 * node
            else:
                target -= left
                node = 2 * node + 1
        return node - self.capacity

    def sample(self, rng, size=None):
        """Draw indices using a numpy ``Generator``."""
        if size is None:
            return self.sample_row_index(rng.random())
        return np.array([self.sample_row_index(u) for u in rng.random(size)], dtype=np.int64)

    def validate(self, rtol=1e-9):
        """True when every internal node matches the sum of its children."""
        for node in range(1, self.capacity):
            expect = self.nodes[2 * node] + self.nodes[2 * node + 1]
            if abs(self.nodes[node] - expect) > rtol * max(abs(expect), 1.0):
                return False
        return True


def build_tree(V):
    """Tree over the squared row norms of ``V``."""
    M = as_matrix(V)
    return QramTree(np.sum(M.data**2, axis=1))
