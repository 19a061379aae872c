"""Independent reference implementations used only by the tests."""

import math

import numpy as np


def jacobi_eigh(A, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi eigen-decomposition of a symmetric matrix.

    Returns eigenvalues (descending) and eigenvectors as columns.
    """
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(A**2) - np.sum(np.diag(A) ** 2))
        if off < tol * max(1.0, np.abs(A).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                V = V @ J
    w = np.diag(A)
    order = np.argsort(w)[::-1]
    return w[order], V[:, order]


def rss_loop(V, C, labels):
    total = 0.0
    for i, row in enumerate(V):
        for j in range(len(row)):
            total += (row[j] - C[labels[i]][j]) ** 2
    return total


def nearest_loop(V, C):
    out = []
    for v in V:
        best, arg = math.inf, -1
        for j, c in enumerate(C):
            dist = sum((a - b) ** 2 for a, b in zip(v, c))
            if dist < best:
                best, arg = dist, j
        out.append(arg)
    return np.array(out)


# cost formulas written out term by term, straight from their printed form


def general_runtime(k, d, eta, delta, kappa, mu):
    first = k * d * (eta / (delta * delta)) * kappa * (mu + k * eta / delta)
    second = (k * k) * (math.pow(eta, 1.5) / (delta * delta)) * kappa * mu
    return first + second


def wc_runtime(k, d, eta, delta):
    return (k * k) * d * math.pow(eta, 2.5) / math.pow(delta, 3) + math.pow(k, 2.5) * (eta * eta) / math.pow(delta, 3)


def ae_error(p, P):
    return 2 * math.pi * math.sqrt(p * (1 - p)) / P + math.pow(math.pi / P, 2)


def median_reps(Delta, a0):
    x = -math.log(Delta) / (2 * (a0 - 0.5) * (a0 - 0.5))
    r = round(x)
    n = r if abs(x - r) <= 1e-12 * max(1.0, x) else math.ceil(x)
    return max(1, n)


def tomography_samples(d, eps, c=1.0):
    x = c * d * math.log(d) / (eps * eps)
    r = round(x)
    return r if abs(x - r) <= 1e-12 * max(1.0, x) else math.ceil(x)
