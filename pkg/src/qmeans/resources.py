"""Cost formulas for q-means and its subroutines.

Every big-O constant and every polylogarithmic factor is set to 1. The
numbers are for comparing datasets and parameter choices with each other,
not for predicting wall-clock time, and the polylog-in-N advantage they
describe cannot be observed by running the classical emulation.
"""

import math
from dataclasses import asdict, dataclass

from .emulation import ErrorBudget
from .errors import DomainError
from .matrixcore import as_matrix, condition_number, mu as mu_param


@dataclass(frozen=True)
class CostProfile:
    kappa: float
    mu: float
    eta: float
    delta: float
    k: int
    d: int
    N: int
    eps1: float = None
    eps2: float = None
    eps3: float = None
    eps4: float = None
    capital_delta: float = 0.01

    def __post_init__(self):
        for name in ("kappa", "mu", "eta", "delta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("k", "d", "N"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        budget = ErrorBudget.derive_default(self.delta, self.eta, self.d)
        for name in ("eps1", "eps2", "eps3", "eps4"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, getattr(budget, name))

    @classmethod
    def from_matrix(cls, V, k, delta, p_grid_size=21, **kwargs):
        """Measure ``kappa``, ``mu`` and ``eta`` directly from a dataset."""
        M = as_matrix(V)
        return cls(
            kappa=condition_number(M),
            mu=mu_param(M, p_grid_size),
            eta=M.eta,
            delta=delta,
            k=k,
            d=M.cols,
            N=M.rows,
            **kwargs,
        )

    def to_dict(self):
        return asdict(self)


def general_runtime(p):
    """Per-iteration cost on arbitrary data.

    ``k d (eta/δ^2) kappa (mu + k eta/δ) + k^2 (eta^1.5/δ^2) kappa mu``
    """
    k, d, eta, delta, kappa, mu = p.k, p.d, p.eta, p.delta, p.kappa, p.mu
    return k * d * (eta / delta**2) * kappa * (mu + k * eta / delta) + k**2 * (eta**1.5 / delta**2) * kappa * mu


def wc_runtime(p):
    """Per-iteration cost on well-clusterable data.

    ``k^2 d eta^2.5/δ^3 + k^2.5 eta^2/δ^3``
    """
    k, d, eta, delta = p.k, p.d, p.eta, p.delta
    return k**2 * d * eta**2.5 / delta**3 + k**2.5 * eta**2 / delta**3


def distance_estimation_time(k, eta, eps1, capital_delta):
    """Time to estimate all ``k`` distances of one point: ``k eta/eps1 ln(1/Δ)``."""
    if eps1 <= 0:
        raise DomainError("eps1 must be positive")
    if not 0 < capital_delta < 1:
        raise DomainError("capital_delta must lie in (0, 1)")
    return k * eta / eps1 * math.log(1 / capital_delta)


def itemized_runtime(p):
    """Per-iteration cost expressed through the individual error parameters.

    Tomography of ``k`` centroids costs ``k d / eps4^2`` state preparations,
    each ``kappa (mu + T_chi)``; norm estimation costs
    ``k T_chi kappa mu / eps3``; ``T_chi = k eta / eps1``. Logarithmic
    factors are dropped as in the headline formula, so this differs from
    ``general_runtime`` only by constants.
    """
    t_chi = p.k * p.eta / p.eps1
    tomography = p.k * p.d / p.eps4**2 * p.kappa * (p.mu + t_chi)
    norms = p.k * t_chi * p.kappa * p.mu / p.eps3
    # the headline form bills norm estimation as k^2 eta^1.5/δ^2 kappa mu
    norms_headline = p.k**2 * p.eta**1.5 / p.delta**2 * p.kappa * p.mu
    return {
        "t_chi": t_chi,
        "tomography": tomography,
        "norm_estimation": norms,
        "norm_estimation_headline": norms_headline,
        "total": tomography + norms,
    }


def ae_error(p_true, P, certain_zero=True):
    """Amplitude-estimation error bound ``2 pi sqrt(p(1-p))/P + (pi/P)^2``.

    With ``certain_zero`` the bound is 0 at ``p = 0`` (the estimate is then
    exact) and at ``p = 1`` for even ``P``.
    """
    if P < 1:
        raise DomainError("P must be at least 1")
    if not 0 <= p_true <= 1:
        raise DomainError("p_true must lie in [0, 1]")
    if certain_zero and (p_true == 0 or (p_true == 1 and P % 2 == 0)):
        return 0.0
    return 2 * math.pi * math.sqrt(p_true * (1 - p_true)) / P + (math.pi / P) ** 2


def _ceil(x):
    # tolerate representation error when x is meant to be an integer
    r = round(x)
    if abs(x - r) <= 1e-12 * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


def median_reps(capital_delta, a0):
    """Repetitions for median boosting: ``ceil(ln(1/Δ) / (2 (a0 - 1/2)^2))``, at least 1."""
    if not 0 < capital_delta < 1:
        raise DomainError("capital_delta must lie in (0, 1)")
    if not 0.5 < a0 <= 1:
        raise DomainError("a0 must lie in (1/2, 1]")
    return max(1, _ceil(math.log(1 / capital_delta) / (2 * (abs(a0) - 0.5) ** 2)))


def median_time(T, capital_delta, a0):
    return 2 * T * median_reps(capital_delta, a0)


def tomography_samples(d, eps4, c=1.0):
    """State preparations for one vector tomography: ``ceil(c d ln d / eps4^2)``."""
    if d < 2:
        raise DomainError("d must be at least 2")
    if eps4 <= 0 or c <= 0:
        raise DomainError("eps4 and c must be positive")
    return _ceil(c * d * math.log(d) / eps4**2)


def tomography_total(k, d, eps4, c=1.0):
    """Invocations for all ``k`` centroids: ``ceil(c k ln k d ln d / eps4^2)``.

    ``k ln k`` is replaced by 1 when ``k = 1`` (one draw collects it).
    """
    if d < 2:
        raise DomainError("d must be at least 2")
    collect = k * math.log(k) if k > 1 else 1.0
    return _ceil(c * collect * d * math.log(d) / eps4**2)


def classical_baseline(N, k, d):
    """One Lloyd iteration: ``k N d``."""
    return N * k * d


def crossover_n(p, runtime=general_runtime):
    """Smallest ``N`` at which ``k N d`` exceeds the quantum cost."""
    return math.floor(runtime(p) / (p.k * p.d)) + 1


def cost_report(p):
    """Every term as a JSON-ready dict."""
    items = itemized_runtime(p)
    return {
        "profile": p.to_dict(),
        "constants": "all big-O constants and polylog factors set to 1",
        "general_runtime": general_runtime(p),
        "wc_runtime": wc_runtime(p),
        "classical_baseline": classical_baseline(p.N, p.k, p.d),
        "crossover_n_general": crossover_n(p, general_runtime),
        "crossover_n_wc": crossover_n(p, wc_runtime),
        "distance_estimation_time": distance_estimation_time(p.k, p.eta, p.eps1, p.capital_delta),
        "tomography_samples": tomography_samples(max(p.d, 2), p.eps4),
        "tomography_total": tomography_total(p.k, max(p.d, 2), p.eps4),
        "itemized": items,
    }
