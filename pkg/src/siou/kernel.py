"""Covariance and transition formulas of the set-indexed OU process.

The stationary field indexed by rectangles U = [0, t] is the centered
Gaussian field with

    Cov(X_U, X_V) = sigma^2 / (2 lambda) * exp(-lambda m(U sym-diff V)),

where m is the configured measure. Started from a point mass x0 on the
degenerate rectangle at the origin, the field instead has

    E[X_U]        = x0 * exp(-lambda m(U)),
    Cov(X_U, X_V) = sigma^2 / (2 lambda)
                    * (exp(-lambda m(U sym-diff V)) - exp(-lambda (m(U) + m(V)))).

Conditionally on the values x_i at the frontier corners F_i (signs eps_i)
of an increment [0, a] minus B, the value at a is Gaussian with

    mean = sum_i eps_i * exp(-lambda (m(a) - m(F_i))) * x_i,
    var  = sigma^2 / (2 lambda) * (1 - sum_i eps_i * exp(-2 lambda (m(a) - m(F_i)))).

The classical one-parameter OU kernel is the one-dimensional Lebesgue case
with m(a) - m(F) the elapsed time. Exponents are always of the gap
m(a) - m(F_i) >= 0, never of the raw measures, so nothing overflows for
large rectangles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateKernelError, InvalidGeometryError, KernelInconsistencyError
from .geometry import Corner, Increment, frontier
from .measures import MeasureSpec, measure_rect, measure_symdiff

# A computed transition variance below this is a broken formula, not roundoff.
VARIANCE_FLOOR = -1e-10

__all__ = [
    "KernelParams",
    "TransitionParams",
    "cov_stationary",
    "mean_dirac",
    "cov_dirac",
    "transition_params",
    "transition_density",
]


@dataclass(frozen=True)
class KernelParams:
    """Mean-reversion rate lambda, noise scale sigma, and the measure."""

    lam: float
    sigma: float
    measure: MeasureSpec

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise InvalidGeometryError(f"lambda must be finite and positive, got {self.lam}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidGeometryError(f"sigma must be finite and positive, got {self.sigma}")

    @property
    def stationary_variance(self) -> float:
        """Marginal variance sigma^2 / (2 lambda) of the stationary field."""
        return self.sigma**2 / (2.0 * self.lam)

    def to_json(self) -> dict:
        return {"lambda": self.lam, "sigma": self.sigma, "measure": self.measure.to_json()}


@dataclass(frozen=True)
class TransitionParams:
    """Conditional law of X_a given its frontier values: weights and variance.

    ``weights`` pairs each frontier corner with its signed regression
    weight; ``variance`` is the conditional variance, possibly exactly 0
    for a measure-zero increment.
    """

    a: Corner
    weights: tuple[tuple[Corner, float], ...]
    variance: float

    def conditional_mean(self, x) -> float:
        """Regression mean sum_i w_i x_i for frontier values x."""
        if len(x) != len(self.weights):
            raise ValueError(f"expected {len(self.weights)} frontier values, got {len(x)}")
        return float(sum(w * xi for (_, w), xi in zip(self.weights, x)))

    def to_json(self) -> dict:
        return {
            "a": self.a.to_json(),
            "weights": [{"corner": c.to_json(), "weight": w} for c, w in self.weights],
            "variance": self.variance,
        }


def cov_stationary(params: KernelParams, u: Corner, v: Corner) -> float:
    """Stationary covariance of X_U and X_V."""
    return params.stationary_variance * math.exp(-params.lam * measure_symdiff(params.measure, u, v))


def mean_dirac(params: KernelParams, x0: float, u: Corner) -> float:
    """Mean of X_U when started from the point x0 at the origin rectangle."""
    return x0 * math.exp(-params.lam * measure_rect(params.measure, u))


def cov_dirac(params: KernelParams, u: Corner, v: Corner) -> float:
    """Covariance of X_U and X_V when started from a point at the origin rectangle."""
    m = params.measure
    sym = math.exp(-params.lam * measure_symdiff(m, u, v))
    both = math.exp(-params.lam * (measure_rect(m, u) + measure_rect(m, v)))
    return params.stationary_variance * (sym - both)


def transition_params(params: KernelParams, inc: Increment) -> TransitionParams:
    """Closed-form conditional law of X_a given the increment's frontier values.

    The weight on frontier corner F_i with sign eps_i is
    eps_i * exp(-lambda (m(a) - m(F_i))); the conditional variance is
    sigma^2/(2 lambda) * (1 - sum_i eps_i exp(-2 lambda (m(a) - m(F_i)))).
    A variance that is negative beyond roundoff raises; a tiny negative
    clamps to exactly 0, the degenerate (measure-zero increment) case.
    """
    m = params.measure
    m.check_dim(inc.dim)
    ma = measure_rect(m, inc.a)
    fr = frontier(inc)
    weights = []
    ssum = 0.0
    for corner, sign in fr.entries:
        gap = max(ma - measure_rect(m, corner), 0.0)
        weights.append((corner, sign * math.exp(-params.lam * gap)))
        ssum += sign * math.exp(-2.0 * params.lam * gap)
    variance = params.stationary_variance * (1.0 - ssum)
    if variance < VARIANCE_FLOOR * params.stationary_variance:
        raise KernelInconsistencyError(f"transition variance {variance} is negative beyond numerical slack")
    return TransitionParams(inc.a, tuple(weights), max(variance, 0.0))


def transition_density(tp: TransitionParams, x, y: float) -> float:
    """Transition density at y given frontier values x.

    Degenerate transitions (zero variance) have no density and raise;
    sample from them instead, the draw is the conditional mean.
    """
    if tp.variance == 0.0:
        raise DegenerateKernelError("zero-variance transition has no density; the value is the conditional mean")
    mean = tp.conditional_mean(x)
    return math.exp(-((y - mean) ** 2) / (2.0 * tp.variance)) / math.sqrt(2.0 * math.pi * tp.variance)
