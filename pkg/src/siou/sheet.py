"""Grid white noise and the OU-type integrals against it.

White-noise increments live on a rectangular grid over [lower, upper], one
independent Normal(0, cell volume) draw per cell. Integrals are midpoint
Riemann sums: a cell contributes exactly when its center lies in the
integration region.

For a positive decay vector alpha and scale sigma, the process started at
y0 on the all-zero face is

    Y_t = exp(-<alpha, t>) * (y0 + sigma * S_t),
    S_t = sum over cells with center u <= t and not u <= 0 of exp(<alpha, u>) dW(u),

and its stationary counterpart integrates exp(<alpha, u - t>) over all
cell centers u <= t. The grid's lower corner stands in for -infinity;
``truncation_bound`` gives the conservative relative second-moment error
exp(-2 min_i alpha_i L) for a tail cut at distance L, which is how the
lower corner should be chosen.

Restricted to rectangles [0, t] with t >= 0, the stationary integral is a
set-indexed OU field in law for the axis measure with weights alpha, unit
mean-reversion rate, and noise scale sigma_eff determined by

    sigma_eff^2 = sigma^2 * 2^(1 - N) / prod_j alpha_j;

``equivalent_kernel_params`` returns those parameters, which is what the
representation checks compare against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidGridError, OutOfRangeError
from .gaussian import RngSeed
from .geometry import Corner
from .kernel import KernelParams
from .measures import MeasureSpec

__all__ = [
    "GridSpec",
    "SheetField",
    "sheet_increments",
    "integrate_mpou",
    "integrate_stationary",
    "truncation_bound",
    "equivalent_kernel_params",
    "batch_paths",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular grid over [lower, upper] with the given cell counts."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    steps: tuple[int, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        steps = tuple(int(s) for s in self.steps)
        if not (len(lower) == len(upper) == len(steps)) or not lower:
            raise InvalidGridError("lower, upper and steps must share a positive length")
        for lo, up, s in zip(lower, upper, steps):
            if not (math.isfinite(lo) and math.isfinite(up)):
                raise InvalidGridError("grid bounds must be finite")
            if lo > 0 or up <= 0:
                raise InvalidGridError(f"the grid must straddle the origin: lower <= 0 < upper, got [{lo}, {up}]")
            if s < 1 or up <= lo:
                raise InvalidGridError(f"axis [{lo}, {up}] with {s} cells has no volume")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "steps", steps)

    @property
    def dim(self) -> int:
        return len(self.steps)

    @property
    def cell_widths(self) -> tuple[float, ...]:
        return tuple((up - lo) / s for lo, up, s in zip(self.lower, self.upper, self.steps))

    @property
    def cell_volume(self) -> float:
        out = 1.0
        for w in self.cell_widths:
            out *= w
        return out

    @property
    def ncells(self) -> int:
        out = 1
        for s in self.steps:
            out *= s
        return out

    def to_json(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper), "steps": list(self.steps)}


@lru_cache(maxsize=8)
def _centers_flat(spec: GridSpec) -> np.ndarray:
    """Cell centers as a (ncells, N) array in C order of the cell grid."""
    axes = [lo + (np.arange(s) + 0.5) * w for lo, s, w in zip(spec.lower, spec.steps, spec.cell_widths)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True, eq=False)
class SheetField:
    """One realization of the grid white noise: increments shaped like the grid."""

    spec: GridSpec
    increments: np.ndarray
    seed: RngSeed


def sheet_increments(spec: GridSpec, seed: RngSeed) -> SheetField:
    """Draw the grid's white-noise increments, one Normal(0, cell volume) per cell."""
    z = seed.generator().standard_normal(spec.steps)
    return SheetField(spec, z * math.sqrt(spec.cell_volume), seed)


def _check_alpha(alpha, dim: int) -> np.ndarray:
    a = np.asarray(alpha, dtype=float).reshape(-1)
    if a.size != dim:
        raise InvalidGridError(f"alpha has {a.size} entries but the grid has dimension {dim}")
    if np.any(~np.isfinite(a)) or np.any(a <= 0):
        raise InvalidGridError(f"alpha must be finite and positive, got {tuple(a)}")
    return a


def _check_point(spec: GridSpec, t: Corner | tuple) -> np.ndarray:
    if not isinstance(t, Corner):
        t = Corner(tuple(t))
    if t.dim != spec.dim:
        raise OutOfRangeError(f"point has dimension {t.dim}, grid has {spec.dim}")
    tv = np.asarray(t.coords)
    if np.any(tv > np.asarray(spec.upper) + 1e-12):
        raise OutOfRangeError(f"point {t.coords} lies outside the grid upper corner {spec.upper}")
    return tv


def integrate_mpou(field: SheetField, alpha, sigma: float, y0: float, t: Corner) -> float:
    """Midpoint-rule value of the sheet-driven OU process started at y0.

    Sums exp(<alpha, u>) dW(u) over cell centers u <= t that are not <= 0,
    then applies the exp(-<alpha, t>) envelope around y0.
    """
    spec = field.spec
    a = _check_alpha(alpha, spec.dim)
    tv = _check_point(spec, t)
    centers = _centers_flat(spec)
    mask = np.all(centers <= tv, axis=1) & ~np.all(centers <= 0.0, axis=1)
    s = float(np.exp(centers[mask] @ a) @ field.increments.ravel()[mask])
    return math.exp(-float(a @ tv)) * (y0 + sigma * s)


def integrate_stationary(field: SheetField, alpha, sigma: float, t: Corner) -> float:
    """Midpoint-rule value of the stationary sheet-driven OU process at t."""
    spec = field.spec
    a = _check_alpha(alpha, spec.dim)
    tv = _check_point(spec, t)
    centers = _centers_flat(spec)
    mask = np.all(centers <= tv, axis=1)
    return sigma * float(np.exp((centers[mask] - tv) @ a) @ field.increments.ravel()[mask])


def truncation_bound(alpha, L: float) -> float:
    """Relative second-moment error bound exp(-2 min(alpha) L) for a tail cut at L."""
    a = np.asarray(alpha, dtype=float).reshape(-1)
    if a.size == 0 or np.any(~np.isfinite(a)) or np.any(a <= 0):
        raise InvalidGridError(f"alpha must be finite and positive, got {tuple(a)}")
    if not (math.isfinite(L) and L > 0):
        raise InvalidGridError(f"the truncation distance must be positive, got {L}")
    return math.exp(-2.0 * float(a.min()) * L)


def equivalent_kernel_params(alpha, sigma: float) -> KernelParams:
    """Set-indexed OU parameters matched by the stationary sheet integral.

    Unit mean-reversion rate, axis measure weighted by alpha, and noise
    scale solving sigma_eff^2 = sigma^2 * 2^(1 - N) / prod(alpha).
    """
    a = np.asarray(alpha, dtype=float).reshape(-1)
    if a.size == 0 or np.any(~np.isfinite(a)) or np.any(a <= 0):
        raise InvalidGridError(f"alpha must be finite and positive, got {tuple(a)}")
    sigma_eff = math.sqrt(sigma**2 * 2.0 ** (1 - a.size) / float(a.prod()))
    return KernelParams(lam=1.0, sigma=sigma_eff, measure=MeasureSpec.axis(tuple(a)))


def batch_paths(spec: GridSpec, alpha, sigma: float, points, replicates: int, seed: RngSeed,
                y0: float = 0.0, stationary: bool = False, chunk: int = 512) -> np.ndarray:
    """Many independent sheet realizations evaluated at several points at once.

    Returns a (replicates, len(points)) array whose row r equals
    integrate_mpou (or integrate_stationary) at every point for the r-th
    independent sheet. Cell weights are precomputed per point and the
    replicates stream through one generator in fixed-size chunks. The noise
    consumed per row does not depend on the chunk size, so repeated calls
    with the same arguments are bit-identical and different chunk sizes
    agree to floating-point rounding.
    """
    a = _check_alpha(alpha, spec.dim)
    pts = [p if isinstance(p, Corner) else Corner(tuple(p)) for p in points]
    centers = _centers_flat(spec)
    weights = np.zeros((spec.ncells, len(pts)))
    drift = np.zeros(len(pts))
    for j, t in enumerate(pts):
        tv = _check_point(spec, t)
        envelope = math.exp(-float(a @ tv))
        if stationary:
            mask = np.all(centers <= tv, axis=1)
            weights[mask, j] = sigma * np.exp((centers[mask] - tv) @ a)
        else:
            mask = np.all(centers <= tv, axis=1) & ~np.all(centers <= 0.0, axis=1)
            weights[mask, j] = sigma * envelope * np.exp(centers[mask] @ a)
            drift[j] = y0 * envelope
    out = np.empty((replicates, len(pts)))
    sqrt_vol = math.sqrt(spec.cell_volume)
    gen = seed.generator()
    done = 0
    while done < replicates:
        take = min(chunk, replicates - done)
        z = gen.standard_normal((take, spec.ncells))
        out[done : done + take] = drift[None, :] + (z * sqrt_vol) @ weights
        done += take
    return out
