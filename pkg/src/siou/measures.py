"""Measures of rectangles and rectangle unions.

Two measure kinds drive the kernels. The Lebesgue measure of [0, t] is the
product of the coordinates of t. The axis measure with weight vector alpha
charges only the coordinate axes, giving [0, t] mass sum_i alpha_i t_i; it
grows linearly where the Lebesgue measure degenerates near the axes.
Unions are measured by exact inclusion-exclusion over subset minima, and
set differences by subtraction, so everything stays exact at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, InvalidGeometryError
from .geometry import Corner, UnionSet, canonicalize, subset_meet_table

# A measure difference computed by subtraction may round slightly negative;
# anything below this is a real inconsistency, anything above clamps to 0.
NEGATIVE_RESIDUE_FLOOR = -1e-9

__all__ = ["MeasureSpec", "measure_rect", "measure_union", "measure_symdiff", "measure_diff"]


@dataclass(frozen=True)
class MeasureSpec:
    """Which measure to use: ``lebesgue`` or ``axis`` with positive weights."""

    kind: str
    alpha: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("lebesgue", "axis"):
            raise InvalidGeometryError(f"unknown measure kind {self.kind!r}")
        if self.kind == "axis":
            if not self.alpha:
                raise InvalidGeometryError("axis measure needs a weight vector alpha")
            alpha = tuple(float(a) for a in self.alpha)
            if any(not np.isfinite(a) or a <= 0 for a in alpha):
                raise InvalidGeometryError(f"axis weights must be finite and positive, got {alpha}")
            object.__setattr__(self, "alpha", alpha)
        elif self.alpha is not None:
            raise InvalidGeometryError("the Lebesgue measure takes no weights")

    @classmethod
    def lebesgue(cls) -> "MeasureSpec":
        return cls("lebesgue")

    @classmethod
    def axis(cls, alpha) -> "MeasureSpec":
        return cls("axis", tuple(alpha))

    def check_dim(self, dim: int) -> None:
        if self.kind == "axis" and len(self.alpha) != dim:
            raise InvalidGeometryError(f"axis measure has {len(self.alpha)} weights but corners have dimension {dim}")

    def to_json(self) -> dict:
        if self.kind == "axis":
            return {"kind": "axis", "alpha": list(self.alpha)}
        return {"kind": "lebesgue"}

    @classmethod
    def from_json(cls, data: dict) -> "MeasureSpec":
        if data.get("kind") == "axis":
            return cls.axis(data["alpha"])
        if data.get("kind") == "lebesgue":
            return cls.lebesgue()
        raise InvalidGeometryError(f"unknown measure kind {data.get('kind')!r}")


def measure_rect(spec: MeasureSpec, t: Corner) -> float:
    """Measure of the rectangle [0, t]."""
    spec.check_dim(t.dim)
    if spec.kind == "lebesgue":
        out = 1.0
        for c in t.coords:
            out *= c
        return out
    return float(sum(a * c for a, c in zip(spec.alpha, t.coords)))


def measure_union(spec: MeasureSpec, u: UnionSet) -> float:
    """Measure of a union of rectangles by exact inclusion-exclusion.

    Expands over all nonempty corner subsets, so the union's corner count
    is capped by the complexity guard.
    """
    if not u.corners:
        return 0.0
    spec.check_dim(u.dim)
    meets, signs = subset_meet_table(np.array([c.coords for c in u.corners]))
    if spec.kind == "lebesgue":
        vals = meets.prod(axis=1)
    else:
        vals = meets @ np.asarray(spec.alpha)
    total = float(signs @ vals)
    return _clamp_residue(total, "union measure")


def measure_symdiff(spec: MeasureSpec, u: Corner, v: Corner) -> float:
    """Measure of the symmetric difference of [0, u] and [0, v]."""
    total = measure_rect(spec, u) + measure_rect(spec, v) - 2.0 * measure_rect(spec, u.meet(v))
    return _clamp_residue(total, "symmetric difference")


def measure_diff(spec: MeasureSpec, a: Corner, b: UnionSet) -> float:
    """Measure of the increment [0, a] minus the union b."""
    clipped = canonicalize([c.meet(a) for c in b.corners])
    total = measure_rect(spec, a) - measure_union(spec, clipped)
    return _clamp_residue(total, "increment measure")


def _clamp_residue(value: float, what: str) -> float:
    if value >= 0.0:
        return value
    if value >= NEGATIVE_RESIDUE_FLOOR:
        return 0.0
    raise InternalConsistencyError(f"{what} came out {value}, far below zero")
