"""Rectangle index geometry on R^N_+.

The indexing family consists of the rectangles [0, t] for t in R^N_+,
represented by their upper corners and ordered by componentwise <=
(rectangle inclusion). Intersections of rectangles are componentwise
minima of corners, so everything here reduces to corner arithmetic:

* a union of rectangles is stored as the antichain of its maximal corners
  (its extremal representation),
* an increment is a pair (a, b) standing for [0, a] minus the union b,
* the frontier of an increment is the set of subset-minima of the union's
  corners whose inclusion-exclusion coefficients survive cancellation,
  together with those +-1 signs.

Corners closer than ``GEOM_ATOL`` in every coordinate are treated as one
point. Exact cancellation in the frontier relies on equal inputs
collapsing, which componentwise ``min`` guarantees bitwise; the tolerance
only mops up near-duplicates in user input.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ComplexityError, InternalConsistencyError, InvalidGeometryError

GEOM_ATOL = 1e-12

# Unions and frontiers expand inclusion-exclusion over all nonempty corner
# subsets, so the corner count is capped to keep 2^k terms tractable.
MAX_UNION_CORNERS = 20

__all__ = [
    "GEOM_ATOL",
    "MAX_UNION_CORNERS",
    "Corner",
    "UnionSet",
    "Increment",
    "Frontier",
    "canonicalize",
    "semilattice",
    "frontier",
    "min_closure",
]


def _check_dims(*items) -> int:
    dims = {item.dim for item in items}
    if len(dims) > 1:
        raise InvalidGeometryError(f"mixed dimensions {sorted(dims)}; the dimension is fixed per session")
    return dims.pop()


@dataclass(frozen=True)
class Corner:
    """Upper corner t of the rectangle [0, t] in R^N_+."""

    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if not coords:
            raise InvalidGeometryError("a corner needs at least one coordinate")
        for c in coords:
            if not np.isfinite(c) or c < 0.0:
                raise InvalidGeometryError(f"coordinates must be finite and nonnegative, got {coords}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def origin(cls, dim: int) -> "Corner":
        return cls((0.0,) * dim)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def leq(self, other: "Corner", atol: float = GEOM_ATOL) -> bool:
        """Componentwise <= up to ``atol``, i.e. rectangle inclusion."""
        _check_dims(self, other)
        return all(a <= b + atol for a, b in zip(self.coords, other.coords))

    def meet(self, other: "Corner") -> "Corner":
        """Corner of the rectangle intersection: the componentwise minimum."""
        _check_dims(self, other)
        return Corner(tuple(min(a, b) for a, b in zip(self.coords, other.coords)))

    def isclose(self, other: "Corner", atol: float = GEOM_ATOL) -> bool:
        _check_dims(self, other)
        return all(abs(a - b) <= atol for a, b in zip(self.coords, other.coords))

    def to_json(self) -> list[float]:
        return list(self.coords)


def _merge_close(corners: list[Corner]) -> list[Corner]:
    """Drop corners within GEOM_ATOL of an already-kept one, in sorted order."""
    kept: list[Corner] = []
    for c in sorted(corners, key=lambda c: c.coords):
        if not any(c.isclose(r) for r in kept):
            kept.append(c)
    return kept


@dataclass(frozen=True)
class UnionSet:
    """Finite union of rectangles, stored as the sorted antichain of maximal corners.

    Construct through :func:`canonicalize`; the constructor only validates
    that the representation is already canonical.
    """

    corners: tuple[Corner, ...]

    def __post_init__(self):
        corners = tuple(self.corners)
        if corners:
            _check_dims(*corners)
        for i, c in enumerate(corners):
            if i and not corners[i - 1].coords < c.coords:
                raise InvalidGeometryError("union corners must be strictly sorted; use canonicalize()")
        for u, v in itertools.permutations(corners, 2):
            if u.leq(v):
                raise InvalidGeometryError("union corners must form an antichain; use canonicalize()")
        object.__setattr__(self, "corners", corners)

    @property
    def dim(self) -> int:
        if not self.corners:
            raise InvalidGeometryError("empty union has no dimension")
        return self.corners[0].dim

    def __len__(self) -> int:
        return len(self.corners)

    def to_json(self) -> list[list[float]]:
        return [c.to_json() for c in self.corners]


def canonicalize(corners) -> UnionSet:
    """Extremal representation of a union of rectangles.

    Merges near-duplicate corners, removes every corner dominated by
    another, and sorts the survivors lexicographically. The empty input
    yields the empty union.
    """
    cs = [c if isinstance(c, Corner) else Corner(tuple(c)) for c in corners]
    if cs:
        _check_dims(*cs)
    merged = _merge_close(cs)
    maximal = [u for u in merged if not any(v is not u and u.leq(v) for v in merged)]
    return UnionSet(tuple(sorted(maximal, key=lambda c: c.coords)))


@dataclass(frozen=True)
class Increment:
    """Increment [0, a] minus a union b, with b clipped into [0, a]."""

    a: Corner
    b: UnionSet

    def __post_init__(self):
        if self.b.corners:
            _check_dims(self.a, *self.b.corners)
        clipped = canonicalize([c.meet(self.a) for c in self.b.corners])
        object.__setattr__(self, "b", clipped)

    @property
    def dim(self) -> int:
        return self.a.dim


@dataclass(frozen=True)
class Frontier:
    """Signed corners that survive inclusion-exclusion over an increment's b-corners."""

    entries: tuple[tuple[Corner, int], ...]

    def __post_init__(self):
        seen = set()
        for corner, sign in self.entries:
            if sign not in (-1, 1):
                raise InvalidGeometryError(f"frontier signs must be +-1, got {sign}")
            if corner.coords in seen:
                raise InvalidGeometryError(f"duplicate frontier corner {corner.coords}")
            seen.add(corner.coords)

    @property
    def corners(self) -> tuple[Corner, ...]:
        return tuple(c for c, _ in self.entries)

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(s for _, s in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> list[dict]:
        return [{"corner": c.to_json(), "sign": s} for c, s in self.entries]


def subset_meet_table(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Componentwise minima over all nonempty row subsets, with their signs.

    Row ``m - 1`` of the first array is the minimum over the subset encoded
    by bitmask ``m``; the second array holds the inclusion-exclusion signs
    (-1)**(|m| + 1). Raises the complexity guard beyond MAX_UNION_CORNERS
    rows.
    """
    k = coords.shape[0]
    if k > MAX_UNION_CORNERS:
        raise ComplexityError(f"{k} corners would expand to 2^{k} inclusion-exclusion terms (cap {MAX_UNION_CORNERS})")
    table = np.full((1 << k, coords.shape[1]), np.inf)
    for i in range(k):
        lo = 1 << i
        table[lo : 2 * lo] = np.minimum(table[:lo], coords[i])
    masks = np.arange(1, 1 << k, dtype=np.uint64)
    signs = np.where(np.bitwise_count(masks) % 2 == 1, 1, -1).astype(np.int64)
    return table[1:], signs


def _merge_close_rows(rows: np.ndarray, nets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge lexicographically adjacent rows within GEOM_ATOL, summing nets."""
    if len(rows) == 0:
        return rows, nets
    out_rows = [rows[0]]
    out_nets = [int(nets[0])]
    for row, net in zip(rows[1:], nets[1:]):
        if np.all(np.abs(row - out_rows[-1]) <= GEOM_ATOL):
            out_nets[-1] += int(net)
        else:
            out_rows.append(row)
            out_nets.append(int(net))
    return np.array(out_rows), np.array(out_nets)


def _entries_from_nets(rows: np.ndarray, nets: np.ndarray) -> tuple[tuple[Corner, int], ...]:
    """Keep rows with nonzero net coefficient, insisting the net is +-1."""
    entries = []
    for row, net in zip(rows, nets):
        if net == 0:
            continue
        if net not in (-1, 1):
            raise InternalConsistencyError(
                f"inclusion-exclusion net coefficient {net} at corner {tuple(row)}; expected -1, 0 or +1"
            )
        entries.append((Corner(tuple(row)), int(net)))
    return tuple(entries)


def semilattice(inc: Increment) -> list[Corner]:
    """All componentwise minima of nonempty subsets of the increment's b-corners."""
    bs = inc.b.corners
    if not bs:
        return []
    meets, _ = subset_meet_table(np.array([c.coords for c in bs]))
    uniq = np.unique(meets, axis=0)
    merged, _ = _merge_close_rows(uniq, np.zeros(len(uniq), dtype=np.int64))
    return [Corner(tuple(row)) for row in merged]


def frontier(inc: Increment) -> Frontier:
    """Signed frontier of an increment after inclusion-exclusion cancellation.

    Expands the union of the b-corners over all nonempty subsets, groups
    equal subset-minima, and keeps the corners whose net coefficient is
    nonzero. A net coefficient outside {-1, 0, +1} is a broken invariant
    and raises rather than truncating. An empty b yields the origin with
    sign +1, the convention for an unconditioned rectangle.
    """
    bs = inc.b.corners
    if not bs:
        return Frontier(((Corner.origin(inc.dim), 1),))
    meets, signs = subset_meet_table(np.array([c.coords for c in bs]))
    uniq, inverse = np.unique(meets, axis=0, return_inverse=True)
    nets = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(nets, inverse.ravel(), signs)
    rows, nets = _merge_close_rows(uniq, nets)
    return Frontier(_entries_from_nets(rows, nets))


def min_closure(corners) -> list[Corner]:
    """Close a nonempty corner family under componentwise minima.

    Adds the origin, iterates pairwise meets to a fixed point, and returns
    the closure sorted by (coordinate sum, lexicographic) order, which is a
    linear extension of componentwise <=: a corner always follows
    everything strictly below it.
    """
    cs = [c if isinstance(c, Corner) else Corner(tuple(c)) for c in corners]
    if not cs:
        raise InvalidGeometryError("min_closure needs at least one corner")
    dim = _check_dims(*cs)
    current = _merge_close(cs + [Corner.origin(dim)])
    changed = True
    while changed:
        changed = False
        for u, v in itertools.combinations(list(current), 2):
            m = u.meet(v)
            if not any(m.isclose(w) for w in current):
                current.append(m)
                changed = True
    return sorted(current, key=lambda c: (sum(c.coords), c.coords))
