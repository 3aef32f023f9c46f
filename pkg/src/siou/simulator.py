"""Sequential Markov sampling of the set-indexed OU field on corner families.

A finite corner family is first closed under componentwise minima and
ordered by a linear extension of componentwise <=, with the origin first.
Each later corner a_i is reached through the increment [0, a_i] minus the
union of all earlier rectangles clipped into [0, a_i]; the frontier of
that increment consists of corners that appear strictly earlier in the
order, so one Gaussian draw per corner realizes the whole field. The
origin value is drawn from the configured initial law, and only that draw
depends on it, which is why arbitrary (including empirical) initial laws
are allowed.

``simulate_exact`` bypasses the sequential kernel entirely: it assembles
the joint mean and covariance in closed form and samples in one shot. It
exists as an independent oracle for the sequential sampler and therefore
supports only Gaussian initial laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, PlanningError
from .gaussian import GaussianSpec, RngSeed, sample
from .geometry import Corner, Frontier, Increment, canonicalize, frontier, min_closure
from .kernel import KernelParams, transition_params
from .measures import measure_rect, measure_symdiff

__all__ = ["InitialLaw", "PlanStep", "Plan", "SamplePath", "plan", "simulate", "simulate_exact"]


@dataclass(frozen=True)
class InitialLaw:
    """Law of the origin value: dirac(x0), normal(mu, var) or empirical(values).

    The empirical law resamples the given values uniformly with
    replacement.
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        kind = self.kind
        ps = tuple(float(p) for p in self.params)
        if kind == "dirac":
            if len(ps) != 1:
                raise ConfigError("dirac initial law takes exactly one value")
        elif kind == "normal":
            if len(ps) != 2 or ps[1] < 0:
                raise ConfigError("normal initial law takes (mean, variance >= 0)")
        elif kind == "empirical":
            if not ps:
                raise ConfigError("empirical initial law needs at least one value")
        else:
            raise ConfigError(f"unknown initial law kind {kind!r}")
        if any(not math.isfinite(p) for p in ps):
            raise ConfigError(f"initial law parameters must be finite, got {ps}")
        object.__setattr__(self, "params", ps)

    @classmethod
    def dirac(cls, x0: float) -> "InitialLaw":
        return cls("dirac", (x0,))

    @classmethod
    def normal(cls, mu: float, var: float) -> "InitialLaw":
        return cls("normal", (mu, var))

    @classmethod
    def empirical(cls, values) -> "InitialLaw":
        return cls("empirical", tuple(values))

    @property
    def is_gaussian(self) -> bool:
        return self.kind in ("dirac", "normal")

    @property
    def mean(self) -> float:
        if self.kind == "dirac":
            return self.params[0]
        if self.kind == "normal":
            return self.params[0]
        raise ConfigError("empirical initial law has no closed-form role here")

    @property
    def variance(self) -> float:
        if self.kind == "dirac":
            return 0.0
        if self.kind == "normal":
            return self.params[1]
        raise ConfigError("empirical initial law has no closed-form role here")

    def draw(self, gen: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "dirac":
            return np.full(n, self.params[0])
        if self.kind == "normal":
            mu, var = self.params
            if var == 0.0:
                return np.full(n, mu)
            return mu + math.sqrt(var) * gen.standard_normal(n)
        values = np.asarray(self.params)
        return values[gen.integers(0, len(values), size=n)]

    def to_json(self) -> dict:
        if self.kind == "dirac":
            return {"kind": "dirac", "x0": self.params[0]}
        if self.kind == "normal":
            return {"kind": "normal", "mu": self.params[0], "var": self.params[1]}
        return {"kind": "empirical", "values": list(self.params)}

    @classmethod
    def from_json(cls, data: dict) -> "InitialLaw":
        kind = data.get("kind")
        if kind == "dirac":
            return cls.dirac(data["x0"])
        if kind == "normal":
            return cls.normal(data["mu"], data["var"])
        if kind == "empirical":
            return cls.empirical(data["values"])
        raise ConfigError(f"unknown initial law kind {kind!r}")


@dataclass(frozen=True)
class PlanStep:
    """One sequential step: reach corner ``a`` (position ``index`` in the order).

    ``parents`` are the positions of the frontier corners, aligned with the
    frontier entries; every parent precedes ``index``.
    """

    index: int
    a: Corner
    increment: Increment
    frontier: Frontier
    parents: tuple[int, ...]


@dataclass(frozen=True)
class Plan:
    """Ordered min-closed corner list plus one step per non-origin corner."""

    corners: tuple[Corner, ...]
    steps: tuple[PlanStep, ...]

    @property
    def dim(self) -> int:
        return self.corners[0].dim

    def to_json(self) -> dict:
        return {
            "corners": [c.to_json() for c in self.corners],
            "steps": [
                {
                    "index": s.index,
                    "a": s.a.to_json(),
                    "b": s.increment.b.to_json(),
                    "frontier": s.frontier.to_json(),
                    "parents": list(s.parents),
                }
                for s in self.steps
            ],
        }


def plan(corners, tiebreak: str = "lex") -> Plan:
    """Close the family under minima and lay out the sequential steps.

    ``tiebreak`` picks among valid linear extensions: corners are ordered
    by coordinate sum first, then lexicographically ("lex") or by the
    reversed coordinate tuple ("revlex"). Both orders sample the same law;
    having two lets the order-independence of the sampler be tested.
    """
    closed = min_closure(corners)
    if tiebreak == "lex":
        pass
    elif tiebreak == "revlex":
        closed = sorted(closed, key=lambda c: (sum(c.coords), c.coords[::-1]))
    else:
        raise ConfigError(f"unknown tiebreak {tiebreak!r}")
    if any(c != 0.0 for c in closed[0].coords):
        raise PlanningError("the closure must start at the origin")
    index_of = {c.coords: i for i, c in enumerate(closed)}
    steps = []
    for i in range(1, len(closed)):
        a = closed[i]
        b = canonicalize([closed[j].meet(a) for j in range(i)])
        inc = Increment(a, b)
        fr = frontier(inc)
        parents = []
        for corner, _ in fr.entries:
            j = index_of.get(corner.coords)
            if j is None:
                j = next((k for k, c in enumerate(closed) if c.isclose(corner)), None)
            if j is None or j >= i:
                raise PlanningError(f"frontier corner {corner.coords} of step {i} is not sampled before it")
            parents.append(j)
        steps.append(PlanStep(i, a, inc, fr, tuple(parents)))
    return Plan(tuple(closed), tuple(steps))


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Replicates of the field on an ordered corner family, one row per replicate."""

    corners: tuple[Corner, ...]
    values: np.ndarray
    params: KernelParams
    initial: InitialLaw
    seed: RngSeed

    def empirical_mean(self) -> np.ndarray:
        return self.values.mean(axis=0)

    def empirical_cov(self) -> np.ndarray:
        return np.atleast_2d(np.cov(self.values, rowvar=False, ddof=1))


def simulate(pl: Plan, params: KernelParams, initial: InitialLaw, replicates: int, seed: RngSeed) -> SamplePath:
    """Run the sequential sampler: one draw per corner, vectorized over replicates.

    Zero-variance steps contribute exactly their conditional mean. The
    output is deterministic given (plan, params, initial, replicates,
    seed): draws are consumed origin first, then one batch per step in
    plan order.
    """
    if replicates < 1:
        raise ConfigError(f"need at least one replicate, got {replicates}")
    params.measure.check_dim(pl.dim)
    transitions = [transition_params(params, step.increment) for step in pl.steps]
    gen = seed.generator()
    values = np.empty((replicates, len(pl.corners)))
    values[:, 0] = initial.draw(gen, replicates)
    for step, tp in zip(pl.steps, transitions):
        w = np.array([wt for _, wt in tp.weights])
        mean = values[:, list(step.parents)] @ w
        values[:, step.index] = mean + math.sqrt(tp.variance) * gen.standard_normal(replicates)
    return SamplePath(pl.corners, values, params, initial, seed)


def simulate_exact(corners, params: KernelParams, initial: InitialLaw, replicates: int, seed: RngSeed,
                   tiebreak: str = "lex") -> SamplePath:
    """Sample the joint law in one shot from its closed-form mean and covariance.

    Accepts the same corner family as :func:`plan` (a prebuilt Plan also
    works) and uses the identical ordering, so columns line up with
    :func:`simulate` output. With initial law N(mu0, v0) the joint moments
    are

        E[X_U]        = mu0 * exp(-lambda m(U)),
        Cov(X_U, X_V) = s * exp(-lambda m(U sym-diff V))
                        + (v0 - s) * exp(-lambda (m(U) + m(V))),

    with s = sigma^2/(2 lambda); a dirac x0 is the v0 = 0 case. Empirical
    initial laws have no closed-form joint Gaussian and are rejected.
    """
    if not initial.is_gaussian:
        raise ConfigError("simulate_exact needs a dirac or normal initial law")
    if replicates < 1:
        raise ConfigError(f"need at least one replicate, got {replicates}")
    pl = corners if isinstance(corners, Plan) else plan(corners, tiebreak=tiebreak)
    params.measure.check_dim(pl.dim)
    cs = pl.corners
    m = params.measure
    lam = params.lam
    sv = params.stationary_variance
    mu0, v0 = initial.mean, initial.variance
    ms = np.array([measure_rect(m, c) for c in cs])
    mean = mu0 * np.exp(-lam * ms)
    n = len(cs)
    cov = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            sym = math.exp(-lam * measure_symdiff(m, cs[i], cs[j]))
            both = math.exp(-lam * (ms[i] + ms[j]))
            cov[i, j] = cov[j, i] = sv * sym + (v0 - sv) * both
    draws = sample(GaussianSpec(mean, cov), replicates, seed)
    return SamplePath(cs, draws, params, initial, seed)
