"""Verification harness: deterministic identity checks and Monte Carlo moment checks.

Deterministic checks compute the same quantity along two independent
routes (closed-form kernel vs linear-algebra conditioning, covariance vs
projected one-parameter forms, inclusion-exclusion vs direct measures) and
report the worst discrepancy against a fixed tolerance. Monte Carlo checks
compare empirical moments against closed-form moments in standard-error
units. Every check is deterministic given its seed and returns a
CheckReport; when a numerical route errors out the check fails with the
statistic pushed above any tolerance rather than raising.

Checks that consume a covariance take it as an injectable function so the
harness can prove it is not vacuous: the sign-flipped covariance fixture
must make every deterministic check fail, and
:func:`negative_control_reports` runs exactly that battery.
"""

from __future__ import annotations

import math
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, InternalConsistencyError, SiouError
from .gaussian import GaussianSpec, RngSeed, conditional
from .geometry import Corner, Increment, UnionSet, canonicalize, frontier
from .kernel import KernelParams, cov_dirac, cov_stationary, mean_dirac, transition_density, transition_params
from .measures import MeasureSpec, measure_diff, measure_rect
from .sheet import GridSpec, batch_paths, equivalent_kernel_params
from .simulator import InitialLaw, SamplePath, plan, simulate, simulate_exact

# Statistic value used when a route errors out: above any tolerance, still JSON-safe.
BIG_STATISTIC = 1e308

CovFn = Callable[[KernelParams, Corner, Corner], float]

__all__ = [
    "BIG_STATISTIC",
    "CheckReport",
    "FlowSpec",
    "stationary_covariance",
    "sign_flipped_covariance",
    "theory_dirac",
    "theory_stationary",
    "matched_sequences",
    "check_psd",
    "check_kernel_schur",
    "check_markov_orthogonality",
    "check_continuity",
    "check_stationarity",
    "check_flow_projection",
    "check_ou_reduction",
    "check_mc_moments",
    "check_mc_agreement",
    "run_suite",
    "negative_control_reports",
]


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one check: pass/fail, worst statistic, and its tolerance."""

    name: str
    passed: bool
    statistic: float
    tolerance: float
    details: str = ""

    def __post_init__(self):
        if self.passed != (self.statistic <= self.tolerance):
            raise ValueError("passed must equal statistic <= tolerance")

    @classmethod
    def make(cls, name: str, statistic: float, tolerance: float, details: str = "") -> "CheckReport":
        statistic = float(min(statistic, BIG_STATISTIC))
        if math.isnan(statistic):
            statistic = BIG_STATISTIC
        return cls(name, statistic <= tolerance, statistic, tolerance, details)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "statistic": self.statistic,
            "tolerance": self.tolerance,
            "details": self.details,
        }


@dataclass(frozen=True)
class FlowSpec:
    """Nondecreasing piecewise-linear path of corners, starting at the origin.

    Parameterized by arc index: corner_at(s) for s in [0, len-1]
    interpolates between waypoints floor(s) and floor(s)+1.
    """

    waypoints: tuple[Corner, ...]

    def __post_init__(self):
        ws = tuple(self.waypoints)
        if len(ws) < 2:
            raise ConfigError("a flow needs at least two waypoints")
        if any(c != 0.0 for c in ws[0].coords):
            raise ConfigError("flows must start at the origin")
        for a, b in zip(ws, ws[1:]):
            if not a.leq(b):
                raise ConfigError("flow waypoints must be componentwise nondecreasing")
        object.__setattr__(self, "waypoints", ws)

    @property
    def dim(self) -> int:
        return self.waypoints[0].dim

    @property
    def max_param(self) -> float:
        return float(len(self.waypoints) - 1)

    def corner_at(self, s: float) -> Corner:
        if not 0.0 <= s <= self.max_param:
            raise ConfigError(f"flow parameter {s} outside [0, {self.max_param}]")
        k = min(int(math.floor(s)), len(self.waypoints) - 2)
        frac = s - k
        a, b = self.waypoints[k], self.waypoints[k + 1]
        return Corner(tuple(x + frac * (y - x) for x, y in zip(a.coords, b.coords)))


def stationary_covariance(params: KernelParams, u: Corner, v: Corner) -> float:
    """The canonical covariance route; default for every deterministic check."""
    return cov_stationary(params, u, v)


def sign_flipped_covariance(params: KernelParams, u: Corner, v: Corner) -> float:
    """Deliberately corrupted covariance (exponent sign flipped): negative-control fixture."""
    from .measures import measure_symdiff

    return params.stationary_variance * math.exp(params.lam * measure_symdiff(params.measure, u, v))


def _gram(params: KernelParams, corners: Sequence[Corner], cov_fn: CovFn) -> np.ndarray:
    n = len(corners)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = cov_fn(params, corners[i], corners[j])
    return g


def theory_dirac(params: KernelParams, corners: Sequence[Corner], x0: float) -> GaussianSpec:
    """Closed-form joint law of the field at the corners, started from a point x0."""
    mean = np.array([mean_dirac(params, x0, c) for c in corners])
    n = len(corners)
    cov = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            cov[i, j] = cov[j, i] = cov_dirac(params, corners[i], corners[j])
    return GaussianSpec(mean, cov)


def theory_stationary(params: KernelParams, corners: Sequence[Corner]) -> GaussianSpec:
    """Closed-form joint law of the stationary field at the corners."""
    return GaussianSpec(np.zeros(len(corners)), _gram(params, corners, stationary_covariance))


def _quarter_corner(gen: np.random.Generator, dim: int, lo: int, hi: int) -> Corner:
    return Corner(tuple(0.25 * gen.integers(lo, hi + 1, size=dim).astype(float)))


def _random_measure(gen: np.random.Generator, dim: int) -> MeasureSpec:
    if gen.integers(0, 2) == 0:
        return MeasureSpec.lebesgue()
    return MeasureSpec.axis(tuple(0.25 * gen.integers(2, 9, size=dim).astype(float)))


def _random_increment(gen: np.random.Generator, dim: int, max_b: int = 5, min_b: int = 0) -> Increment:
    """Random increment on the quarter grid whose frontier admits the signed form.

    In three or more dimensions the inclusion-exclusion expansion can leave
    a corner with net coefficient beyond +/-1 (three sets whose pairwise
    meets all coincide already do it); those increments have no signed
    frontier representation and are rejected here, since the closed-form
    transition checks are statements about the representable ones.
    """
    for _ in range(200):
        a = _quarter_corner(gen, dim, 4, 12)
        k = int(gen.integers(min_b, max_b + 1))
        bs = []
        for _ in range(k):
            coords = tuple(0.25 * gen.integers(1, round(c / 0.25) + 1) for c in a.coords)
            bs.append(Corner(coords))
        inc = Increment(a, canonicalize(bs))
        try:
            frontier(inc)
        except InternalConsistencyError:
            continue
        return inc
    raise InternalConsistencyError("could not draw a representable increment in 200 attempts")


def check_psd(params: KernelParams, trials: int, seed: RngSeed, cov_fn: CovFn | None = None,
              max_corners: int = 12, name: str = "psd") -> CheckReport:
    """Gram matrices from the covariance must be positive semidefinite.

    Random corner sets of up to ``max_corners`` corners in dimensions 1 to
    3, under both measure kinds; the statistic is the worst
    -min_eigenvalue / trace seen.
    """
    cov_fn = cov_fn or stationary_covariance
    gen = seed.generator()
    worst = -math.inf
    for _ in range(trials):
        dim = int(gen.integers(1, 4))
        measure = _random_measure(gen, dim)
        local = KernelParams(params.lam, params.sigma, measure)
        corners: list[Corner] = []
        while len({c.coords for c in corners}) < 2:
            n = int(gen.integers(2, max_corners + 1))
            corners = [_quarter_corner(gen, dim, 1, 12) for _ in range(n)]
        g = _gram(local, corners, cov_fn)
        eigs = np.linalg.eigvalsh(g)
        worst = max(worst, -float(eigs[0]) / float(np.trace(g)))
    return CheckReport.make(name, worst, 1e-10, f"trials={trials}, max_corners={max_corners}")


def check_kernel_schur(params: KernelParams, dim: int, trials: int, seed: RngSeed,
                       cov_fn: CovFn | None = None, name: str = "kernel_schur") -> CheckReport:
    """Closed-form transition weights and variance must match Gaussian conditioning.

    For random increments, conditions the Gram matrix of (X_a, frontier)
    built from the covariance on the frontier block and compares the
    regression coefficients and residual variance against
    transition_params.
    """
    cov_fn = cov_fn or stationary_covariance
    params.measure.check_dim(dim)
    gen = seed.generator()
    worst = 0.0
    details = f"trials={trials}, dim={dim}"
    for _ in range(trials):
        inc = _random_increment(gen, dim)
        tp = transition_params(params, inc)
        corners = [inc.a] + [c for c, _ in tp.weights]
        g = _gram(params, corners, cov_fn)
        k = len(tp.weights)
        obs = list(range(1, k + 1))
        try:
            spec = GaussianSpec(np.zeros(k + 1), g)
            base = conditional(spec, obs, np.zeros(k))
            worst = max(worst, abs(float(base.cov[0, 0]) - tp.variance))
            for j in range(k):
                probe = conditional(spec, obs, np.eye(k)[j]).mean[0] - base.mean[0]
                worst = max(worst, abs(float(probe) - tp.weights[j][1]))
        except (SiouError, ValueError, np.linalg.LinAlgError) as exc:
            return CheckReport.make(name, BIG_STATISTIC, 1e-8, f"{details}; conditioning failed: {exc}")
    return CheckReport.make(name, worst, 1e-8, details)


def check_markov_orthogonality(params: KernelParams, dim: int, trials: int, seed: RngSeed,
                               cov_fn: CovFn | None = None, name: str = "markov_orthogonality") -> CheckReport:
    """Cov(X_U, X_a - sum_i w_i X_{F_i}) must vanish for U inside the union.

    U qualifies when [0, u] meets [0, a] inside the union of the b-corners,
    checked at set level (the clipped corner u ^ a lies under some
    b-corner). Generated U that fail the precondition are skipped and
    counted.
    """
    cov_fn = cov_fn or stationary_covariance
    params.measure.check_dim(dim)
    gen = seed.generator()
    worst = 0.0
    used = skipped = attempts = 0
    while used < trials and attempts < 50 * trials:
        attempts += 1
        inc = _random_increment(gen, dim, min_b=1)
        pick = int(gen.integers(0, len(inc.b.corners)))
        base = inc.b.corners[pick]
        roll = gen.random()
        if roll < 0.25:
            u = base
        elif roll < 0.40:
            u = _quarter_corner(gen, dim, 1, 12)  # unconstrained; often violates
        else:
            u = Corner(tuple(0.25 * gen.integers(0, round(c / 0.25) + 1) for c in base.coords))
        w = u.meet(inc.a)
        if not any(w.leq(b) for b in inc.b.corners):
            skipped += 1
            continue
        used += 1
        tp = transition_params(params, inc)
        resid = cov_fn(params, inc.a, u) - sum(wt * cov_fn(params, c, u) for c, wt in tp.weights)
        worst = max(worst, abs(resid))
    tol = 1e-9 * params.stationary_variance
    return CheckReport.make(name, worst, tol, f"pairs={used}, skipped={skipped} precondition violations, dim={dim}")


def check_continuity(params: KernelParams, flows: Sequence[FlowSpec], tolerance: float,
                     cov_fn: CovFn | None = None, refinements: int = 40, ratio: float = 0.5,
                     name: str = "continuity") -> CheckReport:
    """L2 increments along monotone flows must shrink to zero, monotonically.

    Approaches a target corner from inside and from outside along each
    flow with geometrically refining parameters. The statistic is the
    worst of: the final squared L2 gap, any negative gap, and any growth
    of the gap along the refinement.
    """
    cov_fn = cov_fn or stationary_covariance
    worst = -math.inf
    for flow in flows:
        params.measure.check_dim(flow.dim)
        big = flow.max_param
        for target, approach in ((big, "inner"), (big / 2.0, "outer")):
            u = flow.corner_at(target)
            c_uu = cov_fn(params, u, u)
            gaps = []
            for n in range(1, refinements + 1):
                if approach == "inner":
                    s = target * (1.0 - ratio**n)
                else:
                    s = target + (big - target) * ratio**n
                v = flow.corner_at(s)
                gaps.append(c_uu + cov_fn(params, v, v) - 2.0 * cov_fn(params, u, v))
            worst = max(worst, gaps[-1])
            worst = max(worst, max(-g for g in gaps))
            worst = max(worst, max(b - a for a, b in zip(gaps, gaps[1:])))
    return CheckReport.make(name, worst, tolerance, f"flows={len(flows)}, refinements={refinements}")


def check_stationarity(params: KernelParams, v: Corner, u_seq: Sequence[Corner], a_seq: Sequence[Corner],
                       cov_fn: CovFn | None = None, name: str = "m_stationarity") -> CheckReport:
    """Laws over V must match laws from the origin when increment measures match.

    Requires nested sequences with m(U_i minus V) equal to m(A_i); both
    Gram matrices must then coincide, and both must equal the closed-form
    Gram implied by the matched measures alone. Comparing against that
    predicted Gram keeps the check meaningful for corrupted covariances
    that would shift both empirical Grams the same way.
    """
    cov_fn = cov_fn or stationary_covariance
    m = params.measure
    if len(u_seq) != len(a_seq) or not u_seq:
        raise ConfigError("need matching nonempty corner sequences")
    for seq in (u_seq, a_seq):
        for a, b in zip(seq, seq[1:]):
            if not a.leq(b):
                raise ConfigError("corner sequences must be componentwise nondecreasing")
    diffs = [measure_diff(m, u, canonicalize([v])) for u in u_seq]
    targets = [measure_rect(m, a) for a in a_seq]
    mismatch = max(abs(d - t) for d, t in zip(diffs, targets))
    if mismatch > 1e-9:
        raise ConfigError(f"increment measures do not match the origin sequence (off by {mismatch})")
    gu = _gram(params, list(u_seq), cov_fn)
    ga = _gram(params, list(a_seq), cov_fn)
    sv = params.stationary_variance
    k = len(a_seq)
    predicted = np.array([[sv * math.exp(-params.lam * abs(targets[i] - targets[j])) for j in range(k)] for i in range(k)])
    worst = max(float(np.max(np.abs(gu - ga))), float(np.max(np.abs(gu - predicted))))
    return CheckReport.make(name, worst, 1e-10, f"k={k}, matched measures {targets}")


def check_flow_projection(params: KernelParams, flow: FlowSpec, cov_fn: CovFn | None = None,
                          n_points: int = 7, name: str = "flow_projection") -> CheckReport:
    """The field along a monotone flow must be a one-parameter OU process.

    Time-changes the flow by theta(s) = m(f(s)) and compares the
    covariance of projected pairs against the classical form
    s * exp(-lambda |theta(t) - theta(s)|).
    """
    cov_fn = cov_fn or stationary_covariance
    params.measure.check_dim(flow.dim)
    sv = params.stationary_variance
    ss = np.linspace(0.0, flow.max_param, n_points)
    corners = [flow.corner_at(float(s)) for s in ss]
    thetas = [measure_rect(params.measure, c) for c in corners]
    worst = 0.0
    for i in range(n_points):
        for j in range(i, n_points):
            lhs = cov_fn(params, corners[i], corners[j])
            rhs = sv * math.exp(-params.lam * abs(thetas[j] - thetas[i]))
            worst = max(worst, abs(lhs - rhs))
    return CheckReport.make(name, worst, 1e-10, f"points={n_points}")


def check_ou_reduction(params: KernelParams, cov_fn: CovFn | None = None,
                       name: str = "ou_reduction_1d") -> CheckReport:
    """In one Lebesgue dimension the kernel must be the classical OU kernel.

    Compares, over a grid of (s, t, x, y): the closed-form transition
    weight, variance and density against the textbook expressions, and the
    regression weight and residual variance implied by the covariance
    route. Pointwise agreement to 1e-12 is required.
    """
    cov_fn = cov_fn or stationary_covariance
    if params.measure.kind != "lebesgue":
        raise ConfigError("the one-dimensional reduction check uses the Lebesgue measure")
    lam, sv = params.lam, params.stationary_variance
    worst = 0.0
    for s in (0.0, 0.3, 1.1):
        for dt in (0.2, 0.7, 1.6):
            t = s + dt
            w_ref = math.exp(-lam * dt)
            var_ref = sv * (1.0 - math.exp(-2.0 * lam * dt))
            inc = Increment(Corner((t,)), canonicalize([Corner((s,))]))
            tp = transition_params(params, inc)
            if len(tp.weights) != 1:
                return CheckReport.make(name, BIG_STATISTIC, 1e-12, f"expected one frontier corner, got {len(tp.weights)}")
            worst = max(worst, abs(tp.weights[0][1] - w_ref), abs(tp.variance - var_ref))
            g = _gram(params, [Corner((t,)), Corner((s,))], cov_fn)
            beta = g[0, 1] / g[1, 1]
            resid = g[0, 0] - g[0, 1] ** 2 / g[1, 1]
            worst = max(worst, abs(beta - w_ref), abs(resid - var_ref))
            for x in (-1.2, 0.0, 0.8):
                for y in (-0.5, 0.3, 1.2):
                    dens_ref = math.exp(-((y - x * w_ref) ** 2) / (2.0 * var_ref)) / math.sqrt(2.0 * math.pi * var_ref)
                    worst = max(worst, abs(transition_density(tp, [x], y) - dens_ref))
    return CheckReport.make(name, worst, 1e-12, "grid of (s, t, x, y) values")


def _moment_zscores(values: np.ndarray, theory: GaussianSpec) -> tuple[float, str]:
    n, d = values.shape
    emp_mean = values.mean(axis=0)
    emp_cov = np.atleast_2d(np.cov(values, rowvar=False, ddof=1))
    tc = theory.cov
    worst = 0.0
    where = ""
    for i in range(d):
        se = math.sqrt(tc[i, i] / n)
        z = _z_or_exact(emp_mean[i] - theory.mean[i], se)
        if z > worst:
            worst, where = z, f"mean[{i}]"
    for i in range(d):
        for j in range(i, d):
            se = math.sqrt((tc[i, i] * tc[j, j] + tc[i, j] ** 2) / n)
            z = _z_or_exact(emp_cov[i, j] - tc[i, j], se)
            if z > worst:
                worst, where = z, f"cov[{i},{j}]"
    return worst, where


def _z_or_exact(diff: float, se: float) -> float:
    # A zero-variance component must match its target up to the summation
    # error of averaging ~1e5 identical floats; any genuine law error moves
    # the moment by orders of magnitude more than this window.
    if se == 0.0:
        return 0.0 if abs(diff) <= 1e-9 else BIG_STATISTIC
    return abs(diff) / se


def check_mc_moments(observed: SamplePath | np.ndarray, theory: GaussianSpec,
                     name: str = "mc_moments", min_replicates: int = 1000) -> CheckReport:
    """Empirical mean and covariance must sit within 5 standard errors of theory.

    Standard errors use the Gaussian fourth-moment formula with the theory
    values; a zero-variance component must match exactly and scores 0.
    """
    values = observed.values if isinstance(observed, SamplePath) else np.asarray(observed, dtype=float)
    if values.ndim != 2 or values.shape[1] != theory.dim:
        raise ConfigError(f"observed values of shape {values.shape} do not fit theory dimension {theory.dim}")
    n = values.shape[0]
    if n < min_replicates:
        raise ConfigError(f"need at least {min_replicates} replicates for a moment check, got {n}")
    worst, where = _moment_zscores(values, theory)
    return CheckReport.make(name, worst, 5.0, f"replicates={n}, worst at {where}")


def check_mc_agreement(a: SamplePath | np.ndarray, b: SamplePath | np.ndarray, theory: GaussianSpec,
                       name: str = "mc_agreement", min_replicates: int = 1000) -> CheckReport:
    """Two samplers of the same law must agree within 5 standard errors of their difference."""
    va = a.values if isinstance(a, SamplePath) else np.asarray(a, dtype=float)
    vb = b.values if isinstance(b, SamplePath) else np.asarray(b, dtype=float)
    if va.shape != vb.shape:
        raise ConfigError(f"samplers disagree on shape: {va.shape} vs {vb.shape}")
    if va.shape[0] < min_replicates:
        raise ConfigError(f"need at least {min_replicates} replicates, got {va.shape[0]}")
    n, d = va.shape
    tc = theory.cov
    worst = 0.0
    where = ""
    ma, mb = va.mean(axis=0), vb.mean(axis=0)
    ca = np.atleast_2d(np.cov(va, rowvar=False, ddof=1))
    cb = np.atleast_2d(np.cov(vb, rowvar=False, ddof=1))
    root2 = math.sqrt(2.0)
    for i in range(d):
        se = root2 * math.sqrt(tc[i, i] / n)
        z = _z_or_exact(ma[i] - mb[i], se)
        if z > worst:
            worst, where = z, f"mean[{i}]"
    for i in range(d):
        for j in range(i, d):
            se = root2 * math.sqrt((tc[i, i] * tc[j, j] + tc[i, j] ** 2) / n)
            z = _z_or_exact(ca[i, j] - cb[i, j], se)
            if z > worst:
                worst, where = z, f"cov[{i},{j}]"
    return CheckReport.make(name, worst, 5.0, f"replicates={n}, worst at {where}")


def matched_sequences(measure: MeasureSpec, dim: int, k: int = 4) -> tuple[Corner, list[Corner], list[Corner], str]:
    """Build nested sequences with m(U_i minus V) = m(A_i) for the stationarity check.

    V is the unit corner; U_i grows out of V along the first axis, and A_i
    grows from the origin along the last axis with its coordinate solved
    so the measures match exactly for the given measure kind.
    """
    v = Corner((1.0,) * dim)
    ts = [0.5 * (i + 1) for i in range(k)]
    u_seq = [Corner((1.0 + t,) + (1.0,) * (dim - 1)) for t in ts]
    if measure.kind == "lebesgue":
        if dim == 1:
            a_seq = [Corner((t,)) for t in ts]
        else:
            a_seq = [Corner((1.0,) * (dim - 1) + (t,)) for t in ts]
        note = "U grows along axis 0 out of the unit corner; A grows along the last axis"
    else:
        scale = measure.alpha[0] / measure.alpha[dim - 1]
        a_seq = [Corner((0.0,) * (dim - 1) + (scale * t,)) for t in ts]
        note = "axis measure: A coordinate rescaled by alpha_0/alpha_last"
    return v, u_seq, a_seq, note


# ---------------------------------------------------------------------------
# Suites


DETERMINISTIC_LAMBDAS = (0.5, 1.0, 2.0)
DETERMINISTIC_SIGMA2 = (1.0, 2.0)
DETERMINISTIC_DIMS = (1, 2, 3)
_AXIS_ALPHAS = {1: (1.0,), 2: (1.0, 0.5), 3: (1.0, 0.5, 2.0)}


def _flows_for(dim: int) -> list[FlowSpec]:
    origin = Corner.origin(dim)
    diag = FlowSpec((origin, Corner((1.5,) * dim)))
    if dim == 1:
        other = FlowSpec((origin, Corner((0.8,)), Corner((2.0,))))
    else:
        elbow = Corner((1.5,) + (0.0,) * (dim - 1))
        other = FlowSpec((origin, elbow, Corner((1.5,) * dim)))
    return [diag, other]


def _measures_for(dim: int) -> list[MeasureSpec]:
    return [MeasureSpec.lebesgue(), MeasureSpec.axis(_AXIS_ALPHAS[dim])]


def build_deterministic_checks(seed: RngSeed, cov_fn: CovFn | None = None) -> list[Callable[[], CheckReport]]:
    """Thunks for the deterministic battery over the parameter matrix."""
    thunks: list[Callable[[], CheckReport]] = []

    def add(label: str, fn: Callable[[], CheckReport]) -> None:
        wrapped = lambda fn=fn, label=label: replace(fn(), name=label)  # noqa: E731
        wrapped.check_label = label
        thunks.append(wrapped)

    counter = iter(range(100_000))
    for lam in DETERMINISTIC_LAMBDAS:
        for sig2 in DETERMINISTIC_SIGMA2:
            sigma = math.sqrt(sig2)
            tag = f"lam={lam},sigma2={sig2}"
            base = KernelParams(lam, sigma, MeasureSpec.lebesgue())
            psd_seed = seed.child(next(counter))
            add(f"psd[{tag}]", lambda p=base, s=psd_seed: check_psd(p, 10, s, cov_fn=cov_fn))
            add(f"ou_reduction_1d[{tag}]", lambda p=base: check_ou_reduction(p, cov_fn=cov_fn))
            for dim in DETERMINISTIC_DIMS:
                for measure in _measures_for(dim):
                    params = KernelParams(lam, sigma, measure)
                    sub = f"{tag},N={dim},{measure.kind}"
                    s1, s2 = seed.child(next(counter)), seed.child(next(counter))
                    add(f"kernel_schur[{sub}]", lambda p=params, d=dim, s=s1: check_kernel_schur(p, d, 10, s, cov_fn=cov_fn))
                    add(f"markov_orthogonality[{sub}]",
                        lambda p=params, d=dim, s=s2: check_markov_orthogonality(p, d, 20, s, cov_fn=cov_fn))
                    flows = _flows_for(dim)
                    add(f"continuity[{sub}]",
                        lambda p=params, f=flows: check_continuity(p, f, 1e-8 * p.stationary_variance, cov_fn=cov_fn))
                    v, u_seq, a_seq, _ = matched_sequences(measure, dim)
                    add(f"m_stationarity[{sub}]",
                        lambda p=params, vv=v, us=u_seq, asq=a_seq: check_stationarity(p, vv, us, asq, cov_fn=cov_fn))
                    for fi, flow in enumerate(flows):
                        add(f"flow_projection[{sub},flow={fi}]",
                            lambda p=params, f=flow: check_flow_projection(p, f, cov_fn=cov_fn))
    return thunks


MC_FAMILY_2D = ((0.5, 0.5), (1.0, 2.0), (2.0, 1.0), (2.0, 2.0))


def build_mc_checks(seed: RngSeed) -> list[Callable[[], CheckReport]]:
    """Thunks for the Monte Carlo battery: sampler laws and sheet representation."""
    params = KernelParams(1.0, math.sqrt(2.0), MeasureSpec.lebesgue())
    corners = [Corner(c) for c in MC_FAMILY_2D]
    pl = plan(corners)
    thunks: list[Callable[[], CheckReport]] = []

    def dirac_markov() -> CheckReport:
        path = simulate(pl, params, InitialLaw.dirac(0.7), 100_000, seed.child(0))
        return check_mc_moments(path, theory_dirac(params, pl.corners, 0.7), name="mc.dirac_markov")

    def dirac_exact() -> CheckReport:
        path = simulate_exact(pl, params, InitialLaw.dirac(0.7), 100_000, seed.child(1))
        return check_mc_moments(path, theory_dirac(params, pl.corners, 0.7), name="mc.dirac_exact")

    def dirac_agreement() -> CheckReport:
        a = simulate(pl, params, InitialLaw.dirac(0.7), 100_000, seed.child(0))
        b = simulate_exact(pl, params, InitialLaw.dirac(0.7), 100_000, seed.child(1))
        return check_mc_agreement(a, b, theory_dirac(params, pl.corners, 0.7), name="mc.dirac_agreement")

    def stationary_markov() -> CheckReport:
        initial = InitialLaw.normal(0.0, params.stationary_variance)
        path = simulate(pl, params, initial, 100_000, seed.child(2))
        return check_mc_moments(path, theory_stationary(params, pl.corners), name="mc.stationary_markov")

    def sheet_1d() -> CheckReport:
        alpha, sigma, y0 = (1.2,), 1.0, 0.4
        grid = GridSpec((-3.0,), (1.5,), (90,))
        points = [Corner((0.3,)), Corner((0.75,)), Corner((1.5,))]
        values = batch_paths(grid, alpha, sigma, points, 20_000, seed.child(3), y0=y0)
        eq = equivalent_kernel_params(alpha, sigma)
        return check_mc_moments(values, theory_dirac(eq, points, y0), name="mc.sheet_reduction_1d")

    def sheet_2d() -> CheckReport:
        alpha, sigma, step = (1.0, 2.0), 1.0, 0.05
        grid = GridSpec((-3.5, -3.5), (1.0, 1.0), (90, 90))
        points = [Corner((0.25, 0.5)), Corner((0.6, 0.3)), Corner((1.0, 1.0))]
        values = batch_paths(grid, alpha, sigma, points, 20_000, seed.child(4), stationary=True)
        eq = equivalent_kernel_params(alpha, sigma)
        theory = theory_stationary(eq, points)
        n = values.shape[0]
        emp_mean = values.mean(axis=0)
        emp_cov = np.atleast_2d(np.cov(values, rowvar=False, ddof=1))
        allowance = 2.0 * step
        worst = 0.0
        where = ""
        for i in range(len(points)):
            z = abs(emp_mean[i]) / math.sqrt(theory.cov[i, i] / n)
            if z > worst:
                worst, where = z, f"mean[{i}]"
            for j in range(i, len(points)):
                se = math.sqrt((theory.cov[i, i] * theory.cov[j, j] + theory.cov[i, j] ** 2) / n)
                excess = max(abs(emp_cov[i, j] - theory.cov[i, j]) - allowance, 0.0) / se
                if excess > worst:
                    worst, where = excess, f"cov[{i},{j}]"
        details = f"replicates={n}, allowance={allowance}, worst at {where}"
        return CheckReport.make("mc.sheet_representation_2d", worst, 5.0, details)

    for fn, label in ((dirac_markov, "mc.dirac_markov"), (dirac_exact, "mc.dirac_exact"),
                      (dirac_agreement, "mc.dirac_agreement"), (stationary_markov, "mc.stationary_markov"),
                      (sheet_1d, "mc.sheet_reduction_1d"), (sheet_2d, "mc.sheet_representation_2d")):
        fn.check_label = label
        thunks.append(fn)
    return thunks


def _resolve_threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("SIOU_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"SIOU_THREADS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def run_suite(which: str, seed: RngSeed, threads: int | None = None,
              cov_fn: CovFn | None = None) -> list[CheckReport]:
    """Run a named check suite and return one report per check, in a stable order.

    ``which`` is "deterministic", "mc" or "all". Checks may run on a
    thread pool (capped by ``threads`` or the SIOU_THREADS environment
    variable); each owns a derived seed stream, so results do not depend
    on scheduling.
    """
    thunks: list[Callable[[], CheckReport]] = []
    if which in ("deterministic", "all"):
        thunks.extend(build_deterministic_checks(seed, cov_fn=cov_fn))
    if which in ("mc", "all"):
        thunks.extend(build_mc_checks(seed.child(10_000)))
    if not thunks:
        raise ConfigError(f"unknown suite {which!r}; pick deterministic, mc or all")

    def guarded(thunk: Callable[[], CheckReport]) -> CheckReport:
        label = getattr(thunk, "check_label", "unnamed")
        try:
            return thunk()
        except (SiouError, np.linalg.LinAlgError) as exc:
            return CheckReport.make(label, BIG_STATISTIC, 0.0, f"errored {type(exc).__name__}: {exc}")

    workers = _resolve_threads(threads)
    if workers == 1:
        return [guarded(t) for t in thunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(guarded, thunks))


def negative_control_reports(seed: RngSeed) -> list[CheckReport]:
    """Every deterministic check run against the sign-flipped covariance fixture.

    All of these must FAIL; a pass would mean the corresponding check
    cannot see a corrupted kernel.
    """
    params = KernelParams(1.0, math.sqrt(2.0), MeasureSpec.lebesgue())
    params2 = KernelParams(1.0, math.sqrt(2.0), MeasureSpec.axis((1.0, 0.5)))
    flows = _flows_for(2)
    v, u_seq, a_seq, _ = matched_sequences(MeasureSpec.lebesgue(), 2)
    flip = sign_flipped_covariance
    reports = [
        check_psd(params, 10, seed.child(0), cov_fn=flip),
        check_kernel_schur(params2, 2, 10, seed.child(1), cov_fn=flip),
        check_markov_orthogonality(params, 2, 20, seed.child(2), cov_fn=flip),
        check_continuity(params, flows, 1e-8 * params.stationary_variance, cov_fn=flip),
        check_stationarity(params, v, u_seq, a_seq, cov_fn=flip),
        check_flow_projection(params, flows[1], cov_fn=flip),
        check_ou_reduction(params, cov_fn=flip),
    ]
    return reports
