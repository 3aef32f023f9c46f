"""Self-check suite: each check passes the real kernel and catches a corrupted one."""

import math

import numpy as np
import pytest

from siou.errors import ConfigError
from siou.gaussian import GaussianSpec, RngSeed
from siou.geometry import Corner
from siou.kernel import KernelParams
from siou.measures import MeasureSpec
from siou.simulator import InitialLaw, plan, simulate
from siou.verify import (
    BIG_STATISTIC,
    CheckReport,
    FlowSpec,
    check_continuity,
    check_flow_projection,
    check_kernel_schur,
    check_markov_orthogonality,
    check_mc_agreement,
    check_mc_moments,
    check_ou_reduction,
    check_psd,
    check_stationarity,
    matched_sequences,
    negative_control_reports,
    run_suite,
    sign_flipped_covariance,
    theory_dirac,
)


LEB = MeasureSpec.lebesgue()
P = KernelParams(1.0, math.sqrt(2.0), LEB)
FLOW = FlowSpec((Corner((0.0, 0.0)), Corner((0.5, 0.5)), Corner((1.5, 2.5))))


def test_report_construction_and_clamping():
    r = CheckReport.make("x", 1e400, 1.0, "overflowed")
    assert r.statistic == BIG_STATISTIC
    assert not r.passed
    ok = CheckReport.make("x", 0.5, 1.0)
    assert ok.passed
    j = ok.to_json()
    assert j["name"] == "x" and j["passed"] is True


def test_flow_spec_validation():
    with pytest.raises(ConfigError):
        FlowSpec((Corner((0.0,)),))  # needs two waypoints
    with pytest.raises(ConfigError):
        FlowSpec((Corner((0.5,)), Corner((1.0,))))  # must start at the origin
    with pytest.raises(ConfigError):
        FlowSpec((Corner((0.0, 0.0)), Corner((2.0, 2.0)), Corner((1.0, 3.0))))  # not monotone
    f = FlowSpec((Corner((0.0,)), Corner((2.0,)), Corner((3.0,))))
    assert f.max_param == 2.0
    assert f.corner_at(0.5).coords == (1.0,)
    assert f.corner_at(1.5).coords == (2.5,)
    with pytest.raises(ConfigError):
        f.corner_at(2.5)


def test_each_deterministic_check_passes_canonical_kernel():
    p2 = KernelParams(0.7, 1.1, LEB)
    assert check_psd(p2, 15, RngSeed(1)).passed
    assert check_kernel_schur(p2, 2, 15, RngSeed(2)).passed
    assert check_markov_orthogonality(p2, 2, 25, RngSeed(3)).passed
    assert check_continuity(p2, [FLOW], 1e-8 * p2.stationary_variance).passed
    v, u_seq, a_seq, _ = matched_sequences(LEB, 2)
    assert check_stationarity(p2, v, u_seq, a_seq).passed
    assert check_flow_projection(p2, FLOW).passed
    assert check_ou_reduction(p2).passed


def test_each_deterministic_check_fails_flipped_covariance():
    flip = sign_flipped_covariance
    assert not check_psd(P, 15, RngSeed(1), cov_fn=flip).passed
    assert not check_kernel_schur(P, 2, 15, RngSeed(2), cov_fn=flip).passed
    assert not check_markov_orthogonality(P, 2, 25, RngSeed(3), cov_fn=flip).passed
    assert not check_continuity(P, [FLOW], 1e-8 * P.stationary_variance, cov_fn=flip).passed
    v, u_seq, a_seq, _ = matched_sequences(LEB, 2)
    assert not check_stationarity(P, v, u_seq, a_seq, cov_fn=flip).passed
    assert not check_flow_projection(P, FLOW, cov_fn=flip).passed
    assert not check_ou_reduction(P, cov_fn=flip).passed


def test_negative_controls_all_fail():
    reports = negative_control_reports(RngSeed(7))
    assert len(reports) == 7
    assert all(not r.passed for r in reports)


def test_stationarity_rejects_bad_sequences():
    v, u_seq, a_seq, _ = matched_sequences(LEB, 2)
    with pytest.raises(ConfigError):
        check_stationarity(P, v, u_seq, [])
    with pytest.raises(ConfigError):
        check_stationarity(P, v, list(reversed(u_seq)), a_seq)
    # mismatched increment measures must be refused, not scored
    bad_a = [Corner((c.coords[0], c.coords[1] + 1.0)) for c in a_seq]
    with pytest.raises(ConfigError):
        check_stationarity(P, v, u_seq, bad_a)


def test_matched_sequences_really_match():
    from siou.geometry import canonicalize
    from siou.measures import measure_diff, measure_rect

    for measure, dim in ((LEB, 1), (LEB, 2), (MeasureSpec.axis((1.0, 0.5, 2.0)), 3)):
        v, u_seq, a_seq, _ = matched_sequences(measure, dim)
        for u, a in zip(u_seq, a_seq):
            d = measure_diff(measure, u, canonicalize([v]))
            assert abs(d - measure_rect(measure, a)) <= 1e-12


def test_ou_reduction_requires_lebesgue():
    with pytest.raises(ConfigError):
        check_ou_reduction(KernelParams(1.0, 1.0, MeasureSpec.axis((1.0, 1.0))))


def test_mc_moments_validation_and_pass():
    corners = [Corner((0.5, 0.5)), Corner((1.0, 1.0))]
    pl = plan(corners)
    theory = theory_dirac(P, pl.corners, 0.7)
    path = simulate(pl, P, InitialLaw.dirac(0.7), 5000, RngSeed(13))
    rep = check_mc_moments(path, theory)
    assert rep.passed
    with pytest.raises(ConfigError):
        check_mc_moments(path.values[:100], theory)
    with pytest.raises(ConfigError):
        check_mc_moments(path.values[:, :1], theory)


def test_mc_moments_catches_wrong_mean():
    gen = RngSeed(14).generator()
    values = gen.standard_normal((20_000, 1)) + 0.5
    theory = GaussianSpec(np.zeros(1), np.eye(1))
    assert not check_mc_moments(values, theory).passed


def test_mc_agreement_pass_and_shape_guard():
    gen = RngSeed(15).generator()
    a = gen.standard_normal((5000, 2))
    b = gen.standard_normal((5000, 2))
    theory = GaussianSpec(np.zeros(2), np.eye(2))
    assert check_mc_agreement(a, b, theory).passed
    with pytest.raises(ConfigError):
        check_mc_agreement(a, b[:100], theory)
    assert not check_mc_agreement(a, b + 0.3, theory).passed


def test_zero_variance_component_scores_zero():
    theory = GaussianSpec(np.array([0.7, 0.0]), np.diag([0.0, 1.0]))
    gen = RngSeed(16).generator()
    values = np.column_stack([np.full(2000, 0.7), gen.standard_normal(2000)])
    rep = check_mc_moments(values, theory)
    assert rep.passed
    values_bad = values.copy()
    values_bad[:, 0] = 0.7001
    assert not check_mc_moments(values_bad, theory).passed


def test_run_suite_deterministic_all_pass_with_unique_labels():
    reports = run_suite("deterministic", RngSeed(42), threads=2)
    assert reports and all(r.passed for r in reports)
    names = [r.name for r in reports]
    assert len(names) == len(set(names))


def test_run_suite_thread_count_does_not_change_reports():
    a = run_suite("deterministic", RngSeed(3), threads=1)
    b = run_suite("deterministic", RngSeed(3), threads=4)
    assert [(r.name, r.statistic) for r in a] == [(r.name, r.statistic) for r in b]


def test_run_suite_rejects_unknown_name():
    with pytest.raises(ConfigError):
        run_suite("everything", RngSeed(1))


def test_errored_check_keeps_its_label_and_fails():
    # a corrupted covariance makes conditioning routines raise; the runner
    # must convert that into a named failing report, not crash
    def explode(params, u, v):
        raise np.linalg.LinAlgError("boom")

    reports = run_suite("deterministic", RngSeed(5), threads=1, cov_fn=explode)
    assert all(not r.passed for r in reports)
    assert all(r.name != "unnamed" for r in reports)
