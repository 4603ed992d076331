import math

import numpy as np
import pytest

from gausspsh import functions as fn
from gausspsh import lab
from gausspsh.measure import CovarianceSpec, MCConfig, build_grid, permanent
from gausspsh.semigroups import HypothesisError

SHIFT = fn.make_field(fn.LogPshProduct(((fn.HoloPoly(1, {(1,): 1, (0,): 1}), 2),)))


def test_verdict_rules():
    assert lab.InequalityReport(2, 1).verdict == lab.HOLDS
    assert lab.InequalityReport(1 - 1e-3, 1, 1e-3).verdict == lab.HOLDS_WITHIN_ERROR
    assert lab.InequalityReport(0.9, 1, 1e-3).verdict == lab.VIOLATED
    assert lab.InequalityReport(1 - 1e-13, 1).verdict == lab.HOLDS_WITHIN_ERROR
    rep = lab.InequalityReport(3, 1, method="x")
    assert rep.margin == 2 and rep.to_dict()["margin"] == 2 and rep.ok


def test_correlation_abs2_pair():
    # E|G|^4 - (E|G|^2)^2 = 2 - 1
    rep = lab.correlation_gap(fn.abs_power(2), fn.abs_power(2), m=30)
    assert rep.margin == pytest.approx(1, abs=1e-8)
    assert rep.verdict == lab.HOLDS


def test_correlation_mc_route():
    rep = lab.correlation_gap(fn.abs_power(2), SHIFT, method="mc", cfg=MCConfig(200_000, 1, 20))
    assert abs(rep.margin - 1) < 4 * math.hypot(rep.stderr_lhs, rep.stderr_rhs) + 0.02
    assert "mc(" in rep.method


def test_correlation_requires_circular_f():
    with pytest.raises(HypothesisError):
        lab.correlation_gap(SHIFT, fn.abs_power(2))
    rep = lab.correlation_gap(SHIFT, fn.abs_power(2), force=True)
    assert rep.hypothesis == "out-of-hypothesis"


def test_correlation_error_bar_for_nonsmooth_pair():
    f = fn.abs_power(1 / 3)
    rep = lab.correlation_gap(f, SHIFT, m=20)
    assert rep.stderr_lhs > 0
    exact_f = math.gamma(1 + 1 / 6)
    assert abs(rep.extra["int_f"] - exact_f) <= 4 * rep.stderr_lhs + 1e-2


def test_moment_split_rho_case():
    rho = 1 / math.sqrt(2)
    spec = CovarianceSpec.from_covariance([[1, rho], [rho, 1]])
    rep = lab.moment_split_report(spec, [2, 2], 1)
    assert rep.lhs == pytest.approx(1.5, abs=1e-15)
    assert rep.margin == pytest.approx(0.5, abs=1e-15)
    assert rep.extra["product_holds"]


def test_moment_split_mc_route():
    spec = CovarianceSpec([[1, 0], [0.5, 0.5j]])
    rep = lab.moment_split_report(spec, [1.0, 3.0], 1, MCConfig(200_000, 0, 20))
    assert rep.ok and rep.stderr_lhs > 0


def test_moment_split_validation():
    spec = CovarianceSpec(np.eye(2))
    with pytest.raises(ValueError):
        lab.moment_split_report(spec, [2], 1)
    with pytest.raises(ValueError):
        lab.moment_split_report(spec, [2, 2], 2)


def test_lieb_check():
    rng = np.random.default_rng(0)
    C = lab.random_psd(5, rng)
    for k in range(1, 5):
        rep = lab.lieb_check(C, k)
        assert rep.lhs == pytest.approx(permanent(C).real)
        assert rep.margin >= -1e-9
    with pytest.raises(ValueError):
        lab.lieb_check(np.diag([1.0, -1.0]), 1)
    with pytest.raises(ValueError):
        lab.lieb_check(np.eye(3), 3)


def test_alpha_curve_closed_forms():
    ts = lab.default_t_grid(10)
    c = lab.alpha_curve(fn.abs_power(2), fn.abs_power(2), ts)
    assert np.allclose(c.values, 1 + np.exp(-ts), atol=1e-12)
    c4 = lab.alpha_curve(fn.abs_power(4), fn.abs_power(2), ts)
    assert np.allclose(c4.values, 2 + 4 * np.exp(-ts), atol=1e-10)
    assert c4.monotone and c4.convex
    assert abs(c4.limit_gap) < 1e-6 and c4.limit == pytest.approx(2)
    assert c4.cross_residual < 1e-10


def test_alpha_prime_and_second_form():
    f, g = fn.abs_power(4), fn.abs_power(2)
    fd, integral = lab.alpha_prime_two_ways(f, g, 0.5)
    assert fd == pytest.approx(-4 * math.exp(-0.5), rel=1e-5)
    assert fd == pytest.approx(integral, abs=1e-4)
    for path in ("ou", "pt"):
        assert lab.alpha_second_form(f, g, 0.5, path=path) == pytest.approx(4 * math.exp(-0.5), rel=1e-5)


def test_alpha_requires_circular():
    with pytest.raises(HypothesisError):
        lab.alpha_curve(SHIFT, fn.abs_power(2))


def test_alpha_curve_serialization():
    c = lab.alpha_curve(fn.abs_power(2), SHIFT, lab.default_t_grid(5))
    lines = c.to_csv().splitlines()
    assert lines[0] == "t,alpha,d1,d2" and len(lines) == 6
    d = c.to_dict()
    assert set(d) >= {"t", "alpha", "d1", "d2", "monotone", "convex", "limit_gap"}
    with pytest.raises(ValueError):
        lab.AlphaCurve(np.array([1.0, 0.5]), np.ones(2), np.ones(2), np.ones(2), np.ones(2),
                       np.zeros(2), 1.0, 0.0)


def test_hessian_discrepancy():
    for z, expect in ((1.0, -4 / 3), (8.0, -8 / 3)):
        ct, rt = lab.hessian_discrepancy_demo([z])
        assert rt == pytest.approx(expect, abs=1e-3)
        # complex pairing: (1/36)|z|^{-5/3} * 4|z|^2
        assert ct == pytest.approx(abs(z) ** (1 / 3) / 9, rel=1e-5)


def test_random_instances_are_reproducible():
    a = lab.random_logpsh(2, lab.instance_rng(5, 3))
    b = lab.random_logpsh(2, lab.instance_rng(5, 3))
    assert a.to_dict() == b.to_dict()
    assert a.homogeneous
    p = lab.random_logpsh(3, lab.instance_rng(1, 1), homogeneous=False, weight_cap=4)
    weight = sum(al * max(sum(i) for i in P.terms) for P, al in p.factors)
    assert weight <= 4 + 1e-12


def test_small_audits():
    reps = lab.theorem_audit(count=12, seed=3, cfg=MCConfig(50_000, 3, 10))
    assert all(r.ok for r in reps)
    assert [r.extra["n"] for r in reps[:3]] == [1, 2, 3]
    assert all(r.margin >= -1e-9 for r in lab.lieb_audit(count=10, seed=3, max_dim=5))


def test_audits_do_not_depend_on_threads():
    a = lab.theorem_audit(count=6, seed=1, cfg=MCConfig(20_000, 1, 10), threads=1)
    b = lab.theorem_audit(count=6, seed=1, cfg=MCConfig(20_000, 1, 10), threads=3)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]


def test_moment_equivalence_audit_small():
    rows = lab.moment_equivalence_audit(count=3, seed=2, max_order=2, cfg=MCConfig(100_000, 2, 20))
    for _, p, exact, est, se in rows:
        assert abs(est - exact) <= 4 * se + 1e-12


def test_commutation_and_spectrum_audits():
    rows = lab.commutation_audit(trials=6, seed=4)
    assert max(max(r["holo"], r["antiholo"]) for r in rows) < 1e-5
    res, factors = lab.commutation_convergence(fn.abs_power(4), 0.5, [0.3 + 0.2j], 0, build_grid(1, 40))
    assert all(3.5 <= q <= 4.5 for q in factors)
    out = lab.spectrum_audit(seed=0)
    assert max(out["eigen"].values()) < 1e-6


def test_alpha_limit_decays_geometrically():
    f, g = fn.abs_power(4), SHIFT
    curve = lab.alpha_curve(f, g, [10.0, 20.0, 40.0])
    gaps = np.abs(curve.values - curve.limit)
    for a, b in zip(gaps, gaps[1:]):
        assert b <= a / 2 or b < 1e-12
