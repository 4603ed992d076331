"""Reduced-size invariant suites for every module (the ``selftest`` command)."""
from __future__ import annotations

import math
from collections import OrderedDict

import numpy as np

from . import functions as fn
from . import lab, operators as ops, semigroups as sg
from .calculus import FDStep, complex_hessian, is_psd, real_hessian
from .measure import MCConfig, CovarianceSpec, build_grid, integrate, integrate_mc, permanent, wick_moment


def _rand_points(rng, k, n, scale=1.0):
    return scale * (rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))) / math.sqrt(2)


# --- calculus ---------------------------------------------------------------


def check_hessian_hermitian(seed):
    rng = np.random.default_rng([seed, 1])
    worst = 0.0
    for _ in range(10):
        f = fn.make_field(lab.random_logpsh(2, rng, homogeneous=False))
        H = complex_hessian(f, _rand_points(rng, 5, 2))
        worst = max(worst, float(np.max(np.abs(H - np.conj(np.swapaxes(H, -1, -2))))))
    return worst == 0.0, {"max_asymmetry": worst}


def check_psh_psd(seed):
    rng = np.random.default_rng([seed, 2])
    bad = 0
    for _ in range(20):
        p = lab.random_logpsh(2, rng, homogeneous=bool(rng.integers(2)))
        f = fn.make_field(p)
        Z = _rand_points(rng, 5, 2)
        keep = np.min([np.abs(P(Z)) for P, _ in p.factors], axis=0) > 0.05
        for H, v in zip(complex_hessian(f, Z[keep]), f(Z[keep])):
            scale = max(1.0, float(np.max(np.abs(H))))
            bad += not is_psd(H, 1e-6 * scale)
    return bad == 0, {"non_psd": bad}


def check_fd_convergence(seed):
    f = fn.exp_linear(0.5)
    z = np.array([0.3 + 0.2j])
    exact = 0.5 * f(z)[()]  # d2/dz dzbar of exp(a z + zbar) = a f
    errs = [abs(complex_hessian(f, z, FDStep(h))[0, 0] - exact) for h in (4e-2, 2e-2)]
    factor = errs[0] / errs[1]
    return 3.5 <= factor <= 4.5, {"factor": factor}


def check_wirtinger_consistency(seed):
    rng = np.random.default_rng([seed, 3])
    f = fn.field_from_callable(lambda w: np.abs(w[..., 0] + 2 * w[..., 1]) ** 4, n=2)
    Z = _rand_points(rng, 5, 2)
    rt = np.trace(real_hessian(f, Z), axis1=-2, axis2=-1) / 4
    ct = np.real(np.trace(complex_hessian(f, Z), axis1=-2, axis2=-1))
    gap = float(np.max(np.abs(rt - ct) / np.maximum(1, np.abs(ct))))
    return gap < 1e-6, {"gap": gap}


def check_discrepancy(seed):
    c1, r1 = lab.hessian_discrepancy_demo([1.0])
    c8, r8 = lab.hessian_discrepancy_demo([8.0])
    ok = abs(r1 + 4 / 3) < 1e-3 and abs(r8 + 8 / 3) < 1e-3 and c1 >= 0 and c8 >= 0
    return ok, {"real_trace_z1": r1, "real_trace_z8": r8, "complex_trace_z1": c1, "complex_trace_z8": c8}


# --- measure ------------------------------------------------------------------


def check_grid_moments(seed):
    g = build_grid(1, 20)
    vals = [integrate(fn.abs_power(2 * p), g) for p in range(4)]
    err = max(abs(v - math.factorial(p)) for p, v in enumerate(vals))
    return err < 1e-10, {"max_error": err}


def check_grid_exactness(seed):
    rng = np.random.default_rng([seed, 4])
    n, m = 2, 6
    g = build_grid(n, m)
    worst = 0.0
    for _ in range(10):
        a = rng.integers(0, m, size=n)
        # exact: E z^a zbar^b = prod a_j! when a == b, else 0
        b = a.copy() if rng.random() < 0.5 else rng.integers(0, m, size=n)
        if a.sum() + b.sum() >= 2 * m:
            continue
        val = integrate(fn.ScalarField(lambda w, a=a, b=b: np.prod(w**a * np.conj(w) ** b, axis=-1), n=n), g)
        exact = float(np.prod([math.factorial(int(k)) for k in a])) if np.array_equal(a, b) else 0.0
        worst = max(worst, abs(val - exact) / max(1.0, abs(exact)))
    return worst < 1e-9, {"max_rel_error": worst}


def check_permanent(seed):
    from itertools import permutations

    rng = np.random.default_rng([seed, 5])
    worst = 0.0
    for m in (2, 3, 4, 5, 6):
        A = _rand_points(rng, m, m)
        brute = sum(np.prod([A[i, s[i]] for i in range(m)]) for s in permutations(range(m)))
        worst = max(worst, abs(permanent(A) - brute) / abs(brute))
    rho = 1 / math.sqrt(2)
    two = permanent(np.array([[1, rho], [rho, 1]]))
    return worst < 1e-12 and abs(two - 1.5) < 1e-15, {"max_rel_error": worst, "rho_case": two.real}


def check_wick_vs_mc(seed):
    rows = lab.moment_equivalence_audit(count=3, seed=seed, max_order=3, N_max=3,
                                        cfg=MCConfig(100_000, seed, 50))
    z = max(abs(est - exact) / se if se > 0 else abs(est - exact) for _, _, exact, est, se in rows)
    return z <= 4.0, {"max_z": z}


def check_mc_determinism(seed):
    cfg = MCConfig(20_000, seed, 10)
    a = integrate_mc(fn.abs_power(2), 1, cfg)
    b = integrate_mc(fn.abs_power(2), 1, cfg)
    return a == b, {"estimate": a[0]}


# --- functions ---------------------------------------------------------------


def check_circular_products(seed):
    rng = np.random.default_rng([seed, 7])
    bad = 0
    for _ in range(30):
        f = fn.make_field(lab.random_logpsh(int(rng.integers(1, 4)), rng, homogeneous=True))
        bad += not (f.is_circular and fn.circular_check(f, f.n, trials=20, tol=1e-10, seed=seed))
    return bad == 0, {"failures": bad}


def check_bessel(seed):
    b1 = fn.bessel_B(1.0)
    partial = sum(1 / math.factorial(k) ** 2 for k in range(20))
    x = 2.5
    theta = 2 * np.pi * np.arange(256) / 256
    quad = float(np.mean(np.exp(2 * math.sqrt(x) * np.cos(theta))))
    xs = np.linspace(0, 10, 101)
    B = np.array([fn.bessel_B(v) for v in xs])
    shape_ok = bool(np.all(np.diff(B) > 0) and np.all(np.diff(B, 2) >= 0))
    ok = abs(b1 - partial) < 1e-15 and abs(fn.bessel_B(x) - quad) < 1e-10 and shape_ok
    return ok, {"B1": b1, "theta_gap": abs(fn.bessel_B(x) - quad)}


def check_rotation_compat(seed):
    rng = np.random.default_rng([seed, 8])
    f = fn.make_field(lab.random_logpsh(2, rng, homogeneous=False))
    W = _rand_points(rng, 10, 2)
    th = 0.7
    gap = float(np.max(np.abs(f.rotated(th)(W) - f(np.exp(1j * th) * W))))
    return gap == 0.0, {"gap": gap}


# --- semigroups ---------------------------------------------------------------


def check_pt_fa(seed):
    g = build_grid(1, 40)
    a, t, z = 0.5, 1.0, np.array([0.3 + 0.1j])
    s2 = sg.SemigroupTime(t).s2
    exact = np.exp(s2 * a) * np.exp(a * z[0] + (1 - s2) * np.conj(z[0]))
    gap = abs(sg.pt_apply(fn.exp_linear(a), t, z, g) - exact) / abs(exact)
    return gap < 1e-8, {"rel_gap": gap}


def check_compose(seed):
    rng = np.random.default_rng([seed, 9])
    g = build_grid(1, 20)
    worst = 0.0
    for t in (0.3, 0.5, 0.7):
        for s in (0.3, 0.5, 0.7):
            xi, w = _rand_points(rng, 2, 1, 0.7)
            worst = max(worst, sg.compose_check(t, s, xi, w, g))
    return worst < 1e-6, {"max_residual": worst}


def check_circular_average(seed):
    rng = np.random.default_rng([seed, 10])
    worst = 0.0
    for _ in range(5):
        z, w = _rand_points(rng, 2, 2)
        for kind in ("K", "Kou"):
            lhs, rhs = sg.circular_kernel_average(1.0, z, w, kind=kind)
            worst = max(worst, abs(lhs - rhs) / rhs)
    return worst < 1e-8, {"max_rel_gap": worst}


def check_kernel_symmetry(seed):
    rng = np.random.default_rng([seed, 11])
    Z, W = _rand_points(rng, 100, 2), _rand_points(rng, 100, 2)
    r = float(np.max(sg.kernel_hermitian_residual("K", 0.6, Z, W)))
    return r < 1e-12, {"max_residual": r}


def check_equality_on_circular(seed):
    g20, g40 = build_grid(1, 20), build_grid(1, 40)
    r = sg.equality_on_circular(fn.abs_power(2), 0.7, [1 + 1j], g20, g40)
    return r < 1e-8, {"residual": r}


def check_contraction(seed):
    rng = np.random.default_rng([seed, 12])
    g, inner = build_grid(1, 16), build_grid(1, 32)
    worst = 0.0
    for _ in range(10):
        f = fn.make_field(lab.random_logpsh(1, rng, homogeneous=False, weight_cap=3))
        for t in (0.1, 1.0, 10.0):
            worst = max(worst, sg.contraction_ratio(f, t, g, inner))
    return worst <= 1 + 1e-9, {"max_ratio": worst}


def check_pt_hermitian(seed):
    g, inner = build_grid(1, 16), build_grid(1, 32)
    f = fn.make_field(fn.LogPshProduct(((fn.HoloPoly(1, {(1,): 1, (0,): 0.5j}), 2),)))
    h = fn.field_from_callable(lambda w: w[..., 0] ** 2 * np.conj(w[..., 0]) + 1, n=1)
    gap = sg.hermitian_gap(f, h, 0.8, g, inner)
    return gap < 1e-9, {"gap": gap}


def check_hormander(seed):
    g, inner = build_grid(1, 16), build_grid(1, 32)
    f = fn.make_field(fn.LogPshProduct(((fn.HoloPoly(1, {(1,): 1, (0,): 1}), 2),)))
    worst = -math.inf
    for t in (0.5, 1.0, 2.0):
        lhs, rhs = sg.hormander_terms(f, t, g, inner)
        worst = max(worst, lhs - rhs)
    return worst <= 1e-10, {"max_excess": worst}


def check_continuity(seed):
    g, inner = build_grid(1, 20), build_grid(1, 40)
    prof = sg.continuity_profile(sg.bump(2.0), [1.0, 0.1, 0.01], g, inner)
    return bool(prof[0] > prof[1] > prof[2]), {"norms": prof}


def check_lp_signature(seed):
    sig = sg.lp_signature(1.0, 4, [1, 2, 4])
    pred = sig["predicted_slope"]
    gap = max(abs(s - pred) for s in sig["slopes"]) / abs(pred)
    return gap < 1e-6 and all(s < 0 for s in sig["slopes"]), {"slopes": sig["slopes"], "predicted": pred}


# --- operators ---------------------------------------------------------------

_ZB = fn.coordinate(0, conjugate=True)
_M1 = fn.field_from_callable(lambda w: np.abs(w[..., 0]) ** 2 - 1, n=1, symmetry="circular")


def _pts(seed, k=8):
    return _rand_points(np.random.default_rng([seed, 14]), k, 1)


def check_eigen_witnesses(seed):
    P = _pts(seed)
    res = {
        "conj_z1_L": ops.eigen_residual(_ZB, "L", 1, P),
        "conj_z1_Lou": ops.eigen_residual(_ZB, "Lou", 0.5, P),
        "abs2_L": ops.eigen_residual(_M1, "L", 1, P),
        "abs2_Lou": ops.eigen_residual(_M1, "Lou", 1, P),
    }
    return max(res.values()) < 1e-6, res


def check_ladder(seed):
    P = _pts(seed)
    worst = max(max(ops.ladder_residuals(_M1, 1, 0, P)), max(ops.ladder_residuals(_ZB, 1, 0, P)))
    comm = max(ops.commutator_residual(_M1, 0, P), ops.commutator_residual(fn.exp_linear(0.5), 0, P))
    return worst < 1e-5 and comm < 1e-6, {"ladder": worst, "commutator": comm}


def check_half_integer_spectrum(seed):
    P = _pts(seed)
    witnesses = [_ZB, _M1, fn.coordinate(0), fn.field_from_callable(lambda w: np.conj(w[..., 0]) ** 2, n=1)]
    lams = [ops.eigenvalue_estimate(f, "Lou", P).real for f in witnesses]
    gap = max(abs(2 * v - round(2 * v)) for v in lams)
    return gap < 1e-6, {"eigenvalues": lams}


def check_ibp(seed):
    g = build_grid(1, 20)
    r1 = ops.ibp_residual(fn.abs_power(4), fn.abs_power(2), g)
    r2 = ops.ibp_residual(fn.abs_power(2), fn.abs_power(2), g)
    return max(r1, r2) < 1e-6, {"abs4_abs2": r1, "abs2_abs2": r2}


def check_split(seed):
    P = _pts(seed)
    r = ops.split_residual(fn.field_from_callable(lambda w: (w[..., 0] ** 2).real, n=1), P)
    c = float(np.max(np.abs(ops.apply("L", fn.abs_power(4), P) - ops.apply("Lou", fn.abs_power(4), P))))
    return r < 1e-7 and c < 1e-7, {"split": r, "circular_gap": c}


def check_commutation(seed):
    g = build_grid(1, 40)
    h, a = ops.commutation_residual(fn.abs_power(2), 1.0, [0.5], 0, g)
    h2, a2 = ops.commutation_residual(fn.exp_linear(0.5), 0.5, [0.3 + 0.2j], 0, g)
    return max(h, a, h2, a2) < 1e-5, {"abs2": [h, a], "f_half": [h2, a2]}


# --- lab ---------------------------------------------------------------------------


def check_correlation_examples(seed):
    f = fn.abs_power(2)
    shifted = fn.make_field(fn.LogPshProduct(((fn.HoloPoly(1, {(1,): 1, (0,): 1}), 2),)))
    m1 = lab.correlation_gap(f, f).margin
    m2 = lab.correlation_gap(f, shifted).margin
    m0 = lab.correlation_gap(fn.constant(2.0), shifted).margin
    return abs(m1 - 1) < 1e-6 and abs(m2 - 1) < 1e-6 and abs(m0) < 1e-12, {"margins": [m1, m2, m0]}


def check_theorem_audit(seed):
    reps = lab.theorem_audit(count=24, seed=seed, cfg=MCConfig(50_000, seed, 20))
    violated = sum(r.verdict == lab.VIOLATED for r in reps)
    return violated == 0, {"pairs": len(reps), "violated": violated}


def check_lieb(seed):
    reps = lab.lieb_audit(count=20, seed=seed, max_dim=6)
    worst = min(r.margin for r in reps)
    return worst >= -1e-9, {"checks": len(reps), "min_margin": worst}


def check_moment_split(seed):
    rho = 1 / math.sqrt(2)
    spec = CovarianceSpec([[1, 0], [rho, math.sqrt(1 - rho**2)]])
    rep = lab.moment_split_report(spec, [2, 2], 1)
    return abs(rep.margin - 0.5) < 1e-12 and abs(wick_moment(spec, [1, 1]) - 1.5) < 1e-12, {"margin": rep.margin}


def check_alpha_flow(seed):
    f = fn.abs_power(2)
    curve = lab.alpha_curve(f, f, t_grid=lab.default_t_grid(12))
    exact = 1 + np.exp(-curve.t_grid)
    err = float(np.max(np.abs(curve.values - exact)))
    fd, integral = lab.alpha_prime_two_ways(f, f, 1.0)
    ok = curve.monotone and curve.convex and err < 1e-10 and abs(fd - integral) < 1e-4
    return ok, {"max_error": err, "alpha_prime": [fd, integral], "limit_gap": curve.limit_gap}


SUITES = OrderedDict([
    ("calculus", [check_hessian_hermitian, check_psh_psd, check_fd_convergence,
                  check_wirtinger_consistency, check_discrepancy]),
    ("measure", [check_grid_moments, check_grid_exactness, check_permanent, check_wick_vs_mc,
                 check_mc_determinism]),
    ("functions", [check_circular_products, check_bessel, check_rotation_compat]),
    ("semigroups", [check_pt_fa, check_compose, check_circular_average, check_kernel_symmetry,
                    check_equality_on_circular, check_contraction, check_pt_hermitian,
                    check_hormander, check_continuity, check_lp_signature]),
    ("operators", [check_eigen_witnesses, check_ladder, check_half_integer_spectrum, check_ibp,
                   check_split, check_commutation]),
    ("lab", [check_correlation_examples, check_theorem_audit, check_lieb, check_moment_split,
             check_alpha_flow]),
])


def _run_one(check, seed):
    try:
        ok, detail = check(seed)
    except Exception as exc:  # a crashing check is a failing check
        ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
    return {"check": check.__name__.removeprefix("check_"), "passed": bool(ok), "detail": detail}


def run_suites(seed=7, only=None, threads=1):
    """Run the selected suites; results keep suite and check order regardless of ``threads``."""
    from concurrent.futures import ThreadPoolExecutor

    names = [s for s in SUITES if only is None or s in only]
    unknown = set(only or ()) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suite(s): {sorted(unknown)}")
    jobs = [(s, c) for s in names for c in SUITES[s]]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(lambda job: _run_one(job[1], seed), jobs))
    out = OrderedDict((s, []) for s in names)
    for (s, _), r in zip(jobs, results):
        out[s].append(r)
    return out
