"""Command-line entry point: every lab operation as a configured, replayable experiment.

Exit codes: 0 when every verdict passes, 1 on a failed verdict, 2 on a
configuration or hypothesis error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import functions, lab, report, selftest
from .calculus import DomainError, FDStep
from .functions import FieldEvaluationError, HoloPoly, LogPshProduct, make_field, special_field
from .measure import BudgetExceeded, CovarianceSpec, GrowthClassError, HeavyTailError, MCConfig, build_grid
from .semigroups import (HypothesisError, SemigroupTime, bargmann_project, circular_kernel_average,
                         compose_check, contraction_ratio, hormander_terms, kernel_hermitian_residual,
                         pt_apply)

CONFIG_ERRORS = (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError, HypothesisError,
                 BudgetExceeded, GrowthClassError, HeavyTailError, DomainError, FieldEvaluationError)


class ConfigError(Exception):
    pass


# --- input parsing -----------------------------------------------------------


def load_field(text, n=None):
    """A LogPshProduct JSON file, or ``abs-power:B``, ``exp-linear:A``, ``const:C``."""
    kind, sep, param = text.partition(":")
    if sep and not os.path.exists(text):
        if kind == "const":
            return functions.constant(float(param), n or 1), {"special": text}
        return special_field(kind, float(param), n or 1), {"special": text}
    product = LogPshProduct.from_json(Path(text).read_text())
    if n is not None and product.n != n:
        raise ConfigError(f"{text}: field lives on C^{product.n}, expected C^{n}")
    return make_field(product, name=Path(text).stem), product.to_dict()


def _complex_entry(e):
    if isinstance(e, dict):
        return complex(e["re"], e.get("im", 0.0))
    return complex(e)


def complex_matrix(rows):
    return np.array([[_complex_entry(e) for e in row] for row in rows])


def load_covariance(path):
    """``{"rows": ...}`` gives the factor ``A`` directly, ``{"covariance": ...}`` a PSD matrix."""
    d = json.loads(Path(path).read_text())
    if "rows" in d:
        return CovarianceSpec(complex_matrix(d["rows"]))
    if "covariance" in d:
        return CovarianceSpec.from_covariance(complex_matrix(d["covariance"]))
    raise ConfigError(f"{path}: expected a 'rows' or 'covariance' key")


def float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _mc(args):
    return MCConfig(samples=args.samples, seed=args.seed, batches=args.batches)


# --- commands -------------------------------------------------------------------
# each returns (config, results, verdicts)


def cmd_correlate(args):
    if args.audit:
        reps = lab.theorem_audit(count=args.audit, seed=args.seed, m=args.m,
                                 cfg=MCConfig(args.samples, args.seed, args.batches), threads=args.threads)
        verdicts = {f"pair_{r.extra['index']}": r.ok for r in reps}
        counts = {v: sum(r.verdict == v for r in reps) for v in (lab.HOLDS, lab.HOLDS_WITHIN_ERROR, lab.VIOLATED)}
        return ({"audit": args.audit, "m": args.m, "samples": args.samples},
                {"counts": counts, "reports": [r.to_dict() for r in reps]}, verdicts)
    if not args.f or not args.g:
        raise ConfigError("correlate needs --f and --g (or --audit N)")
    f, fdesc = load_field(args.f, args.n)
    g, gdesc = load_field(args.g, f.n)
    rep = lab.correlation_gap(f, g, method=args.method, m=args.m, cfg=_mc(args), force=args.force)
    config = {"f": fdesc, "g": gdesc, "method": args.method, "m": args.m, "force": args.force}
    if args.method == "mc":
        config.update(samples=args.samples, batches=args.batches)
    return config, rep.to_dict(), {"correlation": rep.ok}


def cmd_moments(args):
    spec = load_covariance(args.cov)
    alpha = args.alpha
    rep = lab.moment_split_report(spec, alpha, args.split, _mc(args))
    config = {"cov": spec.to_dict(), "alpha": alpha, "split": args.split,
              "samples": args.samples, "batches": args.batches}
    return config, rep.to_dict(), {"split": rep.ok, "product": rep.extra["product_holds"]}


def cmd_lieb(args):
    if args.matrix:
        d = json.loads(Path(args.matrix).read_text())
        C = complex_matrix(d["matrix"] if isinstance(d, dict) else d)
        splits = [args.split] if args.split else range(1, C.shape[0])
        reps = [lab.lieb_check(C, k) for k in splits]
        for k, r in zip(splits, reps):
            r.extra["split"] = k
        config = {"matrix": C, "splits": list(splits)}
    else:
        reps = lab.lieb_audit(count=args.count, seed=args.seed, max_dim=args.max_dim, threads=args.threads)
        config = {"count": args.count, "max_dim": args.max_dim}
    worst = min(r.margin for r in reps)
    return (config, {"min_margin": worst, "reports": [r.to_dict() for r in reps]},
            {"lieb": worst >= -args.tol})


def cmd_alpha(args):
    f, fdesc = load_field(args.f, args.n)
    g, gdesc = load_field(args.g, f.n)
    ts = lab.default_t_grid(args.points, args.t_min, args.t_max)
    grid = build_grid(f.n, args.m) if args.m else None
    curve = lab.alpha_curve(f, g, ts, grid=grid)
    fd, integral = lab.alpha_prime_two_ways(f, g, args.t_prime, grid=grid)
    if args.csv:
        Path(args.csv).write_text(curve.to_csv())
    results = curve.to_dict()
    results["alpha_prime"] = {"t": args.t_prime, "finite_difference": fd, "integral": integral}
    verdicts = {
        "monotone": curve.monotone,
        "convex": curve.convex,
        "limit": abs(curve.limit_gap) <= args.tol,
        "alpha_prime": abs(fd - integral) <= 1e-4 * max(1.0, abs(integral)),
    }
    config = {"f": fdesc, "g": gdesc, "t_min": args.t_min, "t_max": args.t_max,
              "points": args.points, "m": args.m, "t_prime": args.t_prime, "tol": args.tol}
    return config, results, verdicts


def cmd_semigroup_check(args):
    rng = np.random.default_rng([args.seed, 0])
    grid = build_grid(1, 20)
    compose = []
    for t in args.times:
        for s in args.times:
            xi, w = [(rng.standard_normal(1) + 1j * rng.standard_normal(1)) / 2 for _ in range(2)]
            compose.append({"t": t, "s": s, "xi": xi, "w": w, "residual": compose_check(t, s, xi, w, grid)})
    circ = []
    for kind in ("K", "Kou"):
        for t in args.times:
            z, w = [(rng.standard_normal(args.n) + 1j * rng.standard_normal(args.n)) / 2 for _ in range(2)]
            lhs, rhs = circular_kernel_average(t, z, w, kind=kind)
            circ.append({"kind": kind, "t": t, "lhs": lhs, "rhs": rhs, "rel_gap": abs(lhs - rhs) / rhs})
    fine = build_grid(1, 40)
    fa = []
    for a in args.a:
        for t in args.times:
            z = np.array([0.3 + 0.1j])
            s2 = SemigroupTime(t).s2
            exact = np.exp(s2 * a) * np.exp(a * z[0] + (1 - s2) * np.conj(z[0]))
            num = pt_apply(functions.exp_linear(a), t, z, fine)
            fa.append({"a": a, "t": t, "value": num, "closed_form": exact, "rel_gap": abs(num - exact) / abs(exact)})
    Z = (rng.standard_normal((50, args.n)) + 1j * rng.standard_normal((50, args.n))) / math.sqrt(2)
    W = (rng.standard_normal((50, args.n)) + 1j * rng.standard_normal((50, args.n))) / math.sqrt(2)
    herm = float(np.max(kernel_hermitian_residual("K", args.times[0], Z, W)))
    f = make_field(LogPshProduct(((HoloPoly(1, {(1,): 1, (0,): 1}), 2),)), name="|w+1|^2")
    g16, g32 = build_grid(1, 16), build_grid(1, 32)
    horm = []
    for t in args.times:
        lhs, rhs = hormander_terms(f, t, g16, g32)
        horm.append({"t": t, "lhs": lhs, "rhs": rhs, "contraction": contraction_ratio(f, t, g16, g32)})
    proj0 = bargmann_project(functions.abs_power(2), np.zeros((1, 1)), g32)
    results = {"compose": compose, "circular_average": circ, "pt_fa": fa, "kernel_hermitian": herm,
               "hormander": horm, "projection_abs2_at_0": proj0}
    verdicts = {
        "compose": max(r["residual"] for r in compose) < 1e-6,
        "circular_average": max(r["rel_gap"] for r in circ) < 1e-8,
        "pt_fa": max(r["rel_gap"] for r in fa) < 1e-8,
        "kernel_hermitian": herm < 1e-10,
        "hormander": all(r["lhs"] <= r["rhs"] * (1 + 1e-9) + 1e-12 for r in horm),
        "contraction": all(r["contraction"] <= 1 + 1e-9 for r in horm),
    }
    return {"times": args.times, "a": args.a, "n": args.n}, results, verdicts


def cmd_operator_check(args):
    rows = lab.commutation_audit(trials=args.trials, seed=args.seed, h=args.h, threads=args.threads)
    f = functions.abs_power(4)
    res, factors = lab.commutation_convergence(f, 0.5, [0.3 + 0.2j], 0, build_grid(1, 40))
    worst = max(max(r["holo"], r["antiholo"]) for r in rows)
    results = {"trials": rows, "max_residual": worst,
               "convergence": {"field": "|w|^4", "t": 0.5, "z": 0.3 + 0.2j, "residuals": res, "factors": factors}}
    verdicts = {"commutation": worst < args.tol, "convergence": all(3.5 <= q <= 4.5 for q in factors)}
    return {"trials": args.trials, "h": args.h, "tol": args.tol}, results, verdicts


def cmd_spectrum_check(args):
    out = lab.spectrum_audit(seed=args.seed, points=args.points)
    verdicts = {
        "eigen": max(out["eigen"].values()) < args.tol,
        "ladder": max(max(v) for v in out["ladder"].values()) < 1e-5,
        "commutator": max(out["commutator"].values()) < 1e-6,
    }
    return {"points": args.points, "tol": args.tol}, out, verdicts


def cmd_discrepancy(args):
    rows = []
    for z in args.z:
        ct, rt = lab.hessian_discrepancy_demo([z], FDStep(args.h))
        rows.append({"z": z, "complex_trace": ct, "real_trace": rt,
                     "real_trace_oracle": -4 / 3 * abs(z) ** (1 / 3)})
    verdicts = {
        "complex_nonnegative": all(r["complex_trace"] >= 0 for r in rows),
        "real_matches_oracle": all(abs(r["real_trace"] - r["real_trace_oracle"]) < 1e-3 for r in rows),
    }
    return {"z": args.z, "h": args.h}, rows, verdicts


def format_table(suites):
    lines = []
    width = max(len(r["check"]) for rs in suites.values() for r in rs)
    for suite, rs in suites.items():
        for r in rs:
            lines.append(f"{suite:<11} {r['check']:<{width}}  {'PASS' if r['passed'] else 'FAIL'}")
    total = sum(len(rs) for rs in suites.values())
    passed = sum(r["passed"] for rs in suites.values() for r in rs)
    lines.append(f"{passed}/{total} checks passed")
    return "\n".join(lines) + "\n"


def cmd_selftest(args):
    if args.inject_fault == "bessel-cutoff":
        functions._BESSEL_TERM_LIMIT = 3
    only = args.filter.split(",") if args.filter else None
    try:
        suites = selftest.run_suites(seed=args.seed, only=only, threads=args.threads)
    finally:
        functions._BESSEL_TERM_LIMIT = _DEFAULT_BESSEL_LIMIT
    sys.stdout.write(format_table(suites))
    verdicts = {f"{s}.{r['check']}": r["passed"] for s, rs in suites.items() for r in rs}
    return {"filter": only, "inject_fault": args.inject_fault}, suites, verdicts


_DEFAULT_BESSEL_LIMIT = functions._BESSEL_TERM_LIMIT


# --- argument parser ---------------------------------------------------------------


def _add_common(parser, seed=0):
    # added per subcommand: argparse parents share Action objects, so defaults would leak
    parser.add_argument("--seed", type=int, default=seed)
    parser.add_argument("--threads", type=positive_int, default=os.cpu_count() or 1,
                        help="worker threads (results do not depend on it)")
    parser.add_argument("--out", help="write the JSON report here (default: stdout)")


def _add_mc(parser, samples=10**6, batches=100):
    parser.add_argument("--samples", type=positive_int, default=samples)
    parser.add_argument("--batches", type=positive_int, default=batches)


def build_parser():
    p = argparse.ArgumentParser(prog="gausspsh", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("correlate", help="correlation inequality for a pair or an audit")
    _add_common(c)
    _add_mc(c, samples=200_000, batches=50)
    c.add_argument("--f", help="field JSON file or abs-power:B / exp-linear:A / const:C")
    c.add_argument("--g")
    c.add_argument("--n", type=positive_int)
    c.add_argument("--method", choices=("grid", "mc"), default="grid")
    c.add_argument("--m", type=positive_int, default=20, help="Gauss-Hermite nodes per real axis")
    c.add_argument("--force", action="store_true", help="allow a non-circular f (out-of-hypothesis)")
    c.add_argument("--audit", type=positive_int, metavar="N", help="audit N random pairs instead")
    c.set_defaults(func=cmd_correlate)

    mo = sub.add_parser("moments", help="moment split inequality")
    _add_common(mo)
    _add_mc(mo)
    mo.add_argument("--cov", required=True, help="covariance JSON ({'rows'} or {'covariance'})")
    mo.add_argument("--alpha", type=float_list, required=True, help="exponents, e.g. 2,2")
    mo.add_argument("--split", type=positive_int, required=True)
    mo.set_defaults(func=cmd_moments)

    li = sub.add_parser("lieb", help="permanent split inequality")
    _add_common(li)
    li.add_argument("--matrix", help="JSON matrix; default is a random audit")
    li.add_argument("--split", type=positive_int)
    li.add_argument("--count", type=positive_int, default=100)
    li.add_argument("--max-dim", type=positive_int, default=8)
    li.add_argument("--tol", type=float, default=1e-9)
    li.set_defaults(func=cmd_lieb)

    al = sub.add_parser("alpha", help="alpha(t) flow between f and g")
    _add_common(al)
    al.add_argument("--f", required=True)
    al.add_argument("--g", required=True)
    al.add_argument("--n", type=positive_int)
    al.add_argument("--m", type=positive_int, help="outer grid nodes per axis")
    al.add_argument("--t-min", type=float, default=0.05)
    al.add_argument("--t-max", type=float, default=40.0)
    al.add_argument("--points", type=positive_int, default=24)
    al.add_argument("--t-prime", type=float, default=1.0, help="time of the two-way derivative check")
    al.add_argument("--tol", type=float, default=1e-6)
    al.add_argument("--csv", help="also write the curve (t, alpha, d1, d2) as CSV")
    al.set_defaults(func=cmd_alpha)

    sg = sub.add_parser("semigroup-check", help="kernel and semigroup identities")
    _add_common(sg)
    sg.add_argument("--times", type=float_list, default=[0.3, 0.5, 0.7])
    sg.add_argument("--a", type=float_list, default=[-1.0, 0.5, 2.0])
    sg.add_argument("--n", type=positive_int, default=1, help="dimension for the kernel checks")
    sg.set_defaults(func=cmd_semigroup_check)

    op = sub.add_parser("operator-check", help="commutation of P_t with Wirtinger derivatives")
    _add_common(op)
    op.add_argument("--trials", type=positive_int, default=50)
    op.add_argument("--h", type=float, default=1e-4)
    op.add_argument("--tol", type=float, default=1e-5)
    op.set_defaults(func=cmd_operator_check)

    sp = sub.add_parser("spectrum-check", help="eigenfunction and ladder witnesses")
    _add_common(sp)
    sp.add_argument("--points", type=positive_int, default=8)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.set_defaults(func=cmd_spectrum_check)

    di = sub.add_parser("discrepancy", help="complex versus real Hessian pairing")
    _add_common(di)
    di.add_argument("--z", type=float_list, default=[1.0, 8.0])
    di.add_argument("--h", type=float, default=1e-4)
    di.set_defaults(func=cmd_discrepancy)

    st = sub.add_parser("selftest", help="reduced-size invariant suites")
    _add_common(st, seed=7)
    st.add_argument("--filter", help="comma-separated suites: " + ",".join(selftest.SUITES))
    st.add_argument("--inject-fault", choices=("bessel-cutoff",))
    st.set_defaults(func=cmd_selftest)
    return p


def _config_dict(args):
    skip = {"func", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and k != "threads"}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.time()
    t0 = time.perf_counter()
    try:
        config, results, verdicts = args.func(args)
    except (ConfigError, *CONFIG_ERRORS) as exc:
        print(f"gausspsh {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    config = {"arguments": _config_dict(args), **config}
    rep = report.make_report(args.command, config, results, verdicts, started, time.perf_counter() - t0)
    text = report.dumps(rep)
    if args.out:
        Path(args.out).write_text(text)
    elif args.command != "selftest":
        sys.stdout.write(text)
    if not rep["passed"]:
        failed = sorted(k for k, v in rep["verdicts"].items() if not v)
        print(f"gausspsh {args.command}: failed verdicts: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
