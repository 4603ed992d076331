"""Numerical audits of the correlation inequality, the moment and permanent
inequalities, and the alpha(t) flow behind the correlation proof."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from . import calculus
from .calculus import DEFAULT_STEP, FDStep, complex_hessian, real_derivatives, real_hessian, trace_product
from .calculus import complex_from_real_hessian, wirtinger_from_real
from .functions import (HoloPoly, LogPshProduct, ScalarField, abs_power, as_points, coordinate,
                        exp_linear, make_field)
from .measure import (MCConfig, CovarianceSpec, build_grid, integrate, mc_statistics, permanent,
                      sample_vector, wick_moment, abs_moment_mc, NODE_BUDGET)
from .operators import (commutation_residual, commutator_residual, eigen_residual, ladder_residuals,
                        wirtinger_field)
from .semigroups import HypothesisError, ou_apply, pt_apply

K_SIGMA = 4.0

HOLDS = "holds"
HOLDS_WITHIN_ERROR = "holds-within-error"
VIOLATED = "violated"


@dataclass
class InequalityReport:
    """Both sides of an inequality ``lhs >= rhs`` with error bars.

    ``violated`` is only issued when the margin is below
    ``-(K_SIGMA * combined_error + atol)``.
    """

    lhs: float
    rhs: float
    stderr_lhs: float = 0.0
    stderr_rhs: float = 0.0
    margin: float = field(init=False)
    verdict: str = field(init=False)
    hypothesis: str = "in-hypothesis"
    method: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        self.margin = self.lhs - self.rhs
        err = math.hypot(self.stderr_lhs, self.stderr_rhs)
        atol = 1e-12 * max(1.0, abs(self.lhs), abs(self.rhs))
        if self.margin >= 0:
            self.verdict = HOLDS
        elif self.margin >= -(K_SIGMA * err + atol):
            self.verdict = HOLDS_WITHIN_ERROR
        else:
            self.verdict = VIOLATED

    @property
    def ok(self):
        return self.verdict != VIOLATED

    def to_dict(self):
        return asdict(self)


# ---------------------------------------------------------------------------
# correlation inequality


def _grid_pair(n, m):
    """A second node count for a quadrature error estimate.

    On C^1 a finer companion is cheap; from C^2 on nested rules cost
    m^{4n}, so a slightly coarser one is used.
    """
    order = (m + 6, m - 6, m + 2, m - 2) if n == 1 else (m - 2, m + 2)
    for m2 in order:
        if m2 >= 2 and m2 ** (2 * n) <= NODE_BUDGET and m2 != m:
            return m2
    raise ValueError(f"no companion grid for n={n}, m={m}")


def _richardson_error(a, b, m, m2):
    """First-order bound on the error of the finer of two algebraically converging rules."""
    lo, hi = sorted((m, m2))
    return abs(a - b) * hi / (hi - lo)


def correlation_gap(f, g, method="grid", m=20, cfg: MCConfig | None = None, force=False):
    """``int f g dgamma`` against ``int f dgamma int g dgamma``.

    ``f`` must carry the circular tag unless ``force`` is set, in which case
    the report is labelled out-of-hypothesis. On the grid route the error bars
    are quadrature error estimates from a second node count.
    """
    label = "in-hypothesis"
    if not getattr(f, "is_circular", False):
        if not force:
            raise HypothesisError("the correlation inequality needs a circular-symmetric f")
        label = "out-of-hypothesis"
    n = f.n or g.n
    if method == "grid":
        def moments(mm):
            grid = build_grid(n, mm)
            fv = np.real(f(grid.nodes))
            gv = np.real(g(grid.nodes))
            w = grid.weights
            return np.array([w @ (fv * gv), w @ fv, w @ gv])

        m2 = _grid_pair(n, m)
        fine, coarse = (moments(m), moments(m2)) if m >= m2 else (moments(m2), moments(m))
        err = _richardson_error(fine, coarse, m, m2)
        FG, F, G = fine
        return InequalityReport(FG, F * G, err[0], abs(G) * err[1] + abs(F) * err[2],
                                hypothesis=label, method=f"grid(m={max(m, m2)}, check m={min(m, m2)})",
                                extra={"int_f": F, "int_g": G})
    if method == "mc":
        cfg = cfg or MCConfig()

        def stat(pts):
            fv = np.real(f(pts))
            gv = np.real(g(pts))
            return np.stack([fv * gv, fv, gv], axis=-1)

        est, se = mc_statistics(stat, n, cfg)
        FG, F, G = np.real(est)
        return InequalityReport(FG, F * G, se[0], math.hypot(G * se[1], F * se[2]),
                                hypothesis=label,
                                method=f"mc(samples={cfg.samples}, seed={cfg.seed}, batches={cfg.batches})",
                                extra={"int_f": F, "int_g": G})
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# moment and permanent inequalities


def _is_even_int_vector(alpha):
    a = np.asarray(alpha, dtype=float)
    return bool(np.all(a == np.round(a)) and np.all(np.round(a).astype(int) % 2 == 0))


def moment_split_report(spec: CovarianceSpec, alpha, k, cfg: MCConfig | None = None):
    """``E prod_{j<=N} |X_j|^{a_j}`` against the product of the two blocks split at ``k``.

    Exact permanents when every exponent is an even integer, Monte Carlo
    otherwise. ``extra`` carries the full product bound ``prod_j E|X_j|^{a_j}``.
    """
    alpha = np.asarray(alpha, dtype=float)
    N = spec.N
    if alpha.shape != (N,):
        raise ValueError("alpha must have one exponent per coordinate")
    if not 1 <= k <= N - 1:
        raise ValueError(f"split index must lie in [1, {N - 1}]")
    if _is_even_int_vector(alpha):
        p = (alpha / 2).astype(int)
        lhs = wick_moment(spec, p)
        first = wick_moment(spec.subset(range(k)), p[:k])
        second = wick_moment(spec.subset(range(k, N)), p[k:])
        singles = [wick_moment(spec.subset([j]), p[j:j + 1]) for j in range(N)]
        product = float(np.prod(singles))
        rep = InequalityReport(lhs, first * second, method="permanent",
                               extra={"block_moments": [first, second], "product_bound": product,
                                      "product_holds": bool(first * second >= product * (1 - 1e-12))})
        return rep
    cfg = cfg or MCConfig()

    def stat(X):
        powers = np.abs(X) ** alpha
        cols = [np.prod(powers, axis=-1), np.prod(powers[:, :k], axis=-1), np.prod(powers[:, k:], axis=-1)]
        cols.extend(powers[:, j] for j in range(N))
        return np.stack(cols, axis=-1)

    if np.any(alpha > 8):
        abs_moment_mc(spec, alpha, cfg)  # applies the heavy-tail rule
    est, se = mc_statistics(stat, spec.n, cfg, sampler=sample_vector(spec, cfg))
    est = np.real(est)
    lhs, A, B = est[:3]
    product = float(np.prod(est[3:]))
    rhs_err = math.hypot(B * se[1], A * se[2])
    prod_err = product * math.sqrt(float(np.sum((se[3:] / est[3:]) ** 2)))
    return InequalityReport(lhs, A * B, se[0], rhs_err,
                            method=f"mc(samples={cfg.samples}, seed={cfg.seed})",
                            extra={"block_moments": [A, B], "product_bound": product,
                                   "product_stderr": prod_err,
                                   "product_holds": bool(A * B - product >= -K_SIGMA * math.hypot(rhs_err, prod_err))})


def lieb_check(C, k, max_dim=12):
    """``per(C) >= per(C_11) per(C_22)`` for the split of a PSD matrix after row ``k``."""
    C = np.asarray(C, dtype=complex)
    d = C.shape[0]
    if C.shape != (d, d):
        raise ValueError("need a square matrix")
    if d > max_dim:
        raise ValueError(f"dimension {d} exceeds {max_dim}")
    if not 1 <= k <= d - 1:
        raise ValueError(f"split index must lie in [1, {d - 1}]")
    scale = max(1.0, float(np.max(np.abs(C))))
    if not calculus.is_psd(C, tol=1e-10 * scale):
        raise ValueError("matrix is not Hermitian positive semi-definite")
    lhs = permanent(C)
    rhs = permanent(C[:k, :k]) * permanent(C[k:, k:])
    return InequalityReport(lhs.real, rhs.real, method="permanent",
                            extra={"imag_lhs": lhs.imag, "imag_rhs": rhs.imag})


# ---------------------------------------------------------------------------
# alpha(t) flow


def default_t_grid(points=24, t_min=0.05, t_max=40.0):
    return np.geomspace(t_min, t_max, points)


@dataclass
class AlphaCurve:
    """``alpha(t) = int (P_t^ou f) g dgamma`` on a time grid, with its derivatives.

    ``values`` use the Mehler route and ``values_pt`` the dbar-semigroup; the
    convexity and monotonicity tolerances are driven by ``quad_error``.
    """

    t_grid: np.ndarray
    values: np.ndarray
    values_pt: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    quad_error: np.ndarray
    limit: float
    cross_residual: float

    def __post_init__(self):
        if len(self.t_grid) != len(self.values):
            raise ValueError("time grid and values differ in length")
        if np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("time grid must be strictly increasing")

    def _atol(self):
        return 1e-10 * max(1.0, float(np.max(np.abs(self.values))))

    def monotone_violations(self):
        """First differences above their error allowance."""
        e = self.quad_error
        diffs = np.diff(self.values)
        allow = e[1:] + e[:-1] + self._atol()
        return diffs - allow

    def convexity_violations(self):
        """Decreases of consecutive slopes beyond their error allowance (negative is fine)."""
        dt = np.diff(self.t_grid)
        slopes = np.diff(self.values) / dt
        e = self.quad_error
        slope_err = (e[1:] + e[:-1] + self._atol()) / dt
        return -(np.diff(slopes) + slope_err[1:] + slope_err[:-1])

    @property
    def monotone(self):
        return bool(np.all(self.monotone_violations() <= 0))

    @property
    def convex(self):
        return bool(np.all(self.convexity_violations() <= 0))

    @property
    def limit_gap(self):
        return float(self.values[-1] - self.limit)

    def to_dict(self):
        return {
            "t": self.t_grid.tolist(),
            "alpha": self.values.tolist(),
            "alpha_pt": self.values_pt.tolist(),
            "d1": self.d1.tolist(),
            "d2": self.d2.tolist(),
            "quad_error": self.quad_error.tolist(),
            "limit": self.limit,
            "limit_gap": self.limit_gap,
            "cross_residual": self.cross_residual,
            "monotone": self.monotone,
            "convex": self.convex,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "alpha", "d1", "d2"])
        for row in zip(self.t_grid, self.values, self.d1, self.d2):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _second_derivative(t, y):
    """Three-point second derivative on a nonuniform grid; ends copy their neighbours."""
    d2 = np.empty_like(y)
    h0 = t[1:-1] - t[:-2]
    h1 = t[2:] - t[1:-1]
    d2[1:-1] = 2 * ((y[2:] - y[1:-1]) / h1 - (y[1:-1] - y[:-2]) / h0) / (h0 + h1)
    d2[0], d2[-1] = d2[1], d2[-2]
    return d2


def _require_circular(f):
    if not getattr(f, "is_circular", False):
        raise HypothesisError("the alpha flow is defined for a circular-symmetric f")


def alpha_values(f, g, ts, grid, inner, path="ou"):
    """``int (P_t f) g dgamma`` for each ``t``, with ``grid`` as the outer rule."""
    gv = np.asarray(g(grid.nodes))
    apply = ou_apply if path == "ou" else pt_apply
    out = []
    for t in ts:
        pf = apply(f, t, grid.nodes, inner)
        out.append(grid.weights @ (pf * gv))
    return np.real(np.array(out))


def alpha_curve(f, g, t_grid=None, grid=None, inner=None, pt_inner=None):
    """Sample ``alpha`` on ``t_grid`` along both semigroups."""
    _require_circular(f)
    n = f.n or g.n
    ts = np.asarray(default_t_grid() if t_grid is None else t_grid, dtype=float)
    grid = grid or build_grid(n, 20 if n == 1 else 8)
    inner = inner or grid
    pt_inner = pt_inner or build_grid(n, min(2 * inner.m, 40) if n == 1 else inner.m)
    values = alpha_values(f, g, ts, grid, inner, "ou")
    m2o, m2i = _grid_pair(n, grid.m), _grid_pair(n, inner.m)
    check = alpha_values(f, g, ts, build_grid(n, m2o), build_grid(n, m2i), "ou")
    quad_error = np.abs(values - check) * max(grid.m, m2o) / abs(grid.m - m2o)
    values_pt = alpha_values(f, g, ts, grid, pt_inner, "pt")
    scale = np.maximum(np.abs(values), 1e-300)
    cross = float(np.max(np.abs(values - values_pt) / scale))
    gv = np.real(g(grid.nodes))
    limit = float(integrate(f, grid).real * (grid.weights @ gv))
    d1 = np.gradient(values, ts) if len(ts) > 1 else np.zeros_like(values)
    d2 = _second_derivative(ts, values) if len(ts) > 2 else np.zeros_like(values)
    return AlphaCurve(ts, values, values_pt, d1, d2, quad_error, limit, cross)


def alpha_prime_two_ways(f, g, t, grid=None, inner=None, pt_inner=None,
                         step: FDStep = DEFAULT_STEP, dt=1e-3):
    """``alpha'(t)``: central difference of ``alpha`` versus
    ``-sum_j int P_t(df/dz_j) dg/dzbar_j dgamma``."""
    _require_circular(f)
    n = f.n or g.n
    grid = grid or build_grid(n, 20 if n == 1 else 8)
    inner = inner or grid
    pt_inner = pt_inner or build_grid(n, 40 if n == 1 else inner.m)
    lo, hi = alpha_values(f, g, [t - dt, t + dt], grid, inner, "ou")
    fd = (hi - lo) / (2 * dt)
    _, gg = real_derivatives(g, grid.nodes, step, order=1)
    _, g_dzbar = wirtinger_from_real(gg)
    total = 0j
    for j in range(n):
        pdf = pt_apply(wirtinger_field(f, j, False, step), t, grid.nodes, pt_inner)
        total += grid.weights @ (pdf * g_dzbar[:, j])
    return float(fd), float(-total.real)


def alpha_second_form(f, g, t, grid=None, inner=None, step: FDStep = FDStep(1e-3), path="ou"):
    """``int tr(D_C^2 (P_t f) D_C^2 g) dgamma`` by finite differences of the semigroup.

    ``path`` picks the semigroup used for ``P_t f``; the two agree for circular ``f``.
    """
    _require_circular(f)
    n = f.n or g.n
    grid = grid or build_grid(n, 20 if n == 1 else 8)
    inner = inner or (grid if path == "ou" else build_grid(n, 40 if n == 1 else grid.m))
    apply = ou_apply if path == "ou" else pt_apply
    pf = ScalarField(lambda w: apply(f, t, w, inner), n=n, growth=f.growth)
    _, _, hp = real_derivatives(pf, grid.nodes, step)
    Hf = complex_from_real_hessian(hp)
    Hg = complex_hessian(g, grid.nodes, step)
    return float(grid.weights @ trace_product(Hf, Hg))


def hessian_discrepancy_demo(z, step: FDStep = DEFAULT_STEP):
    """Tr of complex versus real Hessian products for ``|w|^{1/3}`` and ``|w|^4`` on C."""
    Z = as_points(z, 1)
    f = abs_power(1 / 3)
    g = abs_power(4)
    ct = trace_product(complex_hessian(f, Z, step), complex_hessian(g, Z, step))
    rt = trace_product(real_hessian(f, Z, step), real_hessian(g, Z, step))
    return float(ct), float(rt)


# ---------------------------------------------------------------------------
# random instances


def _monomials(n, d):
    out = []
    for combo in combinations_with_replacement(range(n), d):
        idx = [0] * n
        for j in combo:
            idx[j] += 1
        out.append(tuple(idx))
    return out


def _cnormal(rng, size=None):
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2)


def random_poly(n, rng, max_degree=3, homogeneous=True):
    """Random polynomial with i.i.d. complex normal coefficients on a random
    subset of monomials; the degree is uniform in ``[1, max_degree]``."""
    d = int(rng.integers(1, max_degree + 1))
    pool = _monomials(n, d) if homogeneous else [m for k in range(d + 1) for m in _monomials(n, k)]
    size = int(rng.integers(1, len(pool) + 1))
    chosen = rng.choice(len(pool), size=size, replace=False)
    if not homogeneous and not any(sum(pool[i]) == d for i in chosen):
        chosen = np.append(chosen, len(pool) - 1)
    terms = {pool[int(i)]: complex(_cnormal(rng)) for i in sorted(chosen)}
    return HoloPoly(n, terms)


def random_logpsh(n, rng, homogeneous=True, max_factors=2, max_degree=3, max_alpha=3.0,
                  weight_cap=6.0):
    """Random ``prod |F_j|^{alpha_j}``; ``sum alpha_j deg F_j`` is capped at ``weight_cap``."""
    k = int(rng.integers(1, max_factors + 1))
    polys = [random_poly(n, rng, max_degree, homogeneous) for _ in range(k)]
    alphas = rng.uniform(0.2, max_alpha, size=k)
    degs = np.array([max(sum(i) for i in P.terms) for P in polys], dtype=float)
    weight = float(alphas @ degs)
    if weight > weight_cap:
        alphas = alphas * weight_cap / weight
    return LogPshProduct(tuple(zip(polys, alphas.tolist())))


def random_covariance(N, rng, n=None):
    """Random ``CovarianceSpec`` with complex normal rows in ``C^n`` (``n = N`` by default)."""
    n = n or N
    return CovarianceSpec(_cnormal(rng, (N, n)))


def random_psd(d, rng):
    A = _cnormal(rng, (d, int(rng.integers(1, d + 1)) if rng.random() < 0.2 else d))
    return A @ A.conj().T


def instance_rng(seed, index):
    return np.random.default_rng([seed, index])


# ---------------------------------------------------------------------------
# audits


def _ordered_map(func, items, threads):
    """``map`` on a thread pool; the output order never depends on ``threads``."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def theorem_audit(count=200, seed=0, n_max=3, m=20, m2=10, cfg: MCConfig | None = None, threads=1):
    """Correlation gap for random pairs: ``f`` with homogeneous factors, ``g`` arbitrary.

    ``n = 1`` pairs use a grid with ``m`` nodes per axis, ``n = 2`` with ``m2``,
    larger ``n`` go to Monte Carlo.
    """
    cfg = cfg or MCConfig(samples=200_000, seed=seed, batches=50)

    def one(i):
        rng = instance_rng(seed, i)
        n = 1 + i % n_max
        pf = random_logpsh(n, rng, homogeneous=True)
        pg = random_logpsh(n, rng, homogeneous=False)
        f, g = make_field(pf), make_field(pg)
        if n == 1:
            rep = correlation_gap(f, g, "grid", m=m)
        elif n == 2:
            rep = correlation_gap(f, g, "grid", m=m2)
        else:
            rep = correlation_gap(f, g, "mc", cfg=MCConfig(cfg.samples, cfg.seed + i, cfg.batches))
        rep.extra.update(index=i, n=n, seed=seed, f=pf.to_dict(), g=pg.to_dict())
        return rep

    return _ordered_map(one, range(count), threads)


def lieb_audit(count=100, seed=0, max_dim=8, threads=1):
    """Every split of random PSD matrices of dimension 2..max_dim."""
    def one(i):
        rng = instance_rng(seed, i)
        d = int(rng.integers(2, max_dim + 1))
        C = random_psd(d, rng)
        reps = []
        for k in range(1, d):
            rep = lieb_check(C, k, max_dim=max(max_dim, 2))
            rep.extra.update(index=i, dim=d, split=k)
            reps.append(rep)
        return reps

    return [r for reps in _ordered_map(one, range(count), threads) for r in reps]


def moment_equivalence_audit(count=20, seed=0, max_order=4, N_max=3, cfg: MCConfig | None = None):
    """Permanent moments against Monte Carlo for every ``p`` with ``sum p <= max_order``.

    Returns rows ``(index, p, exact, estimate, stderr)``; one sample set per
    covariance is shared by all ``p``.
    """
    cfg = cfg or MCConfig(samples=10**6, seed=seed, batches=100)
    rows = []
    for i in range(count):
        rng = instance_rng(seed, i)
        N = 1 + i % N_max
        spec = random_covariance(N, rng)
        ps = [p for p in np.ndindex(*([max_order + 1] * N)) if sum(p) <= max_order]
        P = np.array(ps, dtype=float)

        def stat(X):
            a2 = np.abs(X) ** 2
            return np.prod(a2[:, None, :] ** P[None, :, :], axis=-1)

        est, se = mc_statistics(stat, spec.n, MCConfig(cfg.samples, cfg.seed + i, cfg.batches),
                                sampler=sample_vector(spec, MCConfig(cfg.samples, cfg.seed + i, cfg.batches)))
        for p, e, s in zip(ps, np.real(est), se):
            rows.append((i, p, wick_moment(spec, p), float(e), float(s)))
    return rows


# ---------------------------------------------------------------------------
# operator audits


def random_smooth_field(n, rng):
    """``|P|^2``, ``|P|^4`` (``P`` linear) or ``f_a``: smooth test fields for the commutation audit."""
    kind = int(rng.integers(3))
    if kind == 0:
        P = random_poly(n, rng, max_degree=2, homogeneous=False)
        return make_field(LogPshProduct(((P, 2.0),))), {"kind": "abs2", "poly": P.to_dict()}
    if kind == 1:
        P = random_poly(n, rng, max_degree=1, homogeneous=False)
        return make_field(LogPshProduct(((P, 4.0),))), {"kind": "abs4", "poly": P.to_dict()}
    a = float(rng.uniform(-1, 1))
    return exp_linear(a, n), {"kind": "exp-linear", "a": a}


def commutation_audit(trials=50, seed=0, h=1e-4, m1=20, m2=10, threads=1):
    """Both commutation residuals for random ``(f, t, z, j)`` with ``|z| <= 1``, ``n in {1, 2}``."""
    step = FDStep(h)

    def one(i):
        rng = instance_rng(seed, i)
        n = 1 + i % 2
        f, desc = random_smooth_field(n, rng)
        t = float(rng.uniform(0.1, 2.0))
        z = _cnormal(rng, n)
        z = z / max(1.0, float(np.linalg.norm(z)))
        j = int(rng.integers(n))
        grid = build_grid(n, m1 if n == 1 else m2)
        holo, anti = commutation_residual(f, t, z, j, grid, step)
        return {"index": i, "n": n, "field": desc, "t": t, "z": z, "j": j,
                "holo": holo, "antiholo": anti}

    return _ordered_map(one, range(trials), threads)


def commutation_convergence(f, t, z, j, grid, h0=1e-2, levels=3):
    """Commutation residuals at ``h0, h0/2, ...`` and the ratios of consecutive ones."""
    res = [max(commutation_residual(f, t, z, j, grid, FDStep(h0 / 2**k))) for k in range(levels)]
    return res, [res[k] / res[k + 1] for k in range(levels - 1)]


def spectrum_audit(seed=0, points=8, step: FDStep = DEFAULT_STEP):
    """Eigen, ladder and ``[a, b] = 1`` residuals for the low-lying witnesses on C."""
    rng = instance_rng(seed, 0)
    P = _cnormal(rng, (points, 1))
    zbar = coordinate(0, conjugate=True)
    m1 = ScalarField(lambda w: np.abs(w[..., 0]) ** 2 - 1, n=1, symmetry="circular", name="|z|^2-1")
    eigen = {
        "conj(z1);L;1": eigen_residual(zbar, "L", 1, P, step),
        "conj(z1);Lou;1/2": eigen_residual(zbar, "Lou", 0.5, P, step),
        "|z1|^2-1;L;1": eigen_residual(m1, "L", 1, P, step),
        "|z1|^2-1;Lou;1": eigen_residual(m1, "Lou", 1, P, step),
    }
    ladder = {
        "conj(z1)": ladder_residuals(zbar, 1, 0, P),
        "|z1|^2-1": ladder_residuals(m1, 1, 0, P),
    }
    comm = {
        "|z1|^2-1": commutator_residual(m1, 0, P, step),
        "f_0.5": commutator_residual(exp_linear(0.5), 0, P, step),
    }
    return {"points": P, "eigen": eigen, "ladder": ladder, "commutator": comm}
