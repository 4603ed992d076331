"""Ornstein-Uhlenbeck and dbar-semigroups, their kernels, and the Bargmann
projection.

``P_t^ou f(z) = int f(c_t z + s_t w) dgamma(w)``
``P_t f(z)    = int f(z + s_t xi) exp(-s_t conj(z) . xi) dgamma(xi)``

with ``c_t = exp(-t/2)`` and ``s_t = sqrt(1 - exp(-t))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import functions
from .calculus import FDStep, wirtinger_grad
from .functions import FieldEvaluationError, as_points, exp_linear
from .measure import QuadratureGrid, build_grid, check_growth, integrate

# points x nodes evaluated per chunk
_CHUNK = 2_000_000


class HypothesisError(ValueError):
    """Operation requires a circular-symmetric field."""


@dataclass(frozen=True)
class SemigroupTime:
    t: float

    def __post_init__(self):
        t = float(self.t)
        if not t >= 0:
            raise ValueError("semigroup time must be >= 0")
        object.__setattr__(self, "t", t)

    @property
    def c(self):
        return math.exp(-self.t / 2)

    @property
    def s(self):
        return math.sqrt(-math.expm1(-self.t))

    @property
    def s2(self):
        return -math.expm1(-self.t)


def _time(t):
    return t if isinstance(t, SemigroupTime) else SemigroupTime(t)


def _prepare(f, z, grid):
    check_growth(f)
    Z = as_points(z)
    if Z.shape[-1] != grid.n:
        raise ValueError(f"point in C^{Z.shape[-1]} but grid on C^{grid.n}")
    fn = getattr(f, "n", None)
    if fn is not None and fn != grid.n:
        raise ValueError(f"field on C^{fn} but grid on C^{grid.n}")
    return Z


def _quadrature(integrand, Z, grid):
    """``sum_i w_i integrand(Z, xi_i)`` for every point in ``Z`` (shape ``(..., n)``)."""
    lead = Z.shape[:-1]
    flat = Z.reshape(-1, grid.n)
    out = None
    chunk = max(1, _CHUNK // len(grid))
    for a in range(0, len(flat), chunk):
        zc = flat[a:a + chunk]
        vals = integrand(zc[:, None, :], grid.nodes[None, :, :])
        if not np.all(np.isfinite(vals)):
            raise FieldEvaluationError("non-finite integrand in semigroup quadrature")
        res = vals @ grid.weights
        if out is None:
            out = np.empty(len(flat), dtype=res.dtype)
        out[a:a + chunk] = res
    out = out.reshape(lead)
    return out[()] if out.ndim == 0 else out


def ou_apply(f, t, z, grid: QuadratureGrid):
    """Mehler average ``P_t^ou f(z)`` by quadrature."""
    tt = _time(t)
    Z = _prepare(f, z, grid)
    if tt.t == 0:
        return f(Z)
    if math.isinf(tt.t):
        return np.full(Z.shape[:-1], integrate(f, grid))[()]
    c, s = tt.c, tt.s
    return _quadrature(lambda zc, xi: f(c * zc + s * xi), Z, grid)


def pt_apply(f, t, z, grid: QuadratureGrid):
    """``P_t f(z)`` from the shifted formula with the complex weight.

    The weight ``exp(-s_t conj(z) . xi)`` oscillates, so this needs a finer
    grid than ``ou_apply`` for the same accuracy.
    """
    tt = _time(t)
    Z = _prepare(f, z, grid)
    if tt.t == 0:
        return f(Z)
    s = 1.0 if math.isinf(tt.t) else tt.s

    def integrand(zc, xi):
        return f(zc + s * xi) * np.exp(-s * np.sum(np.conj(zc) * xi, axis=-1))

    return _quadrature(integrand, Z, grid)


def bargmann_project(f, z, grid: QuadratureGrid):
    """Projection onto holomorphic functions, ``int f(z + w) exp(-conj(z) . w) dgamma(w)``."""
    check_growth(f, allowed=("polynomial",))
    return pt_apply(f, math.inf, z, grid)


# ---------------------------------------------------------------------------
# kernels


def log_kernel(kind, t, z, w):
    """Logarithm of the Lebesgue-density kernel ``K_t(z, w)`` or ``K_t^ou(z, w)``."""
    tt = _time(t)
    if tt.t == 0:
        raise ValueError("kernel is singular at t = 0")
    Z = np.asarray(z, dtype=complex)
    W = np.asarray(w, dtype=complex)
    n = Z.shape[-1]
    s2 = tt.s2
    pref = -n * math.log(math.pi * s2)
    if kind == "K":
        zw = np.sum(Z * np.conj(W), axis=-1)
        d2 = np.sum(np.abs(Z - W) ** 2, axis=-1)
        return pref + zw - math.exp(-tt.t) * d2 / s2 - np.sum(np.abs(W) ** 2, axis=-1)
    if kind == "Kou":
        return pref - np.sum(np.abs(W - tt.c * Z) ** 2, axis=-1) / s2 + 0j
    raise ValueError(f"unknown kernel kind {kind!r}")


def kernel(kind, t, z, w):
    """Closed-form kernel value, prefactor ``pi^{-n} (1 - e^{-t})^{-n}`` included."""
    return np.exp(log_kernel(kind, t, z, w))


def kernel_hermitian_residual(kind, t, z, w):
    """Relative asymmetry of the kernel taken with respect to ``gamma``.

    ``P_t`` is Hermitian on ``L^2(gamma)``, so the density against ``gamma``,
    ``K_t(z, w) pi^n e^{|w|^2}``, equals its conjugate transpose.
    """
    Z = np.asarray(z, dtype=complex)
    W = np.asarray(w, dtype=complex)
    n = Z.shape[-1]
    lzw = log_kernel(kind, t, Z, W) + n * math.log(math.pi) + np.sum(np.abs(W) ** 2, axis=-1)
    lwz = log_kernel(kind, t, W, Z) + n * math.log(math.pi) + np.sum(np.abs(Z) ** 2, axis=-1)
    a = np.exp(lzw)
    b = np.conj(np.exp(lwz))
    return np.abs(a - b) / np.abs(a)


def kernel_mass(kind, t, z, grid: QuadratureGrid):
    """``int K_t(z, w) dl(w)`` by quadrature (the value of ``P_t 1`` at ``z``)."""
    Z = as_points(z, grid.n)
    n = grid.n
    # dl(w) = pi^n e^{|w|^2} dgamma(w)
    logs = (log_kernel(kind, t, Z[None, :], grid.nodes) + n * math.log(math.pi)
            + np.sum(np.abs(grid.nodes) ** 2, axis=-1))
    return grid.weights @ np.exp(logs)


def compose_check(t, s, xi, w, grid: QuadratureGrid):
    """Relative residual of ``int K_t(z, w) K_s(xi, z) dl(z) = K_{t+s}(xi, w)``.

    The integrand is Gaussian in ``z`` with precision ``a = 1/s_s^2 + c_t^2/s_t^2``;
    the grid is rescaled by ``1/sqrt(a)`` so the remaining factor is the
    exponential of a linear form.
    """
    T, S = _time(t), _time(s)
    if T.t <= 0 or S.t <= 0:
        raise ValueError("compose_check needs t, s > 0")
    XI = as_points(xi, grid.n)
    W = as_points(w, grid.n)
    n = grid.n
    a = 1.0 / S.s2 + T.c**2 / T.s2
    u = grid.nodes
    zq = u / math.sqrt(a)
    logs = (log_kernel("K", T, zq, W[None, :]) + log_kernel("K", S, XI[None, :], zq)
            + np.sum(np.abs(u) ** 2, axis=-1))
    lhs = (math.pi / a) ** n * (grid.weights @ np.exp(logs))
    rhs = kernel("K", SemigroupTime(T.t + S.t), XI, W)
    return float(abs(lhs - rhs) / abs(rhs))


def circular_kernel_average(t, z, w, theta_nodes=64, kind="K"):
    """Angular average of the kernel in ``w`` against its Bessel-series closed form.

    ``lhs`` is the trapezoid rule in ``theta`` of ``K(z, e^{i theta} w)``;
    ``rhs = pi^{-n} s^{-2n} exp(-(|w|^2 + c^2 |z|^2)/s^2) B(c^2 |w . conj z|^2 / s^4)``,
    which is the same for both kernels.
    """
    tt = _time(t)
    Z = np.asarray(z, dtype=complex).reshape(-1)
    W = np.asarray(w, dtype=complex).reshape(-1)
    n = Z.size
    theta = 2 * np.pi * np.arange(theta_nodes) / theta_nodes
    pts = np.exp(1j * theta)[:, None] * W[None, :]
    lhs = np.mean(kernel(kind, tt, Z[None, :], pts))
    c2, s2 = tt.c**2, tt.s2
    x = c2 * abs(np.sum(W * np.conj(Z))) ** 2 / s2**2
    gauss = math.exp(-(np.sum(np.abs(W) ** 2) + c2 * np.sum(np.abs(Z) ** 2)) / s2)
    rhs = math.pi ** (-n) * s2 ** (-n) * gauss * functions.bessel_B(x)
    return float(lhs.real), float(rhs)


def equality_on_circular(f, t, z, grid: QuadratureGrid, pt_grid: QuadratureGrid | None = None):
    """Relative gap between ``P_t f(z)`` and ``P_t^ou f(z)`` for circular ``f``."""
    if not getattr(f, "is_circular", False):
        raise HypothesisError("P_t = P_t^ou is only claimed for circular-symmetric fields")
    a = pt_apply(f, t, z, pt_grid or grid)
    b = ou_apply(f, t, z, grid)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


# ---------------------------------------------------------------------------
# L^2(gamma) quantities, all on one outer grid


def l2_norm(values, grid: QuadratureGrid):
    return float(np.sqrt(grid.weights @ np.abs(values) ** 2))


def inner_product(u, v, grid: QuadratureGrid):
    """``int u conj(v) dgamma`` from node values."""
    return complex(grid.weights @ (u * np.conj(v)))


def contraction_ratio(f, t, grid: QuadratureGrid, inner: QuadratureGrid):
    """``||P_t f|| / ||f||`` in ``L^2(gamma)`` with ``grid`` as the outer rule."""
    pf = pt_apply(f, t, grid.nodes, inner)
    return l2_norm(pf, grid) / l2_norm(f(grid.nodes), grid)


def hermitian_gap(f, g, t, grid: QuadratureGrid, inner: QuadratureGrid):
    """``|(P_t f, g) - (f, P_t g)|`` relative to ``max(1, |(P_t f, g)|)``."""
    a = inner_product(pt_apply(f, t, grid.nodes, inner), g(grid.nodes), grid)
    b = inner_product(f(grid.nodes), pt_apply(g, t, grid.nodes, inner), grid)
    return abs(a - b) / max(1.0, abs(a))


def hormander_terms(f, t, grid: QuadratureGrid, inner: QuadratureGrid):
    """``(||P_t f - Pi_0 f||^2, e^{-2t} ||f - Pi_0 f||^2)``."""
    proj = bargmann_project(f, grid.nodes, inner)
    pf = pt_apply(f, t, grid.nodes, inner)
    lhs = l2_norm(pf - proj, grid) ** 2
    rhs = math.exp(-2 * _time(t).t) * l2_norm(f(grid.nodes) - proj, grid) ** 2
    return lhs, rhs


def continuity_profile(f, ts, grid: QuadratureGrid, inner: QuadratureGrid):
    """``||P_t f - f||`` for each ``t`` in ``ts``."""
    fv = f(grid.nodes)
    return [l2_norm(pt_apply(f, t, grid.nodes, inner) - fv, grid) for t in ts]


def bump(radius=2.0, n=1):
    """Smooth compactly supported circular field ``exp(-1/(1 - |w|^2/r^2))``."""
    def func(w):
        r2 = np.sum(np.abs(w) ** 2, axis=-1) / radius**2
        out = np.zeros(r2.shape)
        inside = r2 < 1
        out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
        return out

    return functions.ScalarField(func, n=n, growth="polynomial", symmetry="circular",
                                 name=f"bump({radius:g})")


# ---------------------------------------------------------------------------
# L^p growth of P_t on f_a


def _shifted_lp(values_at, p, mu, grid: QuadratureGrid):
    """``log int |h|^p dgamma`` with the rule recentred at ``mu``.

    ``int F dgamma = int F(u + mu) exp(-2 Re(u . conj mu) - |mu|^2) dgamma(u)``.
    """
    u = grid.nodes
    vals = values_at(u + mu)
    logs = (p * np.log(np.abs(vals)) - 2 * np.real(u @ np.conj(mu)) - np.sum(np.abs(mu) ** 2))
    top = logs.max()
    return float(top + math.log(grid.weights @ np.exp(logs - top)))


def _log_modulus_shift(values_at, p, n, h=1e-4):
    """Centre ``mu = conj(d/dw log|h|^p)`` at the origin, by finite differences."""
    def logmod(w):
        return p * np.log(np.abs(values_at(w)))

    dz, _ = wirtinger_grad(functions.ScalarField(logmod, n=n), np.zeros(n), FDStep(h))
    return np.conj(dz)


def lp_log_ratio(a, p, t, grid: QuadratureGrid, inner: QuadratureGrid):
    """``log(||P_t f_a||_p^p / ||f_a||_p^p)`` for the exponential field ``f_a`` on C."""
    f = exp_linear(a)

    def base(w):
        return f(w)

    def smoothed(w):
        return pt_apply(f, t, w, inner)

    out = []
    for values_at in (smoothed, base):
        mu = _log_modulus_shift(values_at, p, 1)
        out.append(_shifted_lp(values_at, p, mu, grid))
    return out[0] - out[1]


def lp_signature(t, p, a_values, grid: QuadratureGrid | None = None, inner: QuadratureGrid | None = None):
    """Slopes of the log L^p ratio in ``a`` against ``s_t^2 (p - p^2/2)``.

    The unknown constant ``C(t, p)`` cancels in the slopes. A nonzero slope
    means the ratio is unbounded in ``a`` (towards ``+inf`` or ``-inf``).
    """
    grid = grid or build_grid(1, 40)
    # P_t f_a is evaluated near |z| ~ p (a + 1) / 2, where the inner rule needs more nodes
    inner = inner or build_grid(1, 80)
    a_values = [float(a) for a in a_values]
    logs = [lp_log_ratio(a, p, t, grid, inner) for a in a_values]
    slopes = [(logs[i + 1] - logs[i]) / (a_values[i + 1] - a_values[i]) for i in range(len(logs) - 1)]
    tt = _time(t)
    return {
        "a": a_values,
        "log_ratio": logs,
        "slopes": slopes,
        "predicted_slope": tt.s2 * (p - p * p / 2),
    }
