"""Finite-difference Wirtinger calculus on C^n.

Coordinates are ordered ``(x_1..x_n, y_1..y_n)`` with ``z = x + iy``. All
derivative routines accept a single point of shape ``(n,)`` or a batch of
shape ``(k, n)``; the stencil for the whole batch is evaluated in one call
to the field.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .functions import FieldEvaluationError, as_points


class DomainError(ValueError):
    """Derivative requested where the field is not C^2."""


@dataclass(frozen=True)
class FDStep:
    """Central second-order finite differences with base step ``h``.

    The step actually used at ``z`` is ``h * max(1, |z|)``.
    """

    h: float = 1e-4
    scheme: str = "central-2nd-order"

    def __post_init__(self):
        if not 0 < self.h < 1:
            raise ValueError("finite-difference step must lie in (0, 1)")
        if self.scheme != "central-2nd-order":
            raise ValueError(f"unsupported scheme {self.scheme!r}")

    def at(self, z):
        return self.h * np.maximum(1.0, np.linalg.norm(z, axis=-1))


DEFAULT_STEP = FDStep()


def _direction(r, n):
    d = np.zeros(n, dtype=complex)
    d[r % n] = 1.0 if r < n else 1j
    return d


@lru_cache(maxsize=None)
def _stencil(n, order):
    """Unit offsets and index tables for gradient (order 1) or Hessian (order 2)."""
    dim = 2 * n
    e = [_direction(r, n) for r in range(dim)]
    offsets = [np.zeros(n, dtype=complex)]
    plus, minus = [], []
    for r in range(dim):
        plus.append(len(offsets)); offsets.append(e[r])
        minus.append(len(offsets)); offsets.append(-e[r])
    cross = {}
    if order == 2:
        for r in range(dim):
            for q in range(r + 1, dim):
                idx = []
                for sr, sq in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                    idx.append(len(offsets))
                    offsets.append(sr * e[r] + sq * e[q])
                cross[(r, q)] = tuple(idx)
    return np.array(offsets), tuple(plus), tuple(minus), cross


def _evaluate(f, pts):
    vals = np.asarray(f(pts))
    bad = ~np.isfinite(vals)
    if np.any(bad):
        where = np.argwhere(bad)[0]
        point = pts[tuple(where)]
        raise FieldEvaluationError(f"non-finite field value at {point}", point=point)
    return vals


def _check_smooth(f, Z, h):
    if getattr(f, "singular_origin", False):
        r = np.linalg.norm(Z, axis=-1)
        if np.any(r < 10 * h):
            raise DomainError(
                f"field {getattr(f, 'name', '')!r} is not smooth at the origin; "
                f"need |z| >= 10h = {float(np.max(10 * h)):.3g}"
            )


def real_derivatives(f, z, step=DEFAULT_STEP, order=2):
    """Value, real gradient and (if ``order == 2``) real Hessian at ``z``.

    Returns arrays of shapes ``(k,)``, ``(k, 2n)``, ``(k, 2n, 2n)`` for a
    batch of ``k`` points (leading axis dropped for a single point). Values
    stay complex for complex fields.
    """
    Z = as_points(z)
    single = Z.ndim == 1
    Z = np.atleast_2d(Z)
    k, n = Z.shape
    h = step.at(Z)
    if order == 2:
        _check_smooth(f, Z, h)
    offsets, plus, minus, cross = _stencil(n, order)
    pts = Z[:, None, :] + h[:, None, None] * offsets[None, :, :]
    vals = _evaluate(f, pts)
    f0 = vals[:, 0]
    hh = h[:, None]
    grad = (vals[:, list(plus)] - vals[:, list(minus)]) / (2 * hh)
    if order == 1:
        return (f0[0], grad[0]) if single else (f0, grad)
    dim = 2 * n
    hess = np.zeros((k, dim, dim), dtype=vals.dtype)
    for r in range(dim):
        hess[:, r, r] = (vals[:, plus[r]] - 2 * f0 + vals[:, minus[r]]) / h**2
    for (r, q), (pp, pm, mp, mm) in cross.items():
        v = (vals[:, pp] - vals[:, pm] - vals[:, mp] + vals[:, mm]) / (4 * h**2)
        hess[:, r, q] = v
        hess[:, q, r] = v
    if single:
        return f0[0], grad[0], hess[0]
    return f0, grad, hess


def wirtinger_from_real(grad):
    """Split a real gradient ``(.., 2n)`` into ``(d/dz, d/dzbar)``."""
    n = grad.shape[-1] // 2
    gx, gy = grad[..., :n], grad[..., n:]
    return 0.5 * (gx - 1j * gy), 0.5 * (gx + 1j * gy)


def complex_from_real_hessian(hess):
    """Matrix ``d^2 f / dz_j dzbar_k`` from the real Hessian."""
    n = hess.shape[-1] // 2
    rxx = hess[..., :n, :n]
    ryy = hess[..., n:, n:]
    rxy = hess[..., :n, n:]
    return 0.25 * (rxx + ryy + 1j * (rxy - np.swapaxes(rxy, -1, -2)))


def wirtinger_grad(f, z, step=DEFAULT_STEP):
    """Wirtinger gradient ``(df/dz_j, df/dzbar_j)`` by central differences."""
    _, grad = real_derivatives(f, z, step, order=1)
    return wirtinger_from_real(grad)


def real_hessian(f, z, step=DEFAULT_STEP):
    """Real Hessian over ``(x, y)``, symmetric by construction."""
    _, _, hess = real_derivatives(f, z, step)
    return hess


def complex_hessian(f, z, step=DEFAULT_STEP):
    """Complex Hessian ``H[j, k] = d^2 f / dz_j dzbar_k``.

    For real-valued fields the result is symmetrized to exact Hermitian form;
    complex-valued fields get the raw Wirtinger matrix, which is not Hermitian
    in general.
    """
    vals, _, hess = real_derivatives(f, z, step)
    H = complex_from_real_hessian(hess)
    scale = np.max(np.abs(vals)) if np.size(vals) else 0.0
    if np.isrealobj(vals) or np.max(np.abs(np.imag(vals))) <= 1e-12 * max(1.0, scale):
        H = 0.5 * (H + np.conj(np.swapaxes(H, -1, -2)))
    return H


def trace_product(A, B):
    """``Re tr(A B)`` for two matrices of equal shape."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return np.real(np.einsum("...jk,...kj->...", A, B))


def is_psd(A, tol=1e-10):
    A = np.asarray(A)
    A = 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))
    return bool(np.all(np.linalg.eigvalsh(A) >= -tol))
