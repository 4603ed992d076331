"""Pointwise differential operators and residual checks.

``L    = sum_j d2/dz_j dzbar_j - conj(z_j) d/dzbar_j``
``Lbar = sum_j d2/dz_j dzbar_j - z_j d/dz_j``
``Lou  = Laplacian/4 - <w, grad>/2``  (the OU generator)
``a_j  = d/dzbar_j``,  ``b_j = conj(z_j) - d/dz_j``
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .calculus import DEFAULT_STEP, FDStep, real_derivatives, wirtinger_from_real
from .functions import ScalarField, as_points
from .measure import QuadratureGrid
from .semigroups import pt_apply

_SECOND_ORDER = ("L", "Lbar", "Lou")


@dataclass(frozen=True)
class OperatorKind:
    tag: str
    j: int | None = None  # zero-based coordinate index for a_j, b_j

    def __post_init__(self):
        if self.tag in _SECOND_ORDER:
            if self.j is not None:
                raise ValueError(f"{self.tag} takes no index")
        elif self.tag in ("a", "b"):
            if self.j is None or self.j < 0:
                raise ValueError(f"{self.tag} needs a coordinate index")
        else:
            raise ValueError(f"unknown operator {self.tag!r}")

    @classmethod
    def parse(cls, text):
        """``"L"``, ``"Lbar"``, ``"Lou"``, or ``"a1"``/``"b2"`` (one-based index)."""
        m = re.fullmatch(r"([ab])(\d+)", text)
        if m:
            return cls(m.group(1), int(m.group(2)) - 1)
        return cls(text)

    def __str__(self):
        return self.tag if self.j is None else f"{self.tag}{self.j + 1}"


def _op(op):
    return OperatorKind.parse(op) if isinstance(op, str) else op


def apply(op, f, z, step: FDStep = DEFAULT_STEP):
    """Finite-difference application of ``op`` to ``f`` at ``z`` (one point or a batch)."""
    op = _op(op)
    Z = as_points(z)
    lead = Z.shape[:-1]
    n = Z.shape[-1]
    if op.j is not None and op.j >= n:
        raise ValueError(f"index {op.j + 1} out of range for C^{n}")
    flat = Z.reshape(-1, n)
    if op.tag in _SECOND_ORDER:
        f0, grad, hess = real_derivatives(f, flat, step, order=2)
    else:
        f0, grad = real_derivatives(f, flat, step, order=1)
    dz, dzbar = wirtinger_from_real(grad)
    if op.tag == "a":
        out = dzbar[:, op.j]
    elif op.tag == "b":
        out = np.conj(flat[:, op.j]) * f0 - dz[:, op.j]
    else:
        idx = np.arange(n)
        lap = (hess[:, idx, idx] + hess[:, idx + n, idx + n]).sum(axis=-1) / 4
        if op.tag == "L":
            out = lap - np.sum(np.conj(flat) * dzbar, axis=-1)
        elif op.tag == "Lbar":
            out = lap - np.sum(flat * dz, axis=-1)
        else:
            real_coords = np.concatenate([flat.real, flat.imag], axis=-1)
            out = lap - 0.5 * np.sum(real_coords * grad, axis=-1)
    out = out.reshape(lead)
    return out[()] if out.ndim == 0 else out


def operator_field(op, f, step: FDStep = DEFAULT_STEP):
    """The field ``op f`` (evaluated by finite differences on demand)."""
    op = _op(op)
    return ScalarField(
        lambda w: apply(op, f, w, step),
        n=getattr(f, "n", None),
        growth=getattr(f, "growth", "polynomial"),
        name=f"{op}({getattr(f, 'name', '')})",
    )


def wirtinger_field(f, j, conjugate=False, step: FDStep = DEFAULT_STEP):
    """``d f / dz_j`` (or ``d f / dzbar_j``) as a field."""
    def func(w):
        w = np.asarray(w, dtype=complex)
        flat = w.reshape(-1, w.shape[-1])
        _, grad = real_derivatives(f, flat, step, order=1)
        dz, dzbar = wirtinger_from_real(grad)
        return (dzbar if conjugate else dz)[:, j].reshape(w.shape[:-1])

    return ScalarField(func, n=getattr(f, "n", None), growth=getattr(f, "growth", "polynomial"),
                       name=f"d{'zbar' if conjugate else 'z'}{j + 1}({getattr(f, 'name', '')})")


def _rel(a, b):
    return np.abs(a - b) / np.maximum(1.0, np.abs(b))


def split_residual(f, z, step: FDStep = DEFAULT_STEP):
    """``|L f - Lou f - (i/2) sum_j (y_j df/dx_j - x_j df/dy_j)|`` at ``z``."""
    Z = np.atleast_2d(as_points(z))
    n = Z.shape[-1]
    _, grad = real_derivatives(f, Z, step, order=1)
    rot = np.sum(Z.imag * grad[:, :n] - Z.real * grad[:, n:], axis=-1)
    res = apply("L", f, Z, step) - apply("Lou", f, Z, step) - 0.5j * rot
    return float(np.max(np.abs(res)))


def ibp_sides(f, g, grid: QuadratureGrid, step: FDStep = DEFAULT_STEP):
    """Both sides of the two integration-by-parts identities for ``L``."""
    X = grid.nodes
    w = grid.weights
    Lf = apply("L", f, X, step)
    gv = np.asarray(g(X))
    _, gf = real_derivatives(f, X, step, order=1)
    _, gg = real_derivatives(g, X, step, order=1)
    _, fbar = wirtinger_from_real(gf)
    g_dz, g_dzbar = wirtinger_from_real(gg)
    return {
        "conj_lhs": complex(w @ (Lf * np.conj(gv))),
        "conj_rhs": complex(-(w @ np.sum(fbar * np.conj(g_dzbar), axis=-1))),
        "plain_lhs": complex(w @ (Lf * gv)),
        "plain_rhs": complex(-(w @ np.sum(fbar * g_dz, axis=-1))),
    }


def ibp_residual(f, g, grid: QuadratureGrid, step: FDStep = DEFAULT_STEP):
    s = ibp_sides(f, g, grid, step)
    return float(max(_rel(s["conj_lhs"], s["conj_rhs"]), _rel(s["plain_lhs"], s["plain_rhs"])))


def commutation_residual(f, t, z, j, grid: QuadratureGrid, step: FDStep = DEFAULT_STEP):
    """Residuals of ``d/dz_j P_t = P_t d/dz_j`` and ``d/dzbar_j P_t = e^{-t} P_t d/dzbar_j``."""
    Z = as_points(z, grid.n)
    pf = ScalarField(lambda w: pt_apply(f, t, w, grid), n=grid.n, growth=f.growth)
    _, grad = real_derivatives(pf, Z, step, order=1)
    dz, dzbar = wirtinger_from_real(grad)
    holo_ref = pt_apply(wirtinger_field(f, j, False, step), t, Z, grid)
    anti_ref = np.exp(-t) * pt_apply(wirtinger_field(f, j, True, step), t, Z, grid)
    return float(_rel(dz[j], holo_ref)), float(_rel(dzbar[j], anti_ref))


def eigen_residual(f, op, lam, points, step: FDStep = DEFAULT_STEP):
    """``max |op f + lam f| / (1 + |f|)``: zero when ``-op f = lam f``."""
    P = np.atleast_2d(as_points(points))
    fv = np.asarray(f(P))
    ov = apply(op, f, P, step)
    return float(np.max(np.abs(ov + lam * fv) / (1 + np.abs(fv))))


def eigenvalue_estimate(f, op, points, step: FDStep = DEFAULT_STEP):
    """Least-squares ``lam`` with ``-op f ~ lam f`` on the sample points."""
    P = np.atleast_2d(as_points(points))
    fv = np.asarray(f(P))
    ov = apply(op, f, P, step)
    return complex(-np.vdot(fv, ov) / np.vdot(fv, fv))


def ladder_residuals(f, lam, j, points, step: FDStep = FDStep(1e-3)):
    """For ``-L f = lam f``: residuals of ``-L(a_j f) = (lam-1) a_j f`` and
    ``-L(b_j f) = (lam+1) b_j f``."""
    af = operator_field(OperatorKind("a", j), f, step)
    bf = operator_field(OperatorKind("b", j), f, step)
    return (eigen_residual(af, "L", lam - 1, points, step),
            eigen_residual(bf, "L", lam + 1, points, step))


def commutator_residual(f, j, points, step: FDStep = DEFAULT_STEP):
    """``max |(a_j b_j - b_j a_j) f - f| / (1 + |f|)``."""
    a, b = OperatorKind("a", j), OperatorKind("b", j)
    P = np.atleast_2d(as_points(points))
    ab = apply(a, operator_field(b, f, step), P, step)
    ba = apply(b, operator_field(a, f, step), P, step)
    fv = np.asarray(f(P))
    return float(np.max(np.abs(ab - ba - fv) / (1 + np.abs(fv))))
