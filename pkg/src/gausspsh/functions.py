"""Test functions on C^n: holomorphic polynomials, log-psh products and
special fields.

Every field is vectorized: it accepts a complex array of shape ``(..., n)``
and returns an array of shape ``(...)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

GROWTH_TAGS = ("polynomial", "exp-linear", "other")
SYMMETRY_TAGS = ("circular", "unknown")

# Hard cap on series terms for B(x); the selftest fault injection lowers it.
_BESSEL_TERM_LIMIT = 10_000


class FieldEvaluationError(ValueError):
    """A field returned a non-finite value."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


def as_points(z, n=None):
    """Coerce ``z`` to a complex array of shape ``(..., n)``."""
    arr = np.asarray(z, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if n is not None and arr.shape[-1] != n:
        raise ValueError(f"expected points in C^{n}, got trailing dimension {arr.shape[-1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must have finite coordinates")
    return arr


@dataclass(frozen=True)
class ScalarField:
    """Evaluation handle for a function C^n -> C with declared tags.

    ``growth`` is one of ``polynomial``, ``exp-linear``, ``other``;
    quadrature only accepts the first two. ``symmetry`` is ``circular`` only
    when invariance under ``w -> e^{i theta} w`` is known structurally.
    ``singular_origin`` marks fields that are not C^2 at ``w = 0``.
    """

    func: Callable[[np.ndarray], np.ndarray]
    n: int | None = None
    growth: str = "polynomial"
    symmetry: str = "unknown"
    name: str = ""
    singular_origin: bool = False

    def __post_init__(self):
        if self.growth not in GROWTH_TAGS:
            raise ValueError(f"unknown growth tag {self.growth!r}")
        if self.symmetry not in SYMMETRY_TAGS:
            raise ValueError(f"unknown symmetry tag {self.symmetry!r}")

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        if self.n is not None and w.shape[-1] != self.n:
            raise ValueError(f"field {self.name or '?'} lives on C^{self.n}, got C^{w.shape[-1]}")
        return self.func(w)

    @property
    def is_circular(self):
        return self.symmetry == "circular"

    def rotated(self, theta):
        """The field ``w -> f(e^{i theta} w)``."""
        phase = np.exp(1j * theta)
        return ScalarField(
            lambda w: self.func(phase * w),
            n=self.n,
            growth=self.growth,
            symmetry=self.symmetry,
            name=f"{self.name}_rot({theta:g})",
            singular_origin=self.singular_origin,
        )


def field_from_callable(func, n=None, growth="polynomial", symmetry="unknown", name=""):
    return ScalarField(func, n=n, growth=growth, symmetry=symmetry, name=name)


# ---------------------------------------------------------------------------
# holomorphic polynomials


@dataclass(frozen=True)
class HoloPoly:
    """Holomorphic polynomial ``sum_k c_k z^{m_k}`` on C^n."""

    n: int
    terms: Mapping[tuple, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        clean = {}
        for idx, c in dict(self.terms).items():
            idx = tuple(int(k) for k in idx)
            if len(idx) != self.n or min(idx) < 0:
                raise ValueError(f"bad multi-index {idx} for dimension {self.n}")
            clean[idx] = clean.get(idx, 0) + complex(c)
        object.__setattr__(self, "terms", clean)
        nz = [(i, c) for i, c in clean.items() if c != 0]
        exps = np.array([i for i, _ in nz], dtype=int).reshape(len(nz), self.n)
        coeffs = np.array([c for _, c in nz], dtype=complex)
        object.__setattr__(self, "_exps", exps)
        object.__setattr__(self, "_coeffs", coeffs)

    @classmethod
    def monomial(cls, index, coeff=1.0):
        return cls(len(index), {tuple(index): coeff})

    @classmethod
    def linear_form(cls, a):
        """The form ``w -> w . a`` (no conjugation)."""
        a = np.asarray(a, dtype=complex)
        n = a.size
        return cls(n, {tuple(int(k == j) for k in range(n)): a[j] for j in range(n)})

    @property
    def is_zero(self):
        return self._coeffs.size == 0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.n:
            raise ValueError(f"polynomial on C^{self.n} evaluated on C^{z.shape[-1]}")
        if self.is_zero:
            return np.zeros(z.shape[:-1], dtype=complex)
        mono = np.prod(z[..., None, :] ** self._exps, axis=-1)
        return mono @ self._coeffs

    def to_dict(self):
        return {
            "terms": [
                {"index": list(idx), "re": c.real, "im": c.imag}
                for idx, c in sorted(self.terms.items())
            ]
        }

    @classmethod
    def from_dict(cls, n, d):
        terms = {}
        for t in d["terms"]:
            idx = tuple(t["index"])
            terms[idx] = terms.get(idx, 0) + complex(t.get("re", 0.0), t.get("im", 0.0))
        return cls(n, terms)


def eval_poly(P, z):
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != P.n:
        raise ValueError(f"dimension mismatch: polynomial on C^{P.n}, point in C^{z.shape[-1]}")
    return P(z)


def homogeneity_degree(P):
    """Common total degree of all nonzero terms, or None if mixed."""
    if P.is_zero:
        raise ValueError("zero polynomial has no degree")
    degrees = set(P._exps.sum(axis=1).tolist())
    return degrees.pop() if len(degrees) == 1 else None


# ---------------------------------------------------------------------------
# log-psh products


def _is_even_integer(a):
    return float(a).is_integer() and int(a) % 2 == 0


@dataclass(frozen=True)
class LogPshProduct:
    """The product ``prod_j |F_j|^{alpha_j}`` with holomorphic ``F_j``."""

    factors: tuple

    def __post_init__(self):
        facs = tuple((P, float(a)) for P, a in self.factors)
        if not facs:
            raise ValueError("need at least one factor")
        dims = {P.n for P, _ in facs}
        if len(dims) != 1:
            raise ValueError("factors live in different dimensions")
        for _, a in facs:
            if not (a >= 0 and math.isfinite(a)):
                raise ValueError("exponents must be finite and nonnegative")
        object.__setattr__(self, "factors", facs)

    @property
    def n(self):
        return self.factors[0][0].n

    @property
    def homogeneous(self):
        return all(P.is_zero or homogeneity_degree(P) is not None for P, _ in self.factors)

    def __call__(self, z):
        out = 1.0
        for P, a in self.factors:
            out = out * np.abs(P(z)) ** a
        return out

    def to_dict(self):
        return {
            "n": self.n,
            "factors": [dict(P.to_dict(), alpha=a) for P, a in self.factors],
        }

    @classmethod
    def from_dict(cls, d):
        n = int(d["n"])
        return cls(tuple((HoloPoly.from_dict(n, f), float(f["alpha"])) for f in d["factors"]))

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def make_field(p: LogPshProduct, name="") -> ScalarField:
    """Field for ``prod |F_j|^{alpha_j}``; circular iff every factor is homogeneous."""
    singular = any(
        not _is_even_integer(a) and a > 0 and not P.is_zero and abs(P(np.zeros(P.n))) == 0
        for P, a in p.factors
    )
    return ScalarField(
        lambda w: p(w),
        n=p.n,
        growth="polynomial",
        symmetry="circular" if p.homogeneous else "unknown",
        name=name or "logpsh",
        singular_origin=singular,
    )


def circular_check(f, n, trials=100, tol=1e-10, seed=0):
    """Randomized audit of ``f(e^{i theta} w) == f(w)``."""
    rng = np.random.default_rng(seed)
    w = (rng.standard_normal((trials, n)) + 1j * rng.standard_normal((trials, n))) / np.sqrt(2)
    theta = rng.uniform(0.0, 2 * np.pi, size=trials)
    base = np.asarray(f(w))
    rot = np.asarray(f(np.exp(1j * theta)[:, None] * w))
    return bool(np.all(np.abs(rot - base) <= tol * (1 + np.abs(base))))


# ---------------------------------------------------------------------------
# special fields


def constant(c, n=1):
    c = complex(c) if np.iscomplexobj(c) else float(c)
    return ScalarField(
        lambda w: np.full(np.shape(w)[:-1], c),
        n=n,
        growth="polynomial",
        symmetry="circular",
        name=f"const({c})",
    )


def abs_power(beta, n=1):
    """``|w|^beta`` with the Euclidean norm of C^n."""
    beta = float(beta)
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return ScalarField(
        lambda w: np.sum(np.abs(w) ** 2, axis=-1) ** (beta / 2),
        n=n,
        growth="polynomial",
        symmetry="circular",
        name=f"|w|^{beta:g}",
        singular_origin=not _is_even_integer(beta),
    )


def exp_linear(a, n=1):
    """``f_a(w) = exp(a w_1 + conj(w_1))`` for real ``a``."""
    a = float(a)
    return ScalarField(
        lambda w: np.exp(a * w[..., 0] + np.conj(w[..., 0])),
        n=n,
        growth="exp-linear",
        symmetry="unknown",
        name=f"f_{a:g}",
    )


def radial(phi, n=1, growth="polynomial", name="radial"):
    """``w -> phi(|w|)`` for a vectorized 1-D evaluator ``phi``."""
    return ScalarField(
        lambda w: phi(np.sqrt(np.sum(np.abs(w) ** 2, axis=-1))),
        n=n,
        growth=growth,
        symmetry="circular",
        name=name,
    )


def special_field(kind, param, n=1):
    if kind == "abs-power":
        return abs_power(param, n)
    if kind == "exp-linear":
        return exp_linear(param, n)
    if kind == "radial":
        return radial(param, n)
    raise ValueError(f"unknown special field kind {kind!r}")


def poly_field(P: HoloPoly, name=""):
    """A holomorphic polynomial as a field (circular only if constant)."""
    const = P.is_zero or homogeneity_degree(P) == 0
    return ScalarField(P, n=P.n, growth="polynomial",
                       symmetry="circular" if const else "unknown", name=name or "poly")


def coordinate(j, n=1, conjugate=False):
    if conjugate:
        return ScalarField(lambda w: np.conj(w[..., j]), n=n, name=f"conj(z{j + 1})")
    return ScalarField(lambda w: w[..., j], n=n, name=f"z{j + 1}")


def real_part(j, n=1):
    return ScalarField(lambda w: w[..., j].real, n=n, name=f"Re(z{j + 1})")


# ---------------------------------------------------------------------------


def bessel_B(x):
    """``B(x) = sum_k x^k / (k!)^2`` by forward summation."""
    x = float(x)
    if x < 0:
        raise ValueError("B is only needed for x >= 0")
    total = 1.0
    term = 1.0
    k = 0
    while k < _BESSEL_TERM_LIMIT:
        k += 1
        term *= x / (k * k)
        total += term
        if term < 1e-16 * total and k * k > x:
            break
    return total
