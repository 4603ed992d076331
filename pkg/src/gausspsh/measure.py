"""The standard complex Gaussian measure: sampling, quadrature, and exact
moments via permanents."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .functions import FieldEvaluationError

NODE_BUDGET = 10**6
PERMANENT_MAX_DIM = 24


class BudgetExceeded(ValueError):
    pass


class GrowthClassError(ValueError):
    """Field growth class not supported by the requested integration route."""


class HeavyTailError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class MCConfig:
    """Sample count, seed and number of batches (one RNG stream per batch)."""

    samples: int = 10**6
    seed: int = 0
    batches: int = 100

    def __post_init__(self):
        if self.samples < 1 or self.batches < 1:
            raise ValueError("samples and batches must be >= 1")
        if self.samples < self.batches:
            raise ValueError("samples must be >= batches")

    def batch_sizes(self):
        q, r = divmod(self.samples, self.batches)
        return [q + (b < r) for b in range(self.batches)]

    def rng(self, batch):
        return np.random.default_rng([self.seed & (2**64 - 1), batch])


def _standard_batch(rng, k, n):
    re = rng.standard_normal((k, n))
    im = rng.standard_normal((k, n))
    return (re + 1j * im) * np.sqrt(0.5)


def sample_standard(n, cfg: MCConfig):
    """Yield batches of standard complex Gaussian points, shape ``(k, n)``."""
    for b, k in enumerate(cfg.batch_sizes()):
        yield _standard_batch(cfg.rng(b), k, n)


@dataclass(frozen=True)
class CovarianceSpec:
    """Centered complex Gaussian vector ``X = A G`` given by the rows of ``A``.

    ``X_j = G . a_j`` so that ``E X_j conj(X_k) = a_j . conj(a_k)``.
    """

    rows: np.ndarray

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=complex))
        if rows.size == 0:
            raise ValueError("covariance spec needs at least one row")
        if not np.all(np.isfinite(rows)):
            raise ValueError("rows must be finite")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def N(self):
        return self.rows.shape[0]

    @property
    def n(self):
        return self.rows.shape[1]

    @property
    def covariance(self):
        C = self.rows @ self.rows.conj().T
        return 0.5 * (C + C.conj().T)

    @classmethod
    def from_covariance(cls, C):
        """A canonical factor of a PSD covariance: Cholesky, else eigen-root."""
        C = np.asarray(C, dtype=complex)
        C = 0.5 * (C + C.conj().T)
        try:
            return cls(np.linalg.cholesky(C))
        except np.linalg.LinAlgError:
            lam, V = np.linalg.eigh(C)
            if lam.min() < -1e-10 * max(1.0, abs(lam).max()):
                raise ValueError("covariance is not positive semi-definite")
            return cls(V * np.sqrt(np.clip(lam, 0, None)))

    def subset(self, idx):
        return CovarianceSpec(self.rows[list(idx)])

    def to_dict(self):
        return {"rows": [[{"re": float(v.real), "im": float(v.imag)} for v in row]
                         for row in self.rows]}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array([[complex(e["re"], e.get("im", 0.0)) for e in row]
                             for row in d["rows"]]))

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def sample_vector(spec: CovarianceSpec, cfg: MCConfig):
    """Yield batches of ``X = A G``, shape ``(k, N)``."""
    for G in sample_standard(spec.n, cfg):
        yield G @ spec.rows.T


def _mean_and_stderr(sums, sizes):
    """Combine per-batch sums of shape ``(B, q)`` into estimates and errors."""
    sizes = np.asarray(sizes, dtype=float)
    total = sums.sum(axis=0) / sizes.sum()
    if len(sizes) < 2:
        return total, None
    means = sums / sizes[:, None]
    err = np.std(means, axis=0, ddof=1) / np.sqrt(len(sizes))
    return total, err


def mc_statistics(stat, n, cfg: MCConfig, sampler=None):
    """Batch-mean estimates of several statistics on shared samples.

    ``stat`` maps a batch of points ``(k, n)`` to values ``(k, q)``. Returns
    ``(estimates, stderrs)`` each of shape ``(q,)``. With a single batch the
    error falls back to the sample standard deviation.
    """
    sums, sq, sizes = [], [], []
    batches = sampler if sampler is not None else sample_standard(n, cfg)
    for pts in batches:
        v = np.asarray(stat(pts))
        if v.ndim == 1:
            v = v[:, None]
        if not np.all(np.isfinite(v)):
            raise FieldEvaluationError("non-finite value in Monte Carlo statistic")
        sums.append(v.sum(axis=0))
        sq.append((np.abs(v) ** 2).sum(axis=0))
        sizes.append(len(pts))
    sums = np.array(sums)
    est, err = _mean_and_stderr(sums, sizes)
    if err is None:
        N = float(sizes[0])
        var = np.array(sq)[0] / N - np.abs(est) ** 2
        err = np.sqrt(np.clip(var, 0, None) / max(N - 1, 1))
    return est, err


def integrate_mc(f, n, cfg: MCConfig):
    """Monte Carlo estimate of ``int f dgamma_n`` with batch standard error."""
    est, err = mc_statistics(lambda pts: f(pts), n, cfg)
    return est[0], float(err[0])


def abs_moment_mc(spec: CovarianceSpec, alpha, cfg: MCConfig):
    """Estimate ``E prod_j |X_j|^{alpha_j}``."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (spec.N,) or np.any(alpha < 0):
        raise ValueError("alpha must be a nonnegative vector of length N")
    _check_heavy_tail(alpha, cfg)
    est, err = mc_statistics(
        lambda X: np.prod(np.abs(X) ** alpha, axis=-1),
        spec.n, cfg, sampler=sample_vector(spec, cfg),
    )
    return float(est[0].real), float(err[0])


def _check_heavy_tail(alpha, cfg):
    if np.any(alpha > 8) and cfg.samples < 10**7:
        warnings.warn("exponents above 8 need >= 1e7 samples for a usable variance")
        raise HeavyTailError("exponent > 8 with fewer than 1e7 samples")


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor Gauss-Hermite rule for ``gamma_n`` with ``m`` nodes per real axis."""

    n: int
    m: int
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return self.weights.size


@lru_cache(maxsize=32)
def build_grid(n, m, budget=NODE_BUDGET):
    if m < 2:
        raise ValueError("need at least 2 nodes per axis")
    count = m ** (2 * n)
    if count > budget:
        raise BudgetExceeded(f"{m}^{2 * n} = {count} nodes exceeds budget {budget}")
    s, w = np.polynomial.hermite.hermgauss(m)
    # axis density pi^{-1/2} e^{-s^2}: real and imaginary parts have variance 1/2
    w = w / np.sqrt(np.pi)
    axes = np.meshgrid(*([np.arange(m)] * (2 * n)), indexing="ij")
    idx = np.stack([a.ravel() for a in axes], axis=-1)
    nodes = s[idx[:, :n]] + 1j * s[idx[:, n:]]
    weights = np.prod(w[idx], axis=-1)
    weights = weights / weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureGrid(n, m, nodes, weights)


def check_growth(f, allowed=("polynomial", "exp-linear")):
    tag = getattr(f, "growth", "polynomial")
    if tag not in allowed:
        raise GrowthClassError(f"field growth {tag!r} not accepted here (allowed: {allowed})")


def integrate(f, grid: QuadratureGrid):
    """Quadrature of ``int f dgamma_n`` on the tensor grid."""
    check_growth(f)
    fn = getattr(f, "n", None)
    if fn is not None and fn != grid.n:
        raise ValueError(f"field on C^{fn} integrated on a C^{grid.n} grid")
    vals = np.asarray(f(grid.nodes))
    if not np.all(np.isfinite(vals)):
        raise FieldEvaluationError("non-finite value on quadrature grid")
    return grid.weights @ vals


# ---------------------------------------------------------------------------
# permanents


def permanent(M, max_dim=PERMANENT_MAX_DIM):
    """Permanent by Ryser's formula, walking subsets in Gray-code order.

    Blocks of consecutive Gray codes are handled at once: row sums inside a
    block come from a cumulative sum of single-column updates, and each
    block restarts from exactly recomputed row sums.
    """
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("permanent needs a square matrix")
    m = A.shape[0]
    if m > max_dim:
        raise BudgetExceeded(f"dimension {m} exceeds permanent budget {max_dim}")
    if m == 0:
        return 1.0 + 0j
    if m == 1:
        return complex(A[0, 0])
    end = 1 << m
    block = min(end - 1, 1 << 14)
    AT = A.T.copy()
    rowsum = np.zeros(m, dtype=complex)
    total = 0j
    for start in range(1, end, block):
        ks = np.arange(start, min(start + block, end), dtype=np.int64)
        low = ks & -ks
        col = np.frexp(low.astype(float))[1] - 1
        gray = ks ^ (ks >> 1)
        sign = np.where(gray & low, 1.0, -1.0)
        sums = rowsum + np.cumsum(sign[:, None] * AT[col], axis=0)
        prods = np.prod(sums, axis=1)
        # |S| = popcount(gray(k)) has the parity of k
        total += np.sum(np.where(ks & 1, -prods, prods))
        g = int(gray[-1])
        bits = np.array([(g >> j) & 1 for j in range(m)], dtype=bool)
        rowsum = AT[bits].sum(axis=0)
    return complex((-1) ** m * total)


def wick_moment(spec: CovarianceSpec, p):
    """``E prod_j |X_j|^{2 p_j}`` as a permanent of the repeated covariance."""
    p = np.asarray(p, dtype=int)
    if p.shape != (spec.N,) or np.any(p < 0):
        raise ValueError("p must be a nonnegative integer vector of length N")
    m = int(p.sum())
    if m > PERMANENT_MAX_DIM:
        raise BudgetExceeded(f"total order {m} exceeds permanent budget")
    if m == 0:
        return 1.0
    idx = np.repeat(np.arange(spec.N), p)
    C = spec.covariance
    val = permanent(C[np.ix_(idx, idx)])
    if abs(val.imag) > 1e-10 * max(1.0, abs(val)):
        raise ArithmeticError(f"permanent of PSD block has imaginary part {val.imag}")
    return float(val.real)
