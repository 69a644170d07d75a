"""Special functions, PSD factorisation, quadrature and goodness-of-fit tools."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, special
from scipy.linalg import solve_triangular

from .exceptions import (
    AccuracyError,
    InvalidParameterError,
    NotPSDError,
    SingularCovarianceError,
)

__all__ = [
    "bessel_i0",
    "bessel_i0e",
    "PSDFactorization",
    "psd_factorize",
    "MixtureCdfSpec",
    "mixture_cdf",
    "mixture_pdf",
    "normal_cdf",
    "ks_statistic",
    "chi_square",
    "QuadResult",
    "quad_adaptive",
    "cumulative_integral",
]

# |x| at or below this uses the power series; beyond it the asymptotic
# expansion.  The expansion's smallest term is about exp(-2|x|), so it only
# reaches double precision for |x| >~ 19.
BESSEL_SWITCH = 30.0
_EPS = np.finfo(float).eps


def _i0_series(ax):
    """Sum_k (x^2/4)^k / (k!)^2 for 0 <= ax <= BESSEL_SWITCH."""
    q = 0.25 * ax * ax
    term = np.ones_like(ax)
    total = np.ones_like(ax)
    k = 0
    while True:
        k += 1
        term = term * q / (k * k)
        total = total + term
        if np.all(term <= 0.25 * _EPS * total):
            return total


def _i0e_asymptotic(ax):
    """exp(-x) I0(x) ~ (2 pi x)^-1/2 sum_k ((2k-1)!!)^2 / (k! (8x)^k)."""
    term = np.ones_like(ax)
    total = np.ones_like(ax)
    k = 0
    while True:
        k += 1
        term = term * (2 * k - 1) ** 2 / (8.0 * k * ax)
        total = total + term
        if np.all(term <= 0.25 * _EPS * total) or k > 60:
            return total / np.sqrt(2.0 * np.pi * ax)


def bessel_i0e(x):
    """Exponentially scaled ``exp(-|x|) I0(x)``; finite for every finite x."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax <= BESSEL_SWITCH
    if np.any(small):
        out[small] = np.exp(-ax[small]) * _i0_series(ax[small])
    if np.any(~small):
        out[~small] = _i0e_asymptotic(ax[~small])
    return out[()] if out.ndim == 0 else out


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero.

    Overflows to ``inf`` for |x| above about 713, like the true value.
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax <= BESSEL_SWITCH
    if np.any(small):
        out[small] = _i0_series(ax[small])
    if np.any(~small):
        with np.errstate(over="ignore"):
            out[~small] = np.exp(ax[~small]) * _i0e_asymptotic(ax[~small])
    return out[()] if out.ndim == 0 else out


class PSDFactorization:
    """Pivoted Cholesky factorisation ``P^T T P = L L^T`` of a PSD matrix.

    Pivots below ``tol`` end the factorisation; the coordinates left over
    are reported as deterministic directions.  Nothing here forms an
    explicit inverse.
    """

    def __init__(self, T, tol=None):
        T = np.array(T, dtype=float)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise InvalidParameterError(f"expected a square matrix, got shape {T.shape}")
        n = T.shape[0]
        scale = max(np.trace(T), 0.0) / max(n, 1)
        if not np.allclose(T, T.T, rtol=1e-12, atol=1e-12 * max(scale, 1e-300)):
            raise InvalidParameterError("matrix is not symmetric")
        if tol is None:
            tol = 1e-12 * scale
        self.n = n
        self.tol = tol
        self._T = T

        A = 0.5 * (T + T.T)
        perm = np.arange(n)
        L = np.zeros((n, n))
        rank = n
        for k in range(n):
            d = np.diag(A)[k:]
            p = k + int(np.argmax(d))
            if d.max() <= tol:
                rank = k
                break
            if p != k:
                A[[k, p]] = A[[p, k]]
                A[:, [k, p]] = A[:, [p, k]]
                L[[k, p]] = L[[p, k]]
                perm[[k, p]] = perm[[p, k]]
            piv = np.sqrt(A[k, k])
            L[k, k] = piv
            L[k + 1:, k] = A[k + 1:, k] / piv
            A[k + 1:, k + 1:] -= np.outer(L[k + 1:, k], L[k + 1:, k])
        if rank < n:
            # a PSD remainder has |off-diagonal| <= max diagonal, so anything
            # far above roundoff means the input was indefinite
            rest = A[rank:, rank:]
            if np.min(np.diag(rest)) < -tol or np.max(np.abs(rest)) > 1e-8 * max(scale, 1e-300):
                raise NotPSDError(
                    f"matrix is not positive semi-definite (residual pivot {np.min(np.diag(rest)):.3g})"
                )
        self.rank = rank
        self.perm = perm
        self.L = L[:, :rank]

    @property
    def full_rank(self):
        return self.rank == self.n

    @cached_property
    def deterministic(self):
        """Zero-based coordinates whose pivots fell below tolerance."""
        return tuple(sorted(int(i) for i in self.perm[self.rank:]))

    @cached_property
    def logdet(self):
        if not self.full_rank:
            return -np.inf
        return 2.0 * float(np.sum(np.log(np.diag(self.L))))

    def _singular(self, what, mean=None):
        dirs = self.deterministic
        forced = [] if mean is None else [mean[i] for i in dirs]
        return SingularCovarianceError(
            f"{what}: covariance has rank {self.rank} < {self.n}; "
            f"deterministic coordinates {list(dirs)}",
            rank=self.rank,
            directions=dirs,
            forced_values=forced,
        )

    def whiten(self, x, mean=None):
        """``L^-1 P^T x`` along the last axis; requires full rank."""
        if not self.full_rank:
            raise self._singular("cannot whiten", mean)
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, self.n)[:, self.perm]
        z = solve_triangular(self.L, flat.T, lower=True, check_finite=False)
        return z.T.reshape(x.shape)

    def mahalanobis(self, x, mean=None):
        """Quadratic form ``x^T T^-1 x`` over the last axis."""
        z = self.whiten(x, mean)
        return np.sum(z * z, axis=-1)

    def solve(self, b, rtol=1e-10):
        """Solve ``T x = b``.

        For rank-deficient ``T`` a solution with zero components on the
        deterministic coordinates is returned, provided ``b`` has no
        component along the null directions (relative ``rtol``).
        """
        b = np.asarray(b, dtype=float)
        bp = b[self.perm]
        r = self.rank
        L1 = self.L[:r]
        y = solve_triangular(L1, bp[:r], lower=True, check_finite=False)
        if r < self.n:
            resid = bp[r:] - self.L[r:] @ y
            if np.max(np.abs(resid)) > rtol * max(np.max(np.abs(b)), 1e-300):
                raise self._singular("right-hand side has components along null directions")
        xp = np.zeros(self.n)
        xp[:r] = solve_triangular(L1.T, y, lower=False, check_finite=False)
        x = np.empty(self.n)
        x[self.perm] = xp
        return x


def psd_factorize(T, tol=None) -> PSDFactorization:
    return PSDFactorization(T, tol)


def normal_cdf(z):
    return special.ndtr(z)


@dataclass(frozen=True, eq=False)
class MixtureCdfSpec:
    """One-dimensional Gaussian mixture."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        m = np.asarray(self.means, dtype=float).reshape(-1)
        v = np.asarray(self.variances, dtype=float).reshape(-1)
        if not (w.shape == m.shape == v.shape) or w.size == 0:
            raise InvalidParameterError("weights, means and variances must be equal-length and non-empty")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidParameterError(f"weights must be non-negative and sum to 1 (sum={w.sum()!r})")
        if np.any(v <= 0):
            raise InvalidParameterError("mixture variances must be positive")
        for name, arr in (("weights", w), ("means", m), ("variances", v)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def uniform(cls, means, variances):
        means = np.asarray(means, dtype=float)
        return cls(np.full(means.shape, 1.0 / means.size), means, variances)


def mixture_cdf(spec: MixtureCdfSpec, x):
    x = np.asarray(x, dtype=float)
    z = (x[..., None] - spec.means) / np.sqrt(spec.variances)
    return np.clip(normal_cdf(z) @ spec.weights, 0.0, 1.0)


def mixture_pdf(spec: MixtureCdfSpec, x):
    x = np.asarray(x, dtype=float)
    var = spec.variances
    dens = np.exp(-0.5 * (x[..., None] - spec.means) ** 2 / var) / np.sqrt(2 * np.pi * var)
    return dens @ spec.weights


def ks_statistic(samples, cdf):
    """One-sample Kolmogorov-Smirnov distance ``sup |F_n - F|``.

    ``cdf`` is a vectorised callable.  Samples need not be pre-sorted.
    """
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    n = x.size
    if n == 0:
        raise InvalidParameterError("KS statistic needs at least one sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def chi_square(counts, edges, cdf, min_expected=5.0):
    """Pearson chi-square of binned counts against a continuous CDF.

    Bins whose expected count is below ``min_expected`` are excluded from
    the statistic but keep their residual.  Returns ``(stat, dof, residuals)``
    where residuals are ``(observed - expected) / sqrt(expected)`` per bin.
    """
    counts = np.asarray(counts, dtype=float)
    edges = np.asarray(edges, dtype=float)
    total = counts.sum()
    probs = np.diff(np.asarray(cdf(edges), dtype=float))
    expected = total * probs
    with np.errstate(divide="ignore", invalid="ignore"):
        resid = np.where(expected > 0, (counts - expected) / np.sqrt(expected), np.nan)
    keep = expected >= min_expected
    stat = float(np.sum(resid[keep] ** 2))
    return stat, int(max(keep.sum() - 1, 0)), resid


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float


def quad_adaptive(f, a, b=np.inf, tol=1e-10, limit=500, points=None) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of a scalar function on [a, b].

    ``b`` may be ``+inf``.  Raises :class:`AccuracyError` carrying the best
    estimate when the error bound stays above ``tol``.
    """
    if not tol > 0:
        raise InvalidParameterError("tol must be positive")
    kw = {"epsabs": tol, "epsrel": 0.0, "limit": limit, "full_output": 1}
    if points is not None and np.isfinite(b):
        kw["points"] = points
    out = integrate.quad(f, a, b, **kw)
    value, err = float(out[0]), float(out[1])
    if len(out) > 3 or err > tol:
        raise AccuracyError(
            f"quadrature on [{a}, {b}] did not reach tol={tol:g} (error bound {err:.3g})",
            estimate=value,
            error=err,
        )
    return QuadResult(value, err)


def cumulative_integral(f, nodes, order=16):
    """Integrals of ``f`` from ``nodes[0]`` to each node, Gauss-Legendre per panel.

    ``f`` must be vectorised.  Accuracy is that of an ``order``-point rule on
    every panel, so panels should be short relative to the scale of ``f``.
    """
    nodes = np.asarray(nodes, dtype=float)
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = nodes[:-1], nodes[1:]
    half = 0.5 * (hi - lo)
    pts = 0.5 * (hi + lo)[:, None] + half[:, None] * x[None, :]
    panel = half * (f(pts) @ w)
    return np.concatenate([[0.0], np.cumsum(panel)])
