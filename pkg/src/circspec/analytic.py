"""Exact eigenvalue law of the random circulant model.

The interleaved eigenvalue vector ``eta = (Re l_1, Im l_1, ..., Re l_N, Im l_N)``
is an affine image ``Q^T h`` of the Gaussian entry vector, hence Gaussian
with mean ``nu = Q^T mu`` and covariance ``T = Q^T Sigma Q``.  Everything
here (joint, marginal and symmetrised densities, the modulus-squared law of
``H H^dagger``) is derived from ``(nu, T)``.

Indices are zero-based throughout: eigenvalue ``j`` occupies coordinates
``2j`` (real part) and ``2j + 1`` (imaginary part) of ``eta``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import cho_factor, cho_solve
from scipy.special import erf

from .exceptions import (
    CapacityError,
    InvalidParameterError,
    SingularComponentError,
    SingularCovarianceError,
    UnsupportedMeanError,
)
from .model import ModelParams, build_transform_q, build_trig_tables
from .numerics import MixtureCdfSpec, PSDFactorization, bessel_i0e, cumulative_integral, mixture_cdf, mixture_pdf

__all__ = [
    "SpectralLaw",
    "TwoByTwoLaw",
    "spectral_law",
    "jpdf_ordered",
    "log_jpdf_ordered",
    "marginal_joint",
    "log_marginal_joint",
    "jpdf_unordered",
    "log_jpdf_unordered",
    "pair_density",
    "unordered_pair_density",
    "forced_real_indices",
    "mixture_spec",
    "mixture_marginal",
    "mixture_marginal_cdf",
    "ttilde_eigs",
    "wishart_density",
    "wishart_cdf",
    "wishart_laplace",
    "MAX_UNORDERED_N",
]

MAX_UNORDERED_N = 8
_LOG2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class SpectralLaw:
    """Mean ``nu`` (2N) and covariance ``T`` (2N x 2N) of the eigenvalue vector."""

    nu: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        nu = np.array(self.nu, dtype=float).reshape(-1)
        T = np.array(self.T, dtype=float)
        if nu.shape[0] % 2 or T.shape != (nu.shape[0], nu.shape[0]):
            raise InvalidParameterError(f"inconsistent law shapes nu={nu.shape}, T={T.shape}")
        nu.setflags(write=False)
        T.setflags(write=False)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "T", T)

    @property
    def n(self) -> int:
        return self.nu.shape[0] // 2

    @property
    def det_tol(self) -> float:
        """Variance below which a coordinate counts as deterministic."""
        return 1e-12 * max(float(np.trace(self.T)), 0.0) / (2 * self.n)

    @cached_property
    def factor(self) -> PSDFactorization:
        return PSDFactorization(self.T, tol=self.det_tol)

    def deterministic_coordinates(self):
        d = np.diag(self.T)
        return tuple(int(k) for k in np.flatnonzero(d < self.det_tol))

    def singular_error(self, what, factor=None, coords=None):
        factor = self.factor if factor is None else factor
        dirs = self.deterministic_coordinates()
        if coords is not None:
            dirs = tuple(k for k in dirs if k in set(coords))
        if not dirs:
            dirs = factor.deterministic if coords is None else tuple(coords[i] for i in factor.deterministic)
        return SingularCovarianceError(
            f"{what}: covariance has rank {factor.rank} < {factor.n}; "
            f"deterministic eta coordinates {list(dirs)} with forced values "
            f"{[float(self.nu[k]) for k in dirs]} (use a small non-zero variance, "
            f"e.g. the epsilon scenario, for a smooth density)",
            rank=factor.rank,
            directions=dirs,
            forced_values=[self.nu[k] for k in dirs],
        )

    def block(self, j):
        """2x2 covariance block and mean of eigenvalue ``j``."""
        s = slice(2 * j, 2 * j + 2)
        return self.nu[s], self.T[s, s]

    def to_dict(self):
        return {"n": self.n, "nu": self.nu.tolist(), "T": self.T.tolist()}


@dataclass(frozen=True)
class TwoByTwoLaw:
    """Covariance block of one eigenvalue and its eigenvalues ``tplus >= tminus``."""

    j: int
    nu2: tuple
    T2: tuple
    tplus: float
    tminus: float


def _closed_form(params: ModelParams, tables):
    C, S = tables.C, tables.S
    s2, t2 = params.sigma2, params.tau2
    u, v = params.u, params.v
    n = params.n
    T = np.empty((2 * n, 2 * n))
    T[0::2, 0::2] = (C * s2) @ C.T + (S * t2) @ S.T
    T[0::2, 1::2] = (C * s2) @ S.T - (S * t2) @ C.T
    T[1::2, 0::2] = (S * s2) @ C.T - (C * t2) @ S.T
    T[1::2, 1::2] = (S * s2) @ S.T + (C * t2) @ C.T
    nu = np.empty(2 * n)
    nu[0::2] = C @ u - S @ v
    nu[1::2] = C @ v + S @ u
    return nu, T


def _matrix_product(params: ModelParams, tables):
    Q = build_transform_q(tables).Q
    nu = Q.T @ params.mean_vector()
    T = (Q.T * params.variance_vector()) @ Q
    return nu, T


def spectral_law(params: ModelParams, method="closed-form", tables=None) -> SpectralLaw:
    """Mean and covariance of the eigenvalue vector.

    ``method="closed-form"`` evaluates the element-wise trigonometric sums,
    ``method="matrix-product"`` forms ``Q^T mu`` and ``Q^T Sigma Q``.
    """
    tables = build_trig_tables(params.n) if tables is None else tables
    if tables.n != params.n:
        raise InvalidParameterError(f"tables are for N={tables.n}, params have N={params.n}")
    if method == "closed-form":
        nu, T = _closed_form(params, tables)
    elif method == "matrix-product":
        nu, T = _matrix_product(params, tables)
    else:
        raise InvalidParameterError(f"unknown method {method!r}")
    return SpectralLaw(nu, 0.5 * (T + T.T))


def _as_points(x, dim, what):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (dim,):
        raise InvalidParameterError(f"{what} must have trailing dimension {dim}, got shape {x.shape}")
    return x


def _gauss_logpdf(factor, mean, x):
    k = mean.shape[0]
    return -0.5 * (k * _LOG2PI + factor.logdet + factor.mahalanobis(x - mean))


def log_jpdf_ordered(law: SpectralLaw, eta):
    """Log density of the ordered eigenvalue vector; ``eta`` is (..., 2N)."""
    eta = _as_points(eta, 2 * law.n, "eta")
    if not law.factor.full_rank:
        raise law.singular_error("ordered joint density undefined")
    return _gauss_logpdf(law.factor, law.nu, eta)


def jpdf_ordered(law: SpectralLaw, eta):
    return np.exp(log_jpdf_ordered(law, eta))


def _restrict(law, indices):
    idx = np.asarray(indices, dtype=int).reshape(-1)
    if idx.size == 0:
        raise InvalidParameterError("indices must be non-empty")
    if len(set(idx.tolist())) != idx.size:
        raise InvalidParameterError("indices must be distinct")
    if idx.min() < 0 or idx.max() >= 2 * law.n:
        raise InvalidParameterError(f"indices must lie in [0, {2 * law.n - 1}]")
    return idx


def log_marginal_joint(law: SpectralLaw, indices, values):
    idx = _restrict(law, indices)
    values = _as_points(values, idx.size, "values")
    if idx.size == 2 * law.n and np.array_equal(idx, np.arange(2 * law.n)):
        return log_jpdf_ordered(law, values)
    Tsub = law.T[np.ix_(idx, idx)]
    factor = PSDFactorization(Tsub, tol=law.det_tol)
    if not factor.full_rank:
        raise law.singular_error("marginal density undefined", factor, coords=idx.tolist())
    return _gauss_logpdf(factor, law.nu[idx], values)


def marginal_joint(law: SpectralLaw, indices, values):
    """Gaussian density of the eta coordinates listed in ``indices``."""
    return np.exp(log_marginal_joint(law, indices, values))


def pair_density(law: SpectralLaw, j, x, y):
    """Density of eigenvalue ``j`` in the complex plane at ``x + iy``."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    return marginal_joint(law, [2 * j, 2 * j + 1], np.stack([x, y], axis=-1))


def unordered_pair_density(law: SpectralLaw, x, y):
    """Complex-plane density of a uniformly chosen eigenvalue."""
    return sum(pair_density(law, j, x, y) for j in range(law.n)) / law.n


def _pair_permutations(n):
    return np.array(list(itertools.permutations(range(n))), dtype=int)


def log_jpdf_unordered(law: SpectralLaw, eta):
    """Log of the density symmetrised over all N! eigenvalue relabelings.

    Every term shares ``det T``; relabelling the mean and covariance is the
    same as relabelling the argument, so a single factorisation serves all
    terms.
    """
    n = law.n
    if n > MAX_UNORDERED_N:
        raise CapacityError(
            f"unordered joint density needs N! terms; N={n} exceeds the cap {MAX_UNORDERED_N}"
        )
    eta = _as_points(eta, 2 * n, "eta")
    if not law.factor.full_rank:
        raise law.singular_error("unordered joint density undefined (all N! terms share the covariance)")
    perms = _pair_permutations(n)
    lognfact = math.lgamma(n + 1)
    flat = eta.reshape(-1, n, 2)
    out = np.empty(flat.shape[0])
    rows = np.arange(perms.shape[0])[:, None]
    for i, pairs in enumerate(flat):
        y = np.empty((perms.shape[0], n, 2))
        y[rows, perms] = pairs[None, :, :]
        logs = _gauss_logpdf(law.factor, law.nu, y.reshape(-1, 2 * n))
        top = logs.max()
        out[i] = top + math.log(np.sum(np.exp(logs - top))) - lognfact
    return out.reshape(eta.shape[:-1])


def jpdf_unordered(law: SpectralLaw, eta):
    return np.exp(log_jpdf_unordered(law, eta))


def forced_real_indices(n):
    """Eigenvalues that are real for every real circulant: j = 0 and, for even N, j = N/2."""
    return (0, n // 2) if n % 2 == 0 else (0,)


def mixture_spec(law: SpectralLaw, part="re", exclude_forced_real=False) -> MixtureCdfSpec:
    """Equal-weight Gaussian mixture for the real or imaginary part of a generic eigenvalue."""
    if part not in ("re", "im"):
        raise InvalidParameterError(f"part must be 're' or 'im', got {part!r}")
    n = law.n
    js = list(range(n))
    if exclude_forced_real:
        if n < (3 if n % 2 == 0 else 2):
            raise InvalidParameterError(f"exclusion needs N >= 2 (odd) or N >= 3 (even); got N={n}")
        forced = set(forced_real_indices(n))
        js = [j for j in js if j not in forced]
    coords = np.array([2 * j + (part == "im") for j in js])
    var = np.diag(law.T)[coords]
    bad = coords[var < law.det_tol]
    if bad.size:
        raise SingularComponentError(
            f"mixture components at eta coordinates {bad.tolist()} have zero variance; "
            "pass exclude_forced_real=True or use the epsilon scenario",
            rank=None,
            directions=bad,
            forced_values=law.nu[bad],
        )
    return MixtureCdfSpec.uniform(law.nu[coords], var)


def mixture_marginal(law: SpectralLaw, part, x, exclude_forced_real=False):
    return mixture_pdf(mixture_spec(law, part, exclude_forced_real), x)


def mixture_marginal_cdf(law: SpectralLaw, part, x, exclude_forced_real=False):
    return mixture_cdf(mixture_spec(law, part, exclude_forced_real), x)


def _block_eigs(T2):
    a, b, c, d = T2[0, 0], T2[0, 1], T2[1, 0], T2[1, 1]
    tr = a + d
    det = a * d - b * c
    disc = math.sqrt(max((a - d) ** 2 + 4.0 * b * c, 0.0))
    tplus = 0.5 * (tr + disc)
    tminus = det / tplus if tplus > 0 else 0.0
    # PSD blocks only go negative through roundoff
    return max(tplus, 0.0), max(tminus, 0.0)


def ttilde_eigs(law: SpectralLaw, j) -> TwoByTwoLaw:
    """Eigenvalues of the 2x2 covariance block of eigenvalue ``j``.

    The larger root comes from the discriminant, the smaller as ``det / t+``
    to avoid cancellation.
    """
    j = int(j)
    if not 0 <= j < law.n:
        raise InvalidParameterError(f"eigenvalue index j={j} out of range [0, {law.n})")
    nu2, T2 = law.block(j)
    tplus, tminus = _block_eigs(T2)
    return TwoByTwoLaw(j, tuple(nu2.tolist()), tuple(map(tuple, T2.tolist())), tplus, tminus)


def _mean_is_zero(law, js):
    coords = np.concatenate([[2 * j, 2 * j + 1] for j in js])
    scale = math.sqrt(max(float(np.max(np.diag(law.T))), 0.0))
    return np.all(np.abs(law.nu[coords]) <= 1e-9 + 1e-9 * scale)


def _wishart_blocks(law, j):
    js = range(law.n) if j is None else [int(j)]
    if not _mean_is_zero(law, js):
        raise UnsupportedMeanError(
            "modulus-squared density is only available for zero mean; "
            "use wishart_laplace for non-zero means"
        )
    blocks = [ttilde_eigs(law, jj) for jj in js]
    for blk in blocks:
        if blk.tplus <= 0:
            raise SingularCovarianceError(
                f"eigenvalue {blk.j} is deterministic (zero covariance block)",
                rank=0,
                directions=(2 * blk.j, 2 * blk.j + 1),
                forced_values=(0.0, 0.0),
            )
    return blocks


def _degenerate(blk):
    return blk.tminus <= 1e-12 * (blk.tplus + blk.tminus)


def _pw(blk, w):
    tp, tm = blk.tplus, blk.tminus
    with np.errstate(divide="ignore"):
        if _degenerate(blk):
            # one-dimensional limit: w = t+ * chi^2_1
            return np.exp(-w / (2 * tp)) / np.sqrt(2 * np.pi * tp * w)
        z = (1.0 / tm - 1.0 / tp) * w / 4.0
        return np.exp(-w / (2 * tp)) * bessel_i0e(z) / (2.0 * math.sqrt(tp * tm))


def wishart_density(law: SpectralLaw, w, j=None):
    """Density of ``|lambda_j|^2`` (an eigenvalue of ``H H^dagger``), zero-mean case.

    ``j=None`` gives the density of a uniformly chosen eigenvalue.  Uses the
    scaled Bessel function throughout, so large arguments never overflow.
    """
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise InvalidParameterError("modulus-squared eigenvalues are non-negative")
    blocks = _wishart_blocks(law, j)
    return sum(_pw(blk, w) for blk in blocks) / len(blocks)


def _pw_cdf(blk, w, panels):
    tp, tm = blk.tplus, blk.tminus
    if _degenerate(blk):
        return erf(np.sqrt(w / (2 * tp)))
    # integrate in y = sqrt(w) so the integrand 2 y p(y^2) is smooth at 0
    ymax = math.sqrt(2 * tp * (40.0 + 0.5 * math.log(tp / tm)))
    y = np.linspace(0.0, ymax, panels + 1)

    def g(yy):
        return 2.0 * yy * _pw(blk, yy * yy)

    F = cumulative_integral(g, y)
    spline = CubicHermiteSpline(y, F, g(y))
    yw = np.sqrt(w)
    return np.where(yw >= ymax, F[-1], spline(np.minimum(yw, ymax)))


def wishart_cdf(law: SpectralLaw, w, j=None, panels=2000):
    """Numerically integrated CDF matching :func:`wishart_density`."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise InvalidParameterError("modulus-squared eigenvalues are non-negative")
    blocks = _wishart_blocks(law, j)
    out = sum(_pw_cdf(blk, w, panels) for blk in blocks) / len(blocks)
    return np.clip(out, 0.0, 1.0)


def wishart_laplace(law: SpectralLaw, s):
    """Joint Laplace transform ``E[exp(-sum_l s_l |lambda_l|^2)]``.

    Evaluated as ``det(1 + 2 D T D)^-1/2 exp(-(D nu)^T (1 + 2 D T D)^-1 (D nu))``
    with ``D = diag(sqrt(s_1), sqrt(s_1), ...)``; the matrix is always
    positive definite for ``s >= 0`` and no inverse of ``T`` appears, so
    singular covariances and non-zero means are both fine.
    """
    s = np.asarray(s, dtype=float).reshape(-1)
    if s.shape != (law.n,):
        raise InvalidParameterError(f"s must have length {law.n}")
    if np.any(s < 0):
        raise InvalidParameterError("Laplace variables must be non-negative")
    d = np.sqrt(np.repeat(s, 2))
    M = np.eye(2 * law.n) + 2.0 * (d[:, None] * law.T * d[None, :])
    cf = cho_factor(M, lower=True)
    logdet = 2.0 * np.sum(np.log(np.diag(cf[0])))
    x = d * law.nu
    quad = float(x @ cho_solve(cf, x))
    return float(math.exp(-quad - 0.5 * logdet))
