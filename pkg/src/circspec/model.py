"""Random circulant matrix model H = A + iB.

The model is fixed by the first column ``h_r = a_r + i b_r`` of H, with
independent Gaussian entries ``a_r ~ N(u_r, sigma2_r)`` and
``b_r ~ N(v_r, tau2_r)``.  Eigenvalues are indexed by the root of unity
``omega_j = exp(2 pi i j / N)`` (zero-based ``j``) and are never re-sorted.

All arrays exposed by the types in this module are read-only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._rng import as_generator
from .exceptions import InvalidParameterError

__all__ = [
    "ModelParams",
    "FirstColumn",
    "TrigTables",
    "TransformQ",
    "EtaSample",
    "build_trig_tables",
    "build_transform_q",
    "sample_entries",
    "sample_h_block",
    "build_dense",
    "fourier_matrix",
    "eigenvalues_closed_form",
    "eta_from_columns",
    "interleave",
    "deinterleave",
]


def _frozen(x, name, n=None):
    if np.ndim(x) == 0:
        arr = np.full(n or 1, float(x))
    else:
        arr = np.array(x, dtype=float).reshape(-1)
    if n is not None and arr.shape != (n,):
        raise InvalidParameterError(f"{name} must have length {n}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


def interleave(re, im):
    """Stack ``re`` and ``im`` along the last axis as (re_1, im_1, re_2, ...)."""
    re = np.asarray(re)
    im = np.asarray(im)
    out = np.empty(re.shape[:-1] + (2 * re.shape[-1],), dtype=np.result_type(re, im))
    out[..., 0::2] = re
    out[..., 1::2] = im
    return out


def deinterleave(x):
    x = np.asarray(x)
    return x[..., 0::2], x[..., 1::2]


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Means and variances of the 2N independent Gaussian entries.

    ``sigma2`` and ``tau2`` are variances (not standard deviations).  A zero
    variance makes the corresponding entry deterministic.  Scalars broadcast
    to the length of the array-valued fields.
    """

    u: np.ndarray
    v: np.ndarray
    sigma2: np.ndarray
    tau2: np.ndarray

    def __post_init__(self):
        fields = (self.u, self.v, self.sigma2, self.tau2)
        n = max((np.size(f) for f in fields if np.ndim(f)), default=1)
        u = _frozen(self.u, "u", n)
        if n < 1:
            raise InvalidParameterError("dimension N must be at least 1")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", _frozen(self.v, "v", n))
        object.__setattr__(self, "sigma2", _frozen(self.sigma2, "sigma2", n))
        object.__setattr__(self, "tau2", _frozen(self.tau2, "tau2", n))
        if np.any(self.sigma2 < 0) or np.any(self.tau2 < 0):
            raise InvalidParameterError("variances must be non-negative")

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @classmethod
    def from_std(cls, u, v, sigma, tau):
        """Build from standard deviations, which is how most configurations are written."""
        return cls(u, v, np.square(np.asarray(sigma, float)), np.square(np.asarray(tau, float)))

    @classmethod
    def iid(cls, n, sigma2, tau2=None, u=0.0, v=0.0):
        tau2 = sigma2 if tau2 is None else tau2
        return cls(np.full(n, u), np.full(n, v), np.full(n, sigma2), np.full(n, tau2))

    def mean_vector(self):
        """Interleaved mean vector (u_1, v_1, ..., u_N, v_N)."""
        return interleave(self.u, self.v)

    def variance_vector(self):
        return interleave(self.sigma2, self.tau2)

    def to_dict(self):
        return {
            "n": self.n,
            "u": self.u.tolist(),
            "v": self.v.tolist(),
            "sigma2": self.sigma2.tolist(),
            "tau2": self.tau2.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        try:
            params = cls(d["u"], d["v"], d["sigma2"], d["tau2"])
        except KeyError as exc:
            raise InvalidParameterError(f"params document is missing field {exc}") from None
        if "n" in d and int(d["n"]) != params.n:
            raise InvalidParameterError(f"field n={d['n']} disagrees with vector length {params.n}")
        return params

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, ModelParams):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("u", "v", "sigma2", "tau2")
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class FirstColumn:
    """First column of H: real parts ``a`` and imaginary parts ``b``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _frozen(self.a, "a")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", _frozen(self.b, "b", a.shape[0]))

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def h(self):
        return self.a + 1j * self.b

    @property
    def h_vector(self):
        """Interleaved real vector (a_1, b_1, ..., a_N, b_N)."""
        return interleave(self.a, self.b)

    @staticmethod
    def csv_header(n):
        return [f"a_{r}" for r in range(1, n + 1)] + [f"b_{r}" for r in range(1, n + 1)]

    def to_row(self):
        return np.concatenate([self.a, self.b]).tolist()

    @classmethod
    def from_row(cls, row):
        row = np.asarray(row, dtype=float)
        if row.ndim != 1 or row.shape[0] % 2:
            raise InvalidParameterError("first-column row must hold 2N values")
        n = row.shape[0] // 2
        return cls(row[:n], row[n:])

    def __add__(self, other):
        return FirstColumn(self.a + other.a, self.b + other.b)

    def __mul__(self, alpha):
        return FirstColumn(alpha * self.a, alpha * self.b)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class TrigTables:
    """``C[j, r] = cos(2 pi j (N - r) / N)`` and the matching sines.

    Indices are zero-based, so row ``j`` belongs to the root of unity
    ``exp(2 pi i j / N)`` and column ``r`` to the entry ``h_{r+1}``.
    """

    n: int
    C: np.ndarray
    S: np.ndarray


@dataclass(frozen=True, eq=False)
class TransformQ:
    """2N x 2N matrix mapping the interleaved entry vector h to eta = Q^T h."""

    Q: np.ndarray

    @property
    def n(self) -> int:
        return self.Q.shape[0] // 2


@dataclass(frozen=True, eq=False)
class EtaSample:
    """Interleaved real/imaginary parts of the N eigenvalues of one matrix."""

    eta: np.ndarray

    def __post_init__(self):
        eta = _frozen(self.eta, "eta")
        if eta.shape[0] % 2:
            raise InvalidParameterError("eta must have even length 2N")
        object.__setattr__(self, "eta", eta)

    @property
    def n(self) -> int:
        return self.eta.shape[0] // 2

    @property
    def eigenvalues(self):
        return self.eta[0::2] + 1j * self.eta[1::2]

    @staticmethod
    def csv_header(n):
        return [c for j in range(1, n + 1) for c in (f"re_{j}", f"im_{j}")]

    def to_row(self):
        return self.eta.tolist()


def build_trig_tables(n) -> TrigTables:
    """Cosine/sine tables of the eigenvalue map, exact at quarter turns.

    The angle index ``j * (N - r) mod N`` is reduced in integers before any
    floating-point work, folded onto ``[0, N/2]`` so that conjugate rows are
    bitwise mirror images, and multiples of pi/2 are set exactly.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidParameterError(f"invalid dimension N={n!r}; need an integer >= 1")
    n = int(n)
    j = np.arange(n, dtype=np.int64)[:, None]
    r = np.arange(n, dtype=np.int64)[None, :]
    m = (j * ((n - r) % n)) % n
    folded = np.minimum(m, n - m)
    sign = np.where(m > n - m, -1.0, 1.0)
    theta = 2.0 * np.pi * folded / n
    C = np.cos(theta)
    S = sign * np.sin(theta)
    quarter = (4 * m) % n == 0
    q = (4 * m[quarter]) // n
    C[quarter] = np.array([1.0, 0.0, -1.0, 0.0])[q]
    S[quarter] = np.array([0.0, 1.0, 0.0, -1.0])[q]
    C.setflags(write=False)
    S.setflags(write=False)
    return TrigTables(n, C, S)


def build_transform_q(tables: TrigTables) -> TransformQ:
    """Columns are (K1 t_1, K2 t_1, K1 t_2, K2 t_2, ...).

    With ``t_j = (C_j1, S_j1, ..., C_jN, S_jN)``, ``K1 = 1 (x) sigma_z`` and
    ``K2 = 1 (x) sigma_x``.
    """
    n = tables.n
    Q = np.empty((2 * n, 2 * n))
    Q[0::2, 0::2] = tables.C.T
    Q[1::2, 0::2] = -tables.S.T
    Q[0::2, 1::2] = tables.S.T
    Q[1::2, 1::2] = tables.C.T
    Q.setflags(write=False)
    return TransformQ(Q)


def sample_h_block(params: ModelParams, rng, size):
    """Draw ``size`` interleaved entry vectors, shape (size, 2N)."""
    rng = as_generator(rng)
    z = rng.standard_normal((size, 2 * params.n))
    return params.mean_vector() + np.sqrt(params.variance_vector()) * z


def sample_entries(params: ModelParams, rng=None) -> FirstColumn:
    h = sample_h_block(params, rng, 1)[0]
    a, b = deinterleave(h)
    return FirstColumn(a, b)


def build_dense(fc: FirstColumn):
    """Dense complex circulant with entry (p, q) equal to h[(p - q) mod N]."""
    n = fc.n
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return fc.h[idx]


def fourier_matrix(n):
    """Unitary U with ``U[j, k] = omega_j**k / sqrt(N)`` (zero-based)."""
    m = (np.arange(n)[:, None] * np.arange(n)[None, :]) % n
    return np.exp(2j * np.pi * m / n) / np.sqrt(n)


def _check_tables(n, tables):
    if tables is None:
        return build_trig_tables(n)
    if tables.n != n:
        raise InvalidParameterError(f"tables are for N={tables.n}, data has N={n}")
    return tables


def eta_from_columns(a, b, tables: TrigTables | None = None):
    """Vectorised closed form for stacked first columns ``a``, ``b`` (..., N)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    tables = _check_tables(a.shape[-1], tables)
    C, S = tables.C, tables.S
    re = a @ C.T - b @ S.T
    im = a @ S.T + b @ C.T
    return interleave(re, im)


def eigenvalues_closed_form(fc: FirstColumn, tables: TrigTables | None = None) -> EtaSample:
    return EtaSample(eta_from_columns(fc.a, fc.b, tables))
