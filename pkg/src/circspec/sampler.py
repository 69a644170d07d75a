"""Monte Carlo ensembles of eigenvalue observables, moments and histograms."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._rng import BLOCK_SIZE, map_blocks
from .exceptions import CapacityError, InsufficientDataError, InvalidParameterError
from .model import ModelParams, build_trig_tables, deinterleave, eta_from_columns, sample_h_block

__all__ = [
    "Observable",
    "DEFAULT_MEMORY_BUDGET",
    "observe",
    "pool",
    "iter_ensemble",
    "sample_ensemble",
    "StreamingMoments",
    "stream_moments",
    "empirical_moments",
    "Histogram",
    "histogram_build",
    "auto_edges",
    "stream_histogram",
]

# maximum number of float64 values a materialised sample matrix may hold
DEFAULT_MEMORY_BUDGET = 50_000_000
MAX_AUTO_BINS = 512


class Observable(str, Enum):
    """Per-matrix output: full eta, real parts (R), imaginary parts (J) or |lambda|^2 (W)."""

    ETA = "eta"
    R = "r"
    J = "j"
    W = "w"

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"etafull": "eta", "wignerr": "r", "wignerj": "j", "wishartw": "w"}
        key = str(value).lower().replace("_", "").replace("-", "")
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise InvalidParameterError(f"unknown observable {value!r}") from None

    def width(self, n):
        return 2 * n if self is Observable.ETA else n


def observe(eta, obs):
    """Map eta rows (..., 2N) onto the requested observable."""
    obs = Observable.coerce(obs)
    eta = np.asarray(eta, dtype=float)
    re, im = deinterleave(eta)
    if obs is Observable.ETA:
        return eta
    if obs is Observable.R:
        return re
    if obs is Observable.J:
        return im
    return re * re + im * im


def pool(rows, obs):
    """Pool per-matrix values into an unordered cloud.

    Eta rows become (M*N, 2) arrays of (re, im) pairs; other observables a
    flat (M*N,) array.  Values keep matrix-major, index-minor order.
    """
    rows = np.asarray(rows)
    if Observable.coerce(obs) is Observable.ETA:
        return rows.reshape(-1, 2)
    return rows.reshape(-1)


def _eta_block(params, tables):
    def draw(rng, size):
        a, b = deinterleave(sample_h_block(params, rng, size))
        return eta_from_columns(a, b, tables)

    return draw


def iter_ensemble(params: ModelParams, m, obs="eta", seed=0, n_threads=None, block_size=BLOCK_SIZE):
    """Yield blocks of observable rows, each of shape (block, width)."""
    if int(m) < 1:
        raise InvalidParameterError("ensemble size M must be >= 1")
    obs = Observable.coerce(obs)
    draw = _eta_block(params, build_trig_tables(params.n))
    for eta in map_blocks(draw, seed, m, n_threads, block_size):
        yield observe(eta, obs)


def sample_ensemble(
    params: ModelParams,
    m,
    obs="eta",
    ordered=True,
    seed=0,
    memory_budget=DEFAULT_MEMORY_BUDGET,
    n_threads=None,
):
    """Materialise an ensemble of ``m`` matrices.

    Ordered output is one row per matrix.  Unordered output pools all N
    eigenvalues of every matrix (see :func:`pool`).  The result is
    bit-identical for a given seed whatever the thread count.
    """
    obs = Observable.coerce(obs)
    m = int(m)
    if m < 1:
        raise InvalidParameterError("ensemble size M must be >= 1")
    size = m * obs.width(params.n)
    if memory_budget is not None and size > memory_budget:
        raise CapacityError(
            f"ensemble would hold {size} values, above the memory budget of {memory_budget}; "
            "use stream_moments / stream_histogram instead"
        )
    rows = np.concatenate(list(iter_ensemble(params, m, obs, seed, n_threads)), axis=0)
    return rows if ordered else pool(rows, obs)


@dataclass
class StreamingMoments:
    """Mergeable running mean and scatter matrix (Chan et al. pairwise update)."""

    count: int = 0
    mean: np.ndarray | None = None
    scatter: np.ndarray | None = None

    def update(self, block):
        block = np.atleast_2d(np.asarray(block, dtype=float))
        k = block.shape[0]
        if k == 0:
            return self
        bmean = block.mean(axis=0)
        centred = block - bmean
        other = StreamingMoments(k, bmean, centred.T @ centred)
        return self.merge(other)

    def merge(self, other):
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.scatter = other.count, other.mean.copy(), other.scatter.copy()
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        self.scatter = self.scatter + other.scatter + np.outer(delta, delta) * (self.count * other.count / n)
        self.mean = self.mean + delta * (other.count / n)
        self.count = n
        return self

    @property
    def covariance(self):
        if self.count < 2:
            raise InsufficientDataError(f"covariance needs at least 2 samples, have {self.count}")
        return self.scatter / (self.count - 1)


def empirical_moments(samples):
    """Column means and unbiased (M - 1 divisor) covariance."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {x.shape[0]}")
    acc = StreamingMoments().update(x)
    return acc.mean, acc.covariance


def stream_moments(params, m, obs="eta", seed=0, n_threads=None):
    """Mean and covariance of ordered observable rows without storing them."""
    acc = StreamingMoments()
    for block in iter_ensemble(params, m, obs, seed, n_threads):
        acc.update(block)
    return acc.mean, acc.covariance


@dataclass
class Histogram:
    """Binned counts in one or two dimensions.

    Bins are left-closed and right-open except the last bin on each axis,
    which is closed.  Samples outside the edges are counted in ``outside``
    and excluded from ``total``.
    """

    edges: tuple
    counts: np.ndarray
    total: int
    outside: int = 0
    mode: str = "pdf"
    meta: dict = field(default_factory=dict)

    @property
    def dims(self):
        return len(self.edges)

    @property
    def areas(self):
        widths = [np.diff(e) for e in self.edges]
        return widths[0] if self.dims == 1 else np.outer(widths[0], widths[1])

    @property
    def density(self):
        if self.total == 0:
            return np.zeros_like(self.counts, dtype=float)
        return self.counts / (self.total * self.areas)

    @property
    def values(self):
        return self.density if self.mode == "pdf" else self.counts

    @property
    def centers(self):
        return tuple(0.5 * (e[1:] + e[:-1]) for e in self.edges)

    def merge(self, other):
        if self.dims != other.dims or not all(np.array_equal(a, b) for a, b in zip(self.edges, other.edges)):
            raise InvalidParameterError("can only merge histograms with identical edges")
        return Histogram(self.edges, self.counts + other.counts, self.total + other.total,
                         self.outside + other.outside, self.mode, dict(self.meta))

    def rows(self):
        """Tabular form: (left, right, count, density) or (x0, x1, y0, y1, count, density)."""
        dens = self.density
        if self.dims == 1:
            e = self.edges[0]
            return [(e[i], e[i + 1], int(self.counts[i]), float(dens[i])) for i in range(len(e) - 1)]
        ex, ey = self.edges
        return [
            (ex[i], ex[i + 1], ey[k], ey[k + 1], int(self.counts[i, k]), float(dens[i, k]))
            for i in range(len(ex) - 1)
            for k in range(len(ey) - 1)
        ]

    def header(self):
        if self.dims == 1:
            return ["left", "right", "count", "density"]
        return ["x_left", "x_right", "y_left", "y_right", "count", "density"]


def auto_edges(x, max_bins=MAX_AUTO_BINS):
    """Freedman-Diaconis bin edges with a cap on the number of bins."""
    x = np.asarray(x, dtype=float)
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return np.array([lo - 0.5, hi + 0.5])
    q75, q25 = np.percentile(x, [75, 25])
    width = 2.0 * (q75 - q25) * x.size ** (-1.0 / 3.0)
    if width <= 0:
        nbins = int(np.ceil(np.log2(x.size) + 1))  # Sturges when the IQR collapses
    else:
        nbins = int(np.ceil((hi - lo) / width))
    return np.linspace(lo, hi, min(max(nbins, 1), max_bins) + 1)


def _check_edges(e):
    e = np.asarray(e, dtype=float)
    if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0):
        raise InvalidParameterError("edges must be a strictly increasing sequence of at least 2 values")
    return e


def histogram_build(samples, edges="auto", mode="pdf"):
    """Histogram of 1-D values or (n, 2) pairs."""
    if mode not in ("pdf", "counts"):
        raise InvalidParameterError(f"mode must be 'pdf' or 'counts', got {mode!r}")
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise InvalidParameterError("cannot build a histogram from empty input")
    if x.ndim == 1 or (x.ndim == 2 and x.shape[1] == 1):
        x = x.reshape(-1)
        e = auto_edges(x) if isinstance(edges, str) else _check_edges(edges)
        counts, _ = np.histogram(x, bins=e)
        total = int(counts.sum())
        return Histogram((e,), counts, total, x.size - total, mode)
    if x.ndim != 2 or x.shape[1] != 2:
        raise InvalidParameterError(f"samples must be 1-D or (n, 2), got shape {x.shape}")
    if isinstance(edges, str):
        ex, ey = auto_edges(x[:, 0]), auto_edges(x[:, 1])
    else:
        ex, ey = (_check_edges(e) for e in edges)
    counts, _, _ = np.histogram2d(x[:, 0], x[:, 1], bins=[ex, ey])
    counts = counts.astype(np.int64)
    total = int(counts.sum())
    return Histogram((ex, ey), counts, total, x.shape[0] - total, mode)


def stream_histogram(params, m, edges, obs="eta", ordered=False, seed=0, n_threads=None, mode="pdf"):
    """Histogram of a pooled (unordered) or single-coordinate ensemble, block by block.

    With ``ordered=True`` the observable must yield one value per matrix
    (N = 1) or the caller pools beforehand; unordered pooling is the
    common case for plotting.
    """
    hist = None
    obs = Observable.coerce(obs)
    for block in iter_ensemble(params, m, obs, seed, n_threads):
        values = block if ordered else pool(block, obs)
        part = histogram_build(values, edges, mode)
        hist = part if hist is None else hist.merge(part)
    return hist
