"""Random circulant graphs and their Gaussian surrogate models.

A circulant graph is fixed by the edge pattern of one node, stored as a
:class:`~circspec.model.FirstColumn`.  Entry 0 is the (absent) self-loop.
Double-edged directed graphs use the complex convention: an edge of the
first kind contributes 1, of the second kind ``i``, both ``1 + i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._rng import as_generator, map_blocks
from .exceptions import InvalidParameterError
from .model import FirstColumn, ModelParams, build_trig_tables, eta_from_columns

__all__ = [
    "GraphKind",
    "GraphSpec",
    "DEFAULT_EPSILON",
    "sample_graph_block",
    "sample_circulant_graph",
    "surrogate_params",
    "graph_spectrum",
    "graph_columns",
]

DEFAULT_EPSILON = 1e-3


class GraphKind(str, Enum):
    DIRECTED = "directed"
    UNDIRECTED = "undirected"
    DOUBLE = "double"

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("_", "").replace("-", "")
        aliases = {"doubledirected": "double", "doubleedged": "double"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise InvalidParameterError(f"unknown graph kind {value!r}") from None


@dataclass(frozen=True)
class GraphSpec:
    """Graph family and edge probabilities.

    ``tau_scenario`` only affects :func:`surrogate_params`: ``"zero"`` keeps
    exactly-zero imaginary variances, ``"eps"`` replaces each of them by
    ``epsilon**2`` so that every surrogate density is smooth.
    """

    n: int
    kind: GraphKind
    p1: float
    p2: float | None = None
    tau_scenario: str = "zero"
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "kind", GraphKind.coerce(self.kind))
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError(f"node count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        for name in ("p1", "p2"):
            p = getattr(self, name)
            if p is not None and not 0.0 <= float(p) <= 1.0:
                raise InvalidParameterError(f"{name}={p!r} is not a probability")
        if (self.p2 is not None) != (self.kind is GraphKind.DOUBLE):
            raise InvalidParameterError("p2 must be given for double-edged graphs and only for them")
        scenario = {"zero": "zero", "exact-zero": "zero", "eps": "eps", "epsilon": "eps"}.get(self.tau_scenario)
        if scenario is None:
            raise InvalidParameterError(f"unknown tau scenario {self.tau_scenario!r}")
        object.__setattr__(self, "tau_scenario", scenario)
        if not self.epsilon > 0:
            raise InvalidParameterError("epsilon must be positive")

    def to_dict(self):
        return {
            "n": self.n,
            "kind": self.kind.value,
            "p1": self.p1,
            "p2": self.p2,
            "tau_scenario": self.tau_scenario,
            "epsilon": self.epsilon,
        }


def sample_graph_block(spec: GraphSpec, rng, size):
    """Edge patterns of ``size`` independent graphs as arrays ``a``, ``b`` of shape (size, N)."""
    rng = as_generator(rng)
    n = spec.n
    a = np.zeros((size, n))
    b = np.zeros((size, n))
    if spec.kind is GraphKind.UNDIRECTED:
        half = n // 2
        draws = (rng.random((size, half)) < spec.p1).astype(float)
        a[:, 1:half + 1] = draws
        # offset d and N - d describe the same undirected edge
        a[:, n - np.arange(1, half + 1)] = draws
    else:
        a[:, 1:] = rng.random((size, n - 1)) < spec.p1
        if spec.kind is GraphKind.DOUBLE:
            b[:, 1:] = rng.random((size, n - 1)) < spec.p2
    return a, b


def sample_circulant_graph(spec: GraphSpec, rng=None) -> FirstColumn:
    a, b = sample_graph_block(spec, rng, 1)
    return FirstColumn(a[0], b[0])


def surrogate_params(spec: GraphSpec) -> ModelParams:
    """Gaussian model whose entries match the Bernoulli edge moments.

    Undirected graphs get twice the Bernoulli variance: the surrogate's
    symmetric part ``(A + A^T)/2`` then has the graph's entry variance.  The
    self-mirrored middle entry of even-N undirected graphs is mapped the
    same way even though it is drawn only once.
    """
    n, p = spec.n, spec.p1
    u = np.full(n, p)
    s2 = np.full(n, p * (1 - p))
    if spec.kind is GraphKind.UNDIRECTED:
        s2 *= 2.0
    v = np.zeros(n)
    t2 = np.zeros(n)
    if spec.kind is GraphKind.DOUBLE:
        v[:] = spec.p2
        t2[:] = spec.p2 * (1 - spec.p2)
    u[0] = s2[0] = v[0] = t2[0] = 0.0
    if spec.tau_scenario == "eps":
        t2[t2 == 0] = spec.epsilon ** 2
    return ModelParams(u, v, s2, t2)


def graph_spectrum(spec: GraphSpec, m, seed=0, ordered=False, n_threads=None):
    """Eigenvalues of ``m`` sampled graphs.

    Returns pooled (M*N, 2) ``(re, im)`` pairs, or with ``ordered=True`` the
    (M, 2N) eta rows indexed by root of unity.
    """
    if int(m) < 1:
        raise InvalidParameterError("ensemble size M must be >= 1")
    tables = build_trig_tables(spec.n)

    def draw(rng, size):
        a, b = sample_graph_block(spec, rng, size)
        return eta_from_columns(a, b, tables)

    rows = np.concatenate(list(map_blocks(draw, seed, m, n_threads)), axis=0)
    return rows if ordered else rows.reshape(-1, 2)


def graph_columns(spec: GraphSpec, m, seed=0, n_threads=None):
    """Edge patterns of the same graphs :func:`graph_spectrum` uses for ``seed``, shape (M, 2N)."""
    blocks = map_blocks(lambda rng, size: np.hstack(sample_graph_block(spec, rng, size)), seed, m, n_threads)
    return np.concatenate(list(blocks), axis=0)
