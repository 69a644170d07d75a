"""Exact spectral statistics and Monte Carlo for random circulant matrices H = A + iB."""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    SpectralLaw,
    TwoByTwoLaw,
    jpdf_ordered,
    jpdf_unordered,
    marginal_joint,
    mixture_marginal,
    spectral_law,
    ttilde_eigs,
    wishart_cdf,
    wishart_density,
    wishart_laplace,
)
from .estimators import CirculantEigenTransformer, CirculantGaussianModel  # noqa: E402
from .graphs import GraphKind, GraphSpec, graph_spectrum, sample_circulant_graph, surrogate_params  # noqa: E402
from .model import (  # noqa: E402
    EtaSample,
    FirstColumn,
    ModelParams,
    build_dense,
    build_transform_q,
    build_trig_tables,
    eigenvalues_closed_form,
    sample_entries,
)
from .sampler import Histogram, Observable, empirical_moments, histogram_build, sample_ensemble  # noqa: E402

__all__ = [
    "CirculantEigenTransformer",
    "CirculantGaussianModel",
    "EtaSample",
    "FirstColumn",
    "GraphKind",
    "GraphSpec",
    "Histogram",
    "ModelParams",
    "Observable",
    "SpectralLaw",
    "TwoByTwoLaw",
    "build_dense",
    "build_transform_q",
    "build_trig_tables",
    "eigenvalues_closed_form",
    "empirical_moments",
    "graph_spectrum",
    "histogram_build",
    "jpdf_ordered",
    "jpdf_unordered",
    "marginal_joint",
    "mixture_marginal",
    "sample_circulant_graph",
    "sample_ensemble",
    "sample_entries",
    "spectral_law",
    "surrogate_params",
    "ttilde_eigs",
    "wishart_cdf",
    "wishart_density",
    "wishart_laplace",
    "__version__",
]
