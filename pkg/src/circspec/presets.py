"""Named example configurations used by the CLI and the acceptance runs.

Spreads are written as standard deviations and squared on construction.
"""

from fractions import Fraction as F

import numpy as np

from .exceptions import InvalidParameterError
from .graphs import GraphSpec
from .model import ModelParams

__all__ = ["PRESETS", "get_preset", "FIG1_PARAMS", "FIG5_PARAMS", "FIG14_PARAMS", "FIG15_PARAMS"]


def _f(*xs):
    return [float(F(x)) for x in xs]


FIG1_PARAMS = ModelParams.from_std(
    u=_f(2, 9, -7, "-19/2", "-5/3"),
    v=_f(4, 8, "-15/2", 3, "20/3"),
    sigma=_f(1, 2, "1/2", "2/7", "4/5"),
    tau=_f("6/5", "2/3", "3/4", "4/7", "3/5"),
)

FIG5_PARAMS = ModelParams.from_std(
    u=np.zeros(3),
    v=np.zeros(3),
    sigma=_f(1, "7/2", "3/4"),
    tau=_f("4/3", "2/3", "9/2"),
)

FIG14_PARAMS = ModelParams.from_std(
    u=_f(2, 6, -7, -5),
    v=_f(-3, 2, 1, 3),
    sigma=_f(5, 2, "1/2", "4/3"),
    tau=_f("7/4", "3/2", "1/4", "5/6"),
)

FIG15_PARAMS = ModelParams.from_std(
    u=FIG14_PARAMS.u,
    v=np.full(4, 0.1),
    sigma=np.sqrt(FIG14_PARAMS.sigma2),
    tau=np.full(4, 0.1),
)

# model presets carry ``params``; graph presets carry ``graph``
PRESETS = {
    "fig1": {"params": FIG1_PARAMS, "m": 100_000, "observable": "eta", "ordered": True},
    "fig4": {"params": FIG1_PARAMS, "m": 100_000, "observable": "eta", "ordered": False},
    "fig5": {"params": FIG5_PARAMS, "m": 20_000, "observable": "w", "ordered": False},
    "fig7": {"graph": GraphSpec(100, "directed", 0.1), "m": 2000},
    "fig10a": {"graph": GraphSpec(50, "undirected", 1 / 3), "m": 5000},
    "fig10b": {"graph": GraphSpec(101, "undirected", 0.2), "m": 2000},
    "fig12": {"graph": GraphSpec(100, "double", 0.5, 0.1), "m": 3000},
    "fig13": {"graph": GraphSpec(100, "double", 0.5, 0.5), "m": 3000},
    "fig14": {"params": FIG14_PARAMS, "m": 20_000, "observable": "eta", "ordered": False},
    "fig15": {"params": FIG15_PARAMS, "m": 20_000, "observable": "eta", "ordered": False},
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise InvalidParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
