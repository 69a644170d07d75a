"""scikit-learn compatible front end.

``CirculantEigenTransformer`` maps first columns to eigenvalue observables
inside a pipeline.  ``CirculantGaussianModel`` is a density estimator: it
fits per-entry means and variances to sampled first columns (for example
graph edge patterns, which yields the moment-matched Gaussian surrogate)
and scores eigenvalue vectors with the exact ordered joint density.

Input rows use the CSV layout ``a_1..a_N, b_1..b_N``.
"""

import numpy as np
from sklearn.base import BaseEstimator, DensityMixin, TransformerMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from .analytic import log_jpdf_ordered, mixture_marginal, mixture_marginal_cdf, spectral_law
from .exceptions import InsufficientDataError, InvalidParameterError
from .model import ModelParams, build_trig_tables, eta_from_columns
from .sampler import Observable, observe, sample_ensemble


def _split_columns(X, n=None):
    X = check_array(X, dtype=np.float64)
    if X.shape[1] % 2:
        raise InvalidParameterError(f"first-column rows need 2N features, got {X.shape[1]}")
    if n is not None and X.shape[1] != 2 * n:
        raise InvalidParameterError(f"expected {2 * n} features, got {X.shape[1]}")
    half = X.shape[1] // 2
    return X[:, :half], X[:, half:]


class CirculantEigenTransformer(TransformerMixin, BaseEstimator):
    """Closed-form eigenvalues of circulant matrices given by their first columns.

    Parameters
    ----------
    observable : {"eta", "r", "j", "w"}
        Interleaved eigenvalue parts, real parts, imaginary parts or
        squared moduli (one row per input row).
    """

    def __init__(self, observable="eta"):
        self.observable = observable

    def fit(self, X, y=None):
        a, _ = _split_columns(X)
        Observable.coerce(self.observable)
        self.n_features_in_ = 2 * a.shape[1]
        self.n_ = a.shape[1]
        self.tables_ = build_trig_tables(self.n_)
        return self

    def transform(self, X):
        check_is_fitted(self, "tables_")
        a, b = _split_columns(X, self.n_)
        return observe(eta_from_columns(a, b, self.tables_), self.observable)


class CirculantGaussianModel(DensityMixin, BaseEstimator):
    """Gaussian circulant model fitted by matching entry moments.

    Parameters
    ----------
    method : {"closed-form", "matrix-product"}
        How the eigenvalue mean and covariance are computed.
    ddof : int
        Delta degrees of freedom of the fitted entry variances.

    Attributes
    ----------
    params_ : ModelParams
    law_ : SpectralLaw
    """

    def __init__(self, method="closed-form", ddof=1):
        self.method = method
        self.ddof = ddof

    def fit(self, X, y=None):
        a, b = _split_columns(X)
        if a.shape[0] <= self.ddof:
            raise InsufficientDataError(f"need more than {self.ddof} rows to estimate variances")
        params = ModelParams(a.mean(0), b.mean(0), a.var(0, ddof=self.ddof), b.var(0, ddof=self.ddof))
        return self._set_params(params)

    @classmethod
    def from_params(cls, params, method="closed-form"):
        """An already-fitted model for known parameters."""
        return cls(method=method)._set_params(params)

    def _set_params(self, params):
        self.params_ = params
        self.law_ = spectral_law(params, self.method)
        self.n_features_in_ = 2 * params.n
        return self

    def score_samples(self, X):
        """Log of the ordered joint eigenvalue density for each eta row."""
        check_is_fitted(self, "law_")
        X = check_array(X, dtype=np.float64)
        return log_jpdf_ordered(self.law_, X)

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=None):
        """Eta rows of ``n_samples`` freshly drawn matrices."""
        check_is_fitted(self, "params_")
        if isinstance(random_state, (int, np.integer)):
            seed = int(random_state)
        else:
            seed = int(check_random_state(random_state).randint(np.iinfo(np.int32).max))
        return sample_ensemble(self.params_, n_samples, "eta", ordered=True, seed=seed)

    def marginal_pdf(self, x, part="re", exclude_forced_real=False):
        check_is_fitted(self, "law_")
        return mixture_marginal(self.law_, part, x, exclude_forced_real)

    def marginal_cdf(self, x, part="re", exclude_forced_real=False):
        check_is_fitted(self, "law_")
        return mixture_marginal_cdf(self.law_, part, x, exclude_forced_real)
