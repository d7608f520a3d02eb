"""scikit-learn style wrapper around :func:`regimekit.estimate.fit`."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from regimekit.estimate import fit as _fit
from regimekit.filtering import classify, loglikelihood, smooth
from regimekit.model import FTP, TVTP, ModelSpec
from regimekit.timeseries import Dataset, Period

_ORIGIN = Period(2000, 1)


class MarkovSwitchingRegression(BaseEstimator):
    """Two-regime Markov-switching Gaussian regression.

    ``fit(X, y, z=None)`` estimates the model by multi-start maximum
    likelihood. ``X`` holds the (already lagged) regressors, ``y`` the
    dependent variable and ``z`` the transition covariate; passing ``z``
    requires ``transition="tvtp"``. Because regimes are inferred from the
    observed outcomes, ``predict``, ``predict_proba`` and ``score`` also take
    ``y``.

    Parameters
    ----------
    transition : {"ftp", "tvtp"}
    restarts : int
        Starting points for the optimizer.
    seed : int
    tol : float
        L-BFGS-B relative function tolerance.
    max_iter : int
    init : {"ergodic", "uniform"}
        Distribution of the first regime.
    n_jobs : int
        Worker processes for the restarts.

    Attributes
    ----------
    result_ : FitResult
    params_ : ndarray
        Flat parameter vector; regime 1 is the higher-intercept (surge) regime.
    bse_ : ndarray
    loglik_, aic_ : float
    smoothed_probabilities_ : ndarray of shape (n_samples, 2)
    """

    def __init__(self, transition=FTP, restarts=20, seed=0, tol=1e-10, max_iter=1000,
                 init="ergodic", n_jobs=1):
        self.transition = transition
        self.restarts = restarts
        self.seed = seed
        self.tol = tol
        self.max_iter = max_iter
        self.init = init
        self.n_jobs = n_jobs

    def _dataset(self, X, y, z, names, reset):
        if X is None:
            y = check_array(np.asarray(y, dtype=float).reshape(-1, 1), ensure_all_finite=True).ravel()
            X = np.empty((y.size, 0))
        else:
            X, y = check_X_y(X, y, ensure_min_features=0, y_numeric=True)
        if reset:
            self.n_features_in_ = X.shape[1]
        elif X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        mode = str(self.transition).lower()
        if mode == TVTP:
            if z is None:
                raise ValueError("transition='tvtp' requires z")
            z = check_array(np.asarray(z, dtype=float).reshape(-1, 1)).ravel()
            if z.size != y.size:
                raise ValueError("z and y differ in length")
        elif z is not None:
            raise ValueError("z given but transition='ftp'")
        regs = [(nm, 0, X[:, j]) for j, nm in enumerate(names)]
        cov = None if z is None else ("z", 0, z)
        periods = [_ORIGIN + i for i in range(y.size)]
        spec = ModelSpec([(nm, 0) for nm in names], mode, None if z is None else ("z", 0))
        return Dataset(y, regs, cov, periods, "y"), spec

    def _names(self, X):
        cols = getattr(X, "columns", None)
        if cols is not None:
            return [str(c) for c in cols]
        k = 0 if X is None else np.shape(X)[1]
        return [f"x{j}" for j in range(k)]

    def fit(self, X, y, z=None):
        names = self._names(X)
        ds, spec = self._dataset(X, y, z, names, reset=True)
        self.feature_names_ = names
        self.result_ = _fit(ds, spec, restarts=self.restarts, seed=self.seed, tol=self.tol,
                            max_iter=self.max_iter, jobs=self.n_jobs, init=self.init)
        self.spec_ = spec
        self.params_ = self.result_.theta
        self.bse_ = self.result_.std_errors
        self.loglik_ = self.result_.loglik
        self.aic_ = self.result_.aic
        self.smoothed_probabilities_ = self.result_.smoothed.smoothed
        self.filtered_probabilities_ = self.result_.filter.filtered
        return self

    def _run(self, X, y, z):
        check_is_fitted(self, "result_")
        ds, spec = self._dataset(X, y, z, self.feature_names_, reset=False)
        fo = loglikelihood(ds, spec, self.params_, init=self.init)
        return ds, fo, smooth(fo, ds, spec, self.params_)

    def predict_proba(self, X, y, z=None):
        """Smoothed regime probabilities under the fitted parameters, shape (n, 2)."""
        return self._run(X, y, z)[2].smoothed

    def predict(self, X, y, z=None):
        """Regime labels: 1 (surge) where the smoothed surge probability exceeds 0.5, else 2."""
        ds, _, sm = self._run(X, y, z)
        return np.array(classify(sm, ds.periods).regimes)

    def score(self, X, y, z=None):
        """Average log-likelihood per observation."""
        ds, fo, _ = self._run(X, y, z)
        return fo.loglik / ds.n_obs
