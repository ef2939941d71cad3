"""scikit-learn style wrappers around the single-batch estimators.

Each estimator treats one batch of measurement outcomes as its training
data: ``fit(X)`` learns the prior (or the ML parameter) from the rows of
``X`` and stores the point estimate in a trailing-underscore attribute.
Hyperparameters are constructor arguments, so ``get_params``/``set_params``
and ``sklearn.base.clone`` work as usual.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .conjugate import EmOptions, LinearGaussianModel, marginal_log_likelihood
from .displacement import estimate_heterodyne, estimate_homodyne, quadrature_models
from .phase import EbOptions, estimate_phase
from .simulate import MeasurementBatch, Scheme, povm_variance
from .squeezing import estimate_ml_homodyne, estimate_povm_em, homodyne_squeezing_loglik

__all__ = [
    "HeterodyneDisplacementEstimator",
    "HomodyneDisplacementEstimator",
    "PovmSqueezingEstimator",
    "HomodyneSqueezingEstimator",
    "HeterodynePhaseEstimator",
]


def _real_samples(X) -> np.ndarray:
    X = check_array(X, ensure_2d=False)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected one column of real samples, got {X.shape[1]}")
        X = X[:, 0]
    return X


def _complex_samples(X) -> tuple[np.ndarray, np.ndarray]:
    """Accept a complex 1-D array or an ``(M, 2)`` array of ``(re, im)`` rows."""
    arr = np.asarray(X)
    if np.iscomplexobj(arr):
        arr = np.column_stack([arr.real.ravel(), arr.imag.ravel()])
    arr = check_array(arr)
    if arr.shape[1] != 2:
        raise ValueError(f"expected two columns (re, im), got {arr.shape[1]}")
    return arr[:, 0], arr[:, 1]


class _EmParams:
    def _em_options(self) -> EmOptions:
        return EmOptions(
            epsilon_q=self.epsilon_q,
            epsilon_param=self.epsilon_param,
            max_iter=self.max_iter,
            variance_floor=self.variance_floor,
            init_seed=self.random_state,
        )


class HeterodyneDisplacementEstimator(_EmParams, BaseEstimator):
    """Complex displacement from heterodyne outcomes with EM-learned Gaussian priors.

    Parameters
    ----------
    squeeze_r : float
        Known squeezing of the probe.
    epsilon_q, epsilon_param, max_iter, variance_floor
        EM stopping rules, see :class:`gaussest.conjugate.EmOptions`.
    random_state : int
        Seed of the EM starting point.
    """

    def __init__(self, squeeze_r=0.0, epsilon_q=1e-3, epsilon_param=1e-9, max_iter=10_000,
                 variance_floor=1e-12, random_state=0):
        self.squeeze_r = squeeze_r
        self.epsilon_q = epsilon_q
        self.epsilon_param = epsilon_param
        self.max_iter = max_iter
        self.variance_floor = variance_floor
        self.random_state = random_state

    def fit(self, X, y=None):
        re, im = _complex_samples(X)
        est = estimate_heterodyne(
            MeasurementBatch(Scheme.HETERODYNE_DISPLACEMENT, re, im), self.squeeze_r, self._em_options()
        )
        self.prior_re_, self.prior_im_ = est.fitted_prior_re, est.fitted_prior_im
        self.posterior_re_, self.posterior_im_ = est.posterior_re, est.posterior_im
        self.alpha_hat_ = complex(est.alpha_re_hat, est.alpha_im_hat)
        self.n_iter_ = est.iterations
        self.converged_ = est.converged
        return self

    def score(self, X, y=None):
        """Marginal log-likelihood of ``X`` under the fitted priors."""
        check_is_fitted(self, "alpha_hat_")
        re, im = _complex_samples(X)
        (g_re, v_re), (g_im, v_im) = quadrature_models(Scheme.HETERODYNE_DISPLACEMENT, self.squeeze_r)
        m = re.size
        return marginal_log_likelihood(
            self.prior_re_, LinearGaussianModel.constant(m, g_re, v_re), re
        ) + marginal_log_likelihood(self.prior_im_, LinearGaussianModel.constant(m, g_im, v_im), im)


class HomodyneDisplacementEstimator(_EmParams, BaseEstimator):
    """Real displacement from q-quadrature homodyne outcomes with an EM-learned prior."""

    def __init__(self, squeeze_r=0.0, epsilon_q=1e-3, epsilon_param=1e-9, max_iter=10_000,
                 variance_floor=1e-12, random_state=0):
        self.squeeze_r = squeeze_r
        self.epsilon_q = epsilon_q
        self.epsilon_param = epsilon_param
        self.max_iter = max_iter
        self.variance_floor = variance_floor
        self.random_state = random_state

    def fit(self, X, y=None):
        q = _real_samples(X)
        est = estimate_homodyne(MeasurementBatch(Scheme.HOMODYNE_DISPLACEMENT, q), self.squeeze_r, self._em_options())
        self.prior_, self.posterior_ = est.fitted_prior_re, est.posterior_re
        self.alpha_re_hat_ = est.alpha_re_hat
        self.n_iter_ = est.iterations
        self.converged_ = est.converged
        return self

    def score(self, X, y=None):
        check_is_fitted(self, "alpha_re_hat_")
        q = _real_samples(X)
        ((g, var),) = quadrature_models(Scheme.HOMODYNE_DISPLACEMENT, self.squeeze_r)
        return marginal_log_likelihood(self.prior_, LinearGaussianModel.constant(q.size, g, var), q)


class PovmSqueezingEstimator(_EmParams, BaseEstimator):
    """Squeezing from optimal-POVM outcomes, posterior mean under an EM-learned prior."""

    def __init__(self, alpha_abs=1.0, epsilon_q=1e-3, epsilon_param=1e-9, max_iter=10_000,
                 variance_floor=1e-12, random_state=0):
        self.alpha_abs = alpha_abs
        self.epsilon_q = epsilon_q
        self.epsilon_param = epsilon_param
        self.max_iter = max_iter
        self.variance_floor = variance_floor
        self.random_state = random_state

    def fit(self, X, y=None):
        xi = _real_samples(X)
        est = estimate_povm_em(MeasurementBatch(Scheme.POVM_SQUEEZING, xi), self.alpha_abs, self._em_options())
        self.prior_, self.posterior_ = est.fitted_prior, est.posterior
        self.r_hat_ = est.r_hat
        self.converged_ = est.converged
        return self

    def score(self, X, y=None):
        check_is_fitted(self, "r_hat_")
        xi = _real_samples(X)
        model = LinearGaussianModel.constant(xi.size, 1.0, povm_variance(self.alpha_abs))
        return marginal_log_likelihood(self.prior_, model, xi)


class HomodyneSqueezingEstimator(BaseEstimator):
    """Closed-form maximum-likelihood squeezing from homodyne outcomes."""

    def __init__(self, alpha_re=1.0):
        self.alpha_re = alpha_re

    def fit(self, X, y=None):
        q = _real_samples(X)
        self.r_hat_ = estimate_ml_homodyne(MeasurementBatch(Scheme.HOMODYNE_SQUEEZING, q), self.alpha_re).r_hat
        return self

    def score(self, X, y=None):
        """Log-likelihood of ``X`` at the fitted squeezing."""
        check_is_fitted(self, "r_hat_")
        return homodyne_squeezing_loglik(_real_samples(X), self.alpha_re, self.r_hat_)


class HeterodynePhaseEstimator(BaseEstimator):
    """Phase from heterodyne outcomes with a von Mises prior fitted by empirical Bayes."""

    def __init__(self, alpha_abs=1.0, kappa_max=1e3, tol=1e-6, max_eval=200):
        self.alpha_abs = alpha_abs
        self.kappa_max = kappa_max
        self.tol = tol
        self.max_eval = max_eval

    def fit(self, X, y=None):
        re, im = _complex_samples(X)
        est = estimate_phase(
            MeasurementBatch(Scheme.HETERODYNE_PHASE, re, im),
            self.alpha_abs,
            EbOptions(self.kappa_max, self.tol, self.max_eval),
        )
        self.theta_hat_ = est.theta_hat
        self.kappa0_ = est.fitted_kappa0
        self.kappa_p_ = est.kappa_p
        self.objective_ = est.objective_value
        return self
