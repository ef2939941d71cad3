"""Displacement estimation from heterodyne and homodyne outcomes."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .conjugate import (
    EmOptions,
    GaussianParams,
    LinearGaussianModel,
    em_fit,
    gaussian_posterior,
)
from .simulate import MeasurementBatch, Scheme, heterodyne_variances, homodyne_variance

__all__ = [
    "DisplacementEstimate",
    "estimate_heterodyne",
    "estimate_homodyne",
    "genie_estimate",
    "quadrature_models",
]

SQRT2 = math.sqrt(2.0)


@dataclass
class DisplacementEstimate:
    alpha_re_hat: float
    fitted_prior_re: GaussianParams | None
    posterior_re: GaussianParams
    alpha_im_hat: float | None = None
    fitted_prior_im: GaussianParams | None = None
    posterior_im: GaussianParams | None = None
    converged: bool = True
    iterations: int = 0


def quadrature_models(scheme: Scheme, r: float) -> list[tuple[float, float]]:
    """``(gain, noise_variance)`` per estimated quadrature for a displacement scheme."""
    scheme = Scheme(scheme)
    if scheme is Scheme.HETERODYNE_DISPLACEMENT:
        var_re, var_im = heterodyne_variances(r)
        return [(1.0, var_re), (1.0, var_im)]
    if scheme is Scheme.HOMODYNE_DISPLACEMENT:
        return [(SQRT2, homodyne_variance(r))]
    raise ValueError(f"{scheme.value} is not a displacement scheme")


def _require(batch: MeasurementBatch, scheme: Scheme):
    if batch.scheme is not scheme:
        raise ValueError(f"expected a {scheme.value} batch, got {batch.scheme.value}")


def estimate_heterodyne(batch: MeasurementBatch, r: float, opts: EmOptions | None = None) -> DisplacementEstimate:
    """Learn the prior of each quadrature by EM, then return posterior means.

    ``r`` is the known squeezing of the probe. The real and imaginary parts
    are fitted independently, using EM start streams 0 and 1 of
    ``opts.init_seed``.
    """
    _require(batch, Scheme.HETERODYNE_DISPLACEMENT)
    (g_re, var_re), (g_im, var_im) = quadrature_models(batch.scheme, r)
    m = batch.count
    fit_re = em_fit(LinearGaussianModel.constant(m, g_re, var_re), batch.samples_re, opts, stream_id=0)
    fit_im = em_fit(LinearGaussianModel.constant(m, g_im, var_im), batch.samples_im, opts, stream_id=1)
    return DisplacementEstimate(
        alpha_re_hat=fit_re.posterior.mean,
        fitted_prior_re=fit_re.prior_estimate,
        posterior_re=fit_re.posterior,
        alpha_im_hat=fit_im.posterior.mean,
        fitted_prior_im=fit_im.prior_estimate,
        posterior_im=fit_im.posterior,
        converged=fit_re.converged and fit_im.converged,
        iterations=max(fit_re.iterations, fit_im.iterations),
    )


def estimate_homodyne(batch: MeasurementBatch, r: float, opts: EmOptions | None = None) -> DisplacementEstimate:
    """EM prior fit and posterior mean of the real displacement from q-quadrature outcomes.

    For the imaginary part, measure with a pi/2-shifted local oscillator and
    pass that batch here as well; the result is then the imaginary part.
    """
    _require(batch, Scheme.HOMODYNE_DISPLACEMENT)
    ((g, var),) = quadrature_models(batch.scheme, r)
    fit = em_fit(LinearGaussianModel.constant(batch.count, g, var), batch.samples_re, opts)
    return DisplacementEstimate(
        alpha_re_hat=fit.posterior.mean,
        fitted_prior_re=fit.prior_estimate,
        posterior_re=fit.posterior,
        converged=fit.converged,
        iterations=fit.iterations,
    )


def genie_estimate(
    batch: MeasurementBatch,
    r: float,
    true_prior_re: GaussianParams,
    true_prior_im: GaussianParams | None = None,
) -> DisplacementEstimate:
    """Posterior mean under the true prior (no fitting)."""
    models = quadrature_models(batch.scheme, r)
    m = batch.count
    if true_prior_re is None:
        raise ValueError("true_prior_re is required")
    g, var = models[0]
    post_re = gaussian_posterior(true_prior_re, LinearGaussianModel.constant(m, g, var), batch.samples_re)
    est = DisplacementEstimate(alpha_re_hat=post_re.mean, fitted_prior_re=None, posterior_re=post_re)
    if batch.scheme is Scheme.HETERODYNE_DISPLACEMENT:
        if true_prior_im is None:
            raise ValueError("heterodyne batches need true_prior_im for the imaginary quadrature")
        g, var = models[1]
        post_im = gaussian_posterior(true_prior_im, LinearGaussianModel.constant(m, g, var), batch.samples_im)
        est.alpha_im_hat = post_im.mean
        est.posterior_im = post_im
    return est
