"""Squeezing estimation: EM-Bayes from optimal-POVM outcomes, closed-form ML from homodyne."""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass

import numpy as np

from ._validation import DegenerateDataError, as_float_vector, check_finite
from .conjugate import EmOptions, GaussianParams, LinearGaussianModel, em_fit, gaussian_posterior
from .simulate import MeasurementBatch, Scheme, povm_variance

__all__ = [
    "Method",
    "SqueezingEstimate",
    "estimate_povm_em",
    "genie_povm_estimate",
    "homodyne_squeezing_loglik",
    "ml_homodyne_closed_form",
    "estimate_ml_homodyne",
]

_SQRT2 = math.sqrt(2.0)


class Method(str, enum.Enum):
    POVM_EM = "povm_em"
    HOMODYNE_ML = "homodyne_ml"


@dataclass
class SqueezingEstimate:
    r_hat: float
    method: Method
    fitted_prior: GaussianParams | None = None
    posterior: GaussianParams | None = None
    runtime_ns: int = 0
    converged: bool = True


def _require(batch: MeasurementBatch, scheme: Scheme):
    if batch.scheme is not scheme:
        raise ValueError(f"expected a {scheme.value} batch, got {batch.scheme.value}")


def estimate_povm_em(batch: MeasurementBatch, alpha_abs: float, opts: EmOptions | None = None) -> SqueezingEstimate:
    """Posterior-mean squeezing estimate with the Gaussian prior learned by EM.

    ``alpha_abs`` is the known probe displacement magnitude; it fixes the
    outcome variance ``1 / (4 |alpha|^2)``.
    """
    _require(batch, Scheme.POVM_SQUEEZING)
    var = povm_variance(alpha_abs)
    start = time.perf_counter_ns()
    fit = em_fit(LinearGaussianModel.constant(batch.count, 1.0, var), batch.samples_re, opts)
    elapsed = time.perf_counter_ns() - start
    return SqueezingEstimate(
        r_hat=fit.posterior.mean,
        method=Method.POVM_EM,
        fitted_prior=fit.prior_estimate,
        posterior=fit.posterior,
        runtime_ns=elapsed,
        converged=fit.converged,
    )


def genie_povm_estimate(batch: MeasurementBatch, alpha_abs: float, true_prior: GaussianParams) -> SqueezingEstimate:
    _require(batch, Scheme.POVM_SQUEEZING)
    var = povm_variance(alpha_abs)
    start = time.perf_counter_ns()
    post = gaussian_posterior(true_prior, LinearGaussianModel.constant(batch.count, 1.0, var), batch.samples_re)
    elapsed = time.perf_counter_ns() - start
    return SqueezingEstimate(post.mean, Method.POVM_EM, None, post, elapsed)


def homodyne_squeezing_loglik(q, alpha_re: float, r: float) -> float:
    """Log-likelihood of homodyne outcomes ``q`` at squeezing ``r`` for a coherent probe."""
    q = as_float_vector(q, "q")
    if q.size == 0:
        raise ValueError("q must be non-empty")
    alpha_re = check_finite(alpha_re, "alpha_re")
    r = check_finite(r, "r")
    m = q.size
    resid = q - _SQRT2 * alpha_re * math.exp(-r)
    return -0.5 * m * math.log(math.pi) + m * r - math.exp(2.0 * r) * float(resid @ resid)


def ml_homodyne_closed_form(m, q_sum, q_sq_sum, alpha_re):
    """Closed-form ML squeezing from ``M``, ``sum q`` and ``sum q^2`` (scalars or arrays).

    Solves ``2 q'' t^2 - 2 sqrt(2) alpha q' t - M = 0`` for its positive root ``t = e^r``.
    """
    m, q1, q2, a = (np.asarray(v, dtype=float) for v in (m, q_sum, q_sq_sum, alpha_re))
    with np.errstate(divide="ignore", invalid="ignore"):
        b = 2.0 * _SQRT2 * a * q1
        root = (b + np.sqrt(8.0 * a * a * q1 * q1 + 8.0 * m * q2)) / (4.0 * q2)
        r = np.log(root)
    if r.ndim == 0:
        return float(r)
    return r


def estimate_ml_homodyne(batch: MeasurementBatch, alpha_re: float) -> SqueezingEstimate:
    """Maximum-likelihood squeezing from homodyne outcomes of a probe with known real displacement."""
    _require(batch, Scheme.HOMODYNE_SQUEEZING)
    alpha_re = check_finite(alpha_re, "alpha_re")
    start = time.perf_counter_ns()
    q = batch.samples_re
    q2 = float(q @ q)
    if q2 <= 0.0:
        raise DegenerateDataError("all homodyne samples are zero; the ML squeezing is undefined")
    r_hat = ml_homodyne_closed_form(q.size, float(q.sum()), q2, alpha_re)
    elapsed = time.perf_counter_ns() - start
    return SqueezingEstimate(r_hat, Method.HOMODYNE_ML, runtime_ns=elapsed)
