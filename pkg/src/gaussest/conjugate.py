"""Gaussian prior / linear-Gaussian likelihood machinery and its EM prior fit.

The model is ``u ~ N(mu0, s0)`` and ``y | u ~ N(u g, sn2 I)``. Everything the
EM loop needs reduces to four sufficient statistics of ``(g, y)``:
``M``, ``g.g``, ``g.y`` and the residual sum of squares about the
least-squares fit, so each iteration costs O(1) regardless of ``M``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_float_vector, check_count, check_finite, check_positive
from .simulate import RngStream

__all__ = [
    "GaussianParams",
    "LinearGaussianModel",
    "EmOptions",
    "EmResult",
    "gaussian_posterior",
    "marginal_log_likelihood",
    "q_function",
    "em_fit",
    "em_fit_many",
    "draw_em_init",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GaussianParams:
    mean: float
    variance: float

    def __post_init__(self):
        object.__setattr__(self, "mean", check_finite(self.mean, "mean"))
        object.__setattr__(self, "variance", check_positive(self.variance, "variance"))


@dataclass(frozen=True)
class LinearGaussianModel:
    """Observation model ``y = u g + noise`` with i.i.d. noise of variance ``noise_variance``."""

    gain: np.ndarray
    noise_variance: float

    def __post_init__(self):
        g = as_float_vector(self.gain, "gain")
        if g.size == 0:
            raise ValueError("gain must be non-empty")
        if not np.any(g != 0):
            raise ValueError("gain must not be all zero")
        g.setflags(write=False)
        object.__setattr__(self, "gain", g)
        object.__setattr__(
            self, "noise_variance", check_positive(self.noise_variance, "noise_variance")
        )

    @classmethod
    def constant(cls, m: int, gain: float, noise_variance: float) -> "LinearGaussianModel":
        """Model with ``g = gain * 1_M``."""
        return cls(np.full(check_count(m), float(gain)), noise_variance)

    @property
    def gain_norm_sq(self) -> float:
        return float(self.gain @ self.gain)


@dataclass(frozen=True)
class EmOptions:
    epsilon_q: float = 1e-3
    epsilon_param: float = 1e-9
    max_iter: int = 10_000
    variance_floor: float = 1e-12
    init_seed: int = 0

    def __post_init__(self):
        for name in ("epsilon_q", "epsilon_param", "variance_floor"):
            check_positive(getattr(self, name), name)
        check_count(self.max_iter, "max_iter")


@dataclass
class EmResult:
    prior_estimate: GaussianParams
    posterior: GaussianParams
    iterations: int
    q_trace: list = field(default_factory=list)
    converged: bool = False
    mean_trace: list = field(default_factory=list)
    variance_trace: list = field(default_factory=list)


@dataclass(frozen=True)
class _Stats:
    m: int
    gg: float
    gy: float
    rss0: float

    @property
    def ls(self) -> float:
        return self.gy / self.gg


def _stats(model: LinearGaussianModel, y) -> _Stats:
    y = as_float_vector(y)
    g = model.gain
    if y.size != g.size:
        raise ValueError(f"y has length {y.size} but the gain vector has length {g.size}")
    gg = float(g @ g)
    gy = float(g @ y)
    resid = y - g * (gy / gg)
    return _Stats(int(y.size), gg, gy, float(resid @ resid))


def _posterior(mu0, s0, gg, gy, sn2):
    precision = 1.0 / s0 + gg / sn2
    var = 1.0 / precision
    return var * (gy / sn2 + mu0 / s0), var


def gaussian_posterior(prior: GaussianParams, model: LinearGaussianModel, y) -> GaussianParams:
    """Posterior of ``u`` given ``y`` under a Gaussian prior."""
    st = _stats(model, y)
    mean, var = _posterior(prior.mean, prior.variance, st.gg, st.gy, model.noise_variance)
    return GaussianParams(mean, var)


def _marginal_ll(st: _Stats, mu0, s0, sn2):
    shrink = sn2 + s0 * st.gg
    quad = st.rss0 / sn2 + st.gg * (st.ls - mu0) ** 2 / shrink
    return -0.5 * (st.m * (_LOG_2PI + math.log(sn2)) + math.log1p(s0 * st.gg / sn2) + quad)


def marginal_log_likelihood(prior: GaussianParams, model: LinearGaussianModel, y) -> float:
    """``log N(y; mu0 g, sn2 I + s0 g g^T)`` via the rank-one determinant/inverse identities."""
    st = _stats(model, y)
    return _marginal_ll(st, prior.mean, prior.variance, model.noise_variance)


def _q(st: _Stats, mu0, s0, post_mean, post_var, sn2, log=math.log):
    fit = (st.rss0 + st.gg * (post_mean - st.ls) ** 2 + st.gg * post_var) / sn2
    prior = ((mu0 - post_mean) ** 2 + post_var) / s0
    return -0.5 * (st.m * (_LOG_2PI + log(sn2)) + fit + _LOG_2PI + log(s0) + prior)


def q_function(
    candidate: GaussianParams,
    current_posterior: GaussianParams,
    model: LinearGaussianModel,
    y,
) -> float:
    """Expected complete-data log-likelihood ``E_{u ~ posterior}[log p(y, u | candidate)]``."""
    st = _stats(model, y)
    return _q(
        st,
        candidate.mean,
        candidate.variance,
        current_posterior.mean,
        current_posterior.variance,
        model.noise_variance,
    )


def draw_em_init(stream: RngStream, variance_floor: float = 1e-12) -> tuple[float, float]:
    """Random EM start: ``s0 ~ U[0, 1]`` then ``mu0 ~ N(0, 1)`` from ``stream``."""
    gen = stream.generator()
    s0 = float(gen.uniform(0.0, 1.0))
    mu0 = float(gen.standard_normal())
    return mu0, max(s0, variance_floor)


def _em_loop(st: _Stats, sn2: float, mu: float, s: float, opts: EmOptions):
    q_trace, mean_trace, var_trace = [], [mu], [s]
    gg, gy, floor = st.gg, st.gy, opts.variance_floor
    q_prev = None
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        s_new = sn2 * s / (sn2 + gg * s)
        mu_new = s_new * (gy / sn2 + mu / s)
        q = _q(st, mu, s, mu_new, s_new, sn2)
        q_trace.append(q)
        d_mu = abs(mu_new - mu)
        d_s = abs(s - s_new)
        mu, s = mu_new, max(s_new, floor)
        mean_trace.append(mu)
        var_trace.append(s)
        if q_prev is not None and abs(q - q_prev) < opts.epsilon_q:
            converged = True
            break
        if d_mu < opts.epsilon_param and d_s < opts.epsilon_param:
            converged = True
            break
        q_prev = q
    return mu, s, it, converged, q_trace, mean_trace, var_trace


def em_fit(
    model: LinearGaussianModel,
    y,
    opts: EmOptions | None = None,
    stream_id: int = 0,
    init: tuple[float, float] | None = None,
) -> EmResult:
    """Fit the prior ``(mu0, s0)`` by EM and return it with the resulting posterior.

    The loop stops when consecutive values of ``Q(theta_t, theta_t)`` differ
    by less than ``opts.epsilon_q``, when both parameter steps fall below
    ``opts.epsilon_param``, or after ``opts.max_iter`` iterations (reported
    as ``converged=False``). The starting point is drawn from
    ``RngStream(opts.init_seed, stream_id)`` unless ``init=(mu0, s0)`` is given.
    """
    opts = opts or EmOptions()
    st = _stats(model, y)
    if init is None:
        mu, s = draw_em_init(RngStream(opts.init_seed, stream_id), opts.variance_floor)
    else:
        mu, s = check_finite(init[0], "init mean"), max(check_positive(init[1], "init variance"), opts.variance_floor)
    mu, s, it, conv, q_trace, mean_trace, var_trace = _em_loop(
        st, model.noise_variance, mu, s, opts
    )
    prior = GaussianParams(mu, s)
    post_mean, post_var = _posterior(mu, s, st.gg, st.gy, model.noise_variance)
    return EmResult(
        prior_estimate=prior,
        posterior=GaussianParams(post_mean, post_var),
        iterations=it,
        q_trace=q_trace,
        converged=conv,
        mean_trace=mean_trace,
        variance_trace=var_trace,
    )


@dataclass
class EmBatchResult:
    """Array-valued outcome of :func:`em_fit_many`; one entry per instance."""

    prior_mean: np.ndarray
    prior_variance: np.ndarray
    posterior_mean: np.ndarray
    posterior_variance: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray


def em_fit_many(m, gg, gy, rss0, noise_variance, init_mean, init_variance, opts=None) -> EmBatchResult:
    """Run the EM loop of :func:`em_fit` on many independent instances at once.

    All arguments are broadcast to a common 1-D shape. Instance ``i`` follows
    exactly the iteration of :func:`em_fit` started at
    ``(init_mean[i], init_variance[i])``; finished instances are frozen while
    the rest keep iterating.
    """
    opts = opts or EmOptions()
    m, gg, gy, rss0, sn2, mu, s = (
        np.array(a, dtype=float)
        for a in np.broadcast_arrays(m, gg, gy, rss0, noise_variance, init_mean, init_variance)
    )
    mu, s = mu.reshape(-1).copy(), np.maximum(s.reshape(-1), opts.variance_floor)
    m, gg, gy, rss0, sn2 = (a.reshape(-1) for a in (m, gg, gy, rss0, sn2))
    n = mu.size
    iterations = np.zeros(n, dtype=np.int64)
    converged = np.zeros(n, dtype=bool)
    q_prev = np.full(n, np.nan)
    idx = np.arange(n)
    for it in range(1, opts.max_iter + 1):
        if idx.size == 0:
            break
        st = _Stats(m[idx], gg[idx], gy[idx], rss0[idx])
        s_i, mu_i, sn2_i = s[idx], mu[idx], sn2[idx]
        s_new = sn2_i * s_i / (sn2_i + st.gg * s_i)
        mu_new = s_new * (st.gy / sn2_i + mu_i / s_i)
        q = _q(st, mu_i, s_i, mu_new, s_new, sn2_i, log=np.log)
        d_mu = np.abs(mu_new - mu_i)
        d_s = np.abs(s_i - s_new)
        mu[idx] = mu_new
        s[idx] = np.maximum(s_new, opts.variance_floor)
        iterations[idx] = it
        done = (np.abs(q - q_prev[idx]) < opts.epsilon_q) | (
            (d_mu < opts.epsilon_param) & (d_s < opts.epsilon_param)
        )
        converged[idx[done]] = True
        q_prev[idx] = q
        idx = idx[~done]
    post_mean, post_var = _posterior(mu, s, gg, gy, sn2)
    return EmBatchResult(mu, s, post_mean, post_var, iterations, converged)
