"""Fast invariant checks, runnable as ``gaussest selftest``.

Each check prints one ``PASS``/``FAIL`` line; the exit code is the number of
failures capped at 1.
"""
from __future__ import annotations

import math
import time

import numpy as np

from .conjugate import GaussianParams, LinearGaussianModel, em_fit, gaussian_posterior, marginal_log_likelihood
from .experiments import ExperimentConfig, Task, run_experiment
from .phase import EbOptions, VonMisesParam, estimate_phase, posterior_kappa, von_mises_log_pdf
from .simulate import MeasurementBatch, ProbeConfig, RngStream, Scheme, heterodyne_variances
from .special import log_i0
from .squeezing import ml_homodyne_closed_form


def _log_i0_reference(gen):
    # direct series / numpy check where I0 does not overflow
    x = np.concatenate([[0.0, 1.0, 19.999, 20.0, 20.001], gen.uniform(0, 600, 40)])
    err = np.abs(log_i0(x) - np.log(np.i0(x))) / np.maximum(1.0, np.abs(np.log(np.i0(x))))
    ok = err.max() < 1e-12 and abs(log_i0(1.0) - 0.235914358507) < 1e-9
    return ok, f"max rel err vs numpy.i0 {err.max():.2e}"


def _precision_additivity(gen):
    worst = 0.0
    for _ in range(200):
        m = int(gen.integers(1, 20))
        g = gen.normal(size=m)
        model = LinearGaussianModel(g, float(gen.uniform(0.1, 3)))
        prior = GaussianParams(float(gen.normal()), float(gen.uniform(0.1, 3)))
        post = gaussian_posterior(prior, model, gen.normal(size=m))
        want = 1 / prior.variance + float(g @ g) / model.noise_variance
        worst = max(worst, abs(1 / post.variance - want) / want)
    return worst < 1e-14, f"max rel deviation {worst:.1e}"


def _em_ascent(gen):
    bad = 0
    for i in range(200):
        m = int(gen.integers(1, 30))
        model = LinearGaussianModel.constant(m, float(gen.uniform(0.5, 2)), float(gen.uniform(0.05, 2)))
        y = gen.normal(2, 1.5, size=m)
        fit = em_fit(model, y, stream_id=i)
        ll = [
            marginal_log_likelihood(GaussianParams(mu, s), model, y)
            for mu, s in zip(fit.mean_trace, fit.variance_trace)
        ]
        bad += int(np.any(np.diff(ll) < -1e-9 * np.maximum(1, np.abs(ll[1:]))))
    return bad == 0, f"{bad} of 200 runs with a likelihood decrease"


def _von_mises_conjugacy(gen):
    theta = np.linspace(-math.pi, math.pi, 4001)[:-1]
    worst = 0.0
    for _ in range(20):
        alpha = float(gen.uniform(0.5, 2))
        m = int(gen.integers(1, 4))
        batch = MeasurementBatch(Scheme.HETERODYNE_PHASE, gen.normal(size=m), gen.normal(size=m))
        k0 = complex(*gen.normal(size=2) * 2)
        beta = batch.samples
        # prior x likelihood, normalized numerically
        loglik = -np.abs(np.exp(1j * theta)[:, None] * beta[None, :] - alpha) ** 2
        un = von_mises_log_pdf(theta, k0) + loglik.sum(axis=1)
        w = np.exp(un - un.max())
        dens = w / (w.sum() * (2 * math.pi / theta.size))
        want = np.exp(von_mises_log_pdf(theta, posterior_kappa(k0, alpha, batch)))
        worst = max(worst, float(np.max(np.abs(dens - want))))
    return worst < 1e-6, f"max pointwise density gap {worst:.1e}"


def _ml_stationarity(gen):
    worst = 0.0
    for _ in range(500):
        m = int(gen.integers(1, 50))
        a = float(gen.uniform(-3, 3))
        q = gen.normal(math.sqrt(2) * a, 0.7, size=m)
        q1, q2 = float(q.sum()), float(q @ q)
        r = ml_homodyne_closed_form(m, q1, q2, a)
        t = math.exp(r)
        res = (2 * q2 * t * t - 2 * math.sqrt(2) * a * q1 * t - m) / max(1.0, m)
        worst = max(worst, abs(res))
    return worst < 1e-9, f"max scaled residual {worst:.1e}"


def _phase_noise_free(gen):
    worst = 0.0
    for _ in range(50):
        theta = float(gen.uniform(-math.pi, math.pi))
        alpha = float(gen.uniform(0.5, 3))
        beta = np.full(3, np.exp(-1j * theta) * alpha)
        est = estimate_phase(MeasurementBatch.from_complex(Scheme.HETERODYNE_PHASE, beta), alpha, EbOptions())
        worst = max(worst, abs(math.remainder(est.theta_hat - theta, 2 * math.pi)))
    return worst < 1e-9, f"max angle error {worst:.1e}"


def _uncertainty_product(gen):
    r = gen.uniform(-3, 3, 200)
    prods = np.array([np.prod(heterodyne_variances(float(x))) for x in r])
    return bool(np.all(prods >= 0.25)) and np.prod(heterodyne_variances(0.0)) == 0.25, "sigma_R^2 sigma_I^2 >= 1/4"


def _determinism(gen):
    a = RngStream(7, 3).generator().standard_normal(5)
    b = RngStream(7, 3).generator().standard_normal(5)
    cfg = ExperimentConfig(
        Task.PHASE, (1, 5), {"kappa": VonMisesParam.polar(4.0, 0.5)}, ProbeConfig(alpha_re=2.0), trials=40, base_seed=3
    )
    s1 = run_experiment(cfg)
    s2 = run_experiment(cfg, chunk_size=7)
    same = [r.metric for r in s1.rows] == [r.metric for r in s2.rows]
    return bool(np.array_equal(a, b)) and same, "streams and chunked sweeps reproduce exactly"


CHECKS = [
    ("log_i0 against numpy.i0", _log_i0_reference),
    ("posterior precision additivity", _precision_additivity),
    ("EM marginal-likelihood ascent", _em_ascent),
    ("von Mises conjugacy by quadrature", _von_mises_conjugacy),
    ("homodyne ML stationarity", _ml_stationarity),
    ("noise-free phase recovery", _phase_noise_free),
    ("heterodyne uncertainty product", _uncertainty_product),
    ("seeded reproducibility", _determinism),
]


def run_selftest(seed: int = 0, out=print) -> int:
    gen = np.random.default_rng(seed)
    failures = 0
    for name, check in CHECKS:
        start = time.perf_counter()
        try:
            ok, detail = check(gen)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failures += not ok
        out(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail}; {time.perf_counter() - start:.2f}s)")
    out(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return int(failures > 0)
