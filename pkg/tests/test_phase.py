import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from gaussest import (
    DegenerateDataError,
    DomainError,
    EbOptions,
    MeasurementBatch,
    RngStream,
    Scheme,
    VonMisesParam,
    eb_objective,
    estimate_phase,
    fit_kappa0,
    genie_phase_estimate,
    log_i0,
    posterior_kappa,
    sample_von_mises,
    simulate_phase_heterodyne,
    von_mises_log_pdf,
)
from gaussest.phase import golden_section_max, phase_estimates_from_sums


def phase_batch(beta):
    return MeasurementBatch.from_complex(Scheme.HETERODYNE_PHASE, beta)


# --- density ----------------------------------------------------------------------------


def test_uniform_density_at_zero_kappa():
    th = np.linspace(-3, 3, 7)
    assert np.allclose(von_mises_log_pdf(th, 0j), -math.log(2 * math.pi), rtol=0, atol=1e-15)


@pytest.mark.parametrize("kappa", [1.0, 4 * cmath.exp(0.5j), 100.0])
def test_density_normalised(kappa):
    total, _ = integrate.quad(lambda t: math.exp(von_mises_log_pdf(t, kappa)), -math.pi, math.pi,
                              epsabs=1e-13, limit=200, points=[cmath.phase(kappa)])
    assert abs(total - 1) < 1e-8


def test_density_mode():
    kappa = 3 * cmath.exp(-2.2j)
    grid = np.linspace(-math.pi, math.pi, 10001)
    assert von_mises_log_pdf(-2.2, kappa) >= np.max(von_mises_log_pdf(grid, kappa))


def test_density_domain():
    with pytest.raises(DomainError):
        von_mises_log_pdf(0.0, complex(math.inf, 0))
    with pytest.raises(ValueError):
        von_mises_log_pdf(math.nan, 1.0)


def test_von_mises_param():
    p = VonMisesParam.polar(4.0, 0.5)
    assert p.concentration == pytest.approx(4.0) and p.direction == pytest.approx(0.5)
    with pytest.raises(DomainError):
        VonMisesParam(complex(math.nan, 0))


# --- posterior ---------------------------------------------------------------------------


def test_posterior_noise_free():
    alpha, theta = 1.7, -2.1
    kp = posterior_kappa(0j, alpha, phase_batch([cmath.exp(-1j * theta) * alpha]))
    assert kp == pytest.approx(2 * alpha**2 * cmath.exp(1j * theta), abs=1e-14)
    assert cmath.phase(kp) == pytest.approx(theta, abs=1e-14)


def test_posterior_hand_value():
    kp = posterior_kappa(4 * cmath.exp(0.5j), 1.0, phase_batch([1.0]))
    assert kp.real == pytest.approx(5.5104, abs=1e-4)
    assert kp.imag == pytest.approx(1.9177, abs=1e-4)


def test_posterior_zero_sum_is_prior():
    k0 = 1.2 - 0.4j
    assert posterior_kappa(k0, 2.0, phase_batch([1 + 2j, -1 - 2j])) == k0


def test_posterior_wrong_scheme():
    with pytest.raises(ValueError):
        posterior_kappa(0j, 1.0, MeasurementBatch(Scheme.HETERODYNE_DISPLACEMENT, [1.0], [1.0]))


def conjugacy_gap(gen):
    alpha = float(gen.uniform(0.3, 2.5))
    m = int(gen.integers(1, 5))
    beta = gen.normal(size=m) + 1j * gen.normal(size=m)
    k0 = complex(*gen.normal(0, 2, 2))
    theta = np.linspace(-math.pi, math.pi, 2049)
    loglik = -np.abs(np.exp(1j * theta)[:, None] * beta[None, :] - alpha) ** 2
    un = von_mises_log_pdf(theta, k0) + loglik.sum(axis=1)
    w = np.exp(un - un.max())
    dens = w / integrate.simpson(w, x=theta)
    want = np.exp(von_mises_log_pdf(theta, posterior_kappa(k0, alpha, phase_batch(beta))))
    return float(np.max(np.abs(dens - want)))


def test_conjugacy_by_quadrature():
    gen = np.random.default_rng(0)
    assert max(conjugacy_gap(gen) for _ in range(100)) < 1e-6


# --- empirical-Bayes objective --------------------------------------------------------------


def test_objective_at_zero():
    c = 1.3 - 2j
    assert eb_objective(0.0, c) == pytest.approx(log_i0(abs(c)), abs=1e-15)


def test_objective_collinear_value():
    # ln I0(5) - ln I0(3) from 50-digit arithmetic
    assert eb_objective(3.0, 2.0) == pytest.approx(1.719374154009, abs=1e-11)
    assert eb_objective(3.0, 2.0) == pytest.approx(log_i0(5.0) - log_i0(3.0), abs=1e-15)


def test_objective_increasing():
    for c in (0.01, 1 + 1j, -40j, 500.0):
        t = np.linspace(0, 1e3, 20001)
        v = eb_objective(t, np.full(t.shape, c))
        assert np.all(np.diff(v) > 0)


def test_objective_degenerate():
    with pytest.raises(DegenerateDataError, match="degenerate measurement sum"):
        eb_objective(1.0, 0j)


def test_golden_section_interior_optimum():
    x, fx, n = golden_section_max(lambda t: -((t - 0.3) ** 2), 0.0, 2.0, tol=1e-8, max_eval=200)
    assert abs(x[0] - 0.3) < 1e-7 and n <= 200


def test_golden_section_respects_budget():
    _, _, n = golden_section_max(lambda t: -np.abs(t - 0.7), 0.0, 1.0, tol=1e-15, max_eval=20)
    assert n <= 20


# --- fit and estimate ------------------------------------------------------------------------


def test_fit_direction_and_bound():
    gen = np.random.default_rng(1)
    opts = EbOptions()
    for _ in range(50):
        alpha = float(gen.uniform(0.5, 3))
        b = simulate_phase_heterodyne(alpha, float(gen.uniform(-3, 3)), int(gen.integers(1, 20)), gen)
        c = 2 * alpha * complex(b.samples_re.sum(), -b.samples_im.sum())
        k0 = fit_kappa0(b, alpha, opts)
        assert abs(k0 / abs(k0) - c / abs(c)) <= 4e-16
        grid = np.linspace(0, opts.kappa_max, 10001)
        t_grid = grid[np.argmax(eb_objective(grid, np.full(grid.shape, c)))]
        assert abs(abs(k0) - t_grid) <= opts.tol + 1e-9
        assert abs(abs(k0) - opts.kappa_max) <= opts.tol
        est = estimate_phase(b, alpha, opts)
        assert abs(math.remainder(est.theta_hat - cmath.phase(c), 2 * math.pi)) < 1e-9
        assert est.theta_hat == pytest.approx(cmath.phase(est.kappa_p), abs=1e-15)


def test_noise_free_recovery():
    for theta in (-3.0, -0.4, 0.0, 1.0, 3.1):
        beta = np.full(4, 2.0 * cmath.exp(-1j * theta))
        est = estimate_phase(phase_batch(beta), 2.0)
        assert abs(est.theta_hat - theta) < 1e-9
        assert -math.pi <= est.theta_hat < math.pi


def test_degenerate_sum():
    b = phase_batch([1 + 1j, -1 - 1j])
    with pytest.raises(DegenerateDataError, match="degenerate measurement sum"):
        estimate_phase(b, 1.0)
    with pytest.raises(DegenerateDataError):
        fit_kappa0(b, 1.0)


def test_genie_cases():
    b = phase_batch([0.3 - 0.9j, 1.1 + 0.2j])
    big = genie_phase_estimate(b, 1.0, 1e9 * cmath.exp(0.7j))
    assert big.theta_hat == pytest.approx(0.7, abs=1e-8)
    flat = genie_phase_estimate(b, 1.0, 0j)
    assert flat.theta_hat == pytest.approx(cmath.phase(np.conj(b.samples.sum())), abs=1e-15)
    hand = genie_phase_estimate(phase_batch([1.0]), 1.0, 4 * cmath.exp(0.5j))
    assert abs(hand.theta_hat - 0.33489) < 1e-4


@settings(max_examples=200, deadline=None)
@given(st.floats(-10, 10), st.floats(0.1, 100), st.floats(-math.pi, math.pi))
def test_genie_rotation_equivariance(delta, mag, phase):
    c = mag * cmath.exp(1j * phase)
    beta_star = c / 2  # alpha = 1
    b0 = phase_batch([np.conj(beta_star)])
    b1 = phase_batch([np.conj(beta_star * cmath.exp(1j * delta))])
    t0 = genie_phase_estimate(b0, 1.0, 0j).theta_hat
    t1 = genie_phase_estimate(b1, 1.0, 0j).theta_hat
    assert abs(math.remainder(t1 - t0 - delta, 2 * math.pi)) < 1e-9


@settings(max_examples=100, deadline=None)
@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e4, allow_nan=False, allow_infinity=False),
       st.floats(1e-3, 1e3))
def test_angle_scale_invariance_and_direction(c, scale):
    theta, k0, kp, _ = phase_estimates_from_sums([c])
    theta_s, *_ = phase_estimates_from_sums([c * scale])
    # equal up to the rounding of one complex-by-real product
    assert abs(k0[0] / abs(k0[0]) - c / abs(c)) <= 4e-16
    assert abs(math.remainder(theta[0] - theta_s[0], 2 * math.pi)) < 1e-12
    assert abs(cmath.exp(1j * theta[0]) - kp[0] / abs(kp[0])) <= 1e-15


def test_eb_options_validation():
    with pytest.raises(ValueError):
        EbOptions(kappa_max=0.0)
    with pytest.raises(ValueError):
        EbOptions(max_eval=0)


def test_learned_close_to_genie_on_simulated_data():
    alpha, kappa0 = 2.0, 4 * cmath.exp(0.5j)
    err_eb, err_genie = [], []
    for i in range(300):
        theta = sample_von_mises(kappa0, RngStream(i, 0))
        b = simulate_phase_heterodyne(alpha, theta, 10, RngStream(i, 1))
        err_eb.append(math.sin(theta - estimate_phase(b, alpha).theta_hat) ** 2)
        err_genie.append(math.sin(theta - genie_phase_estimate(b, alpha, kappa0).theta_hat) ** 2)
    assert np.mean(err_eb) >= np.mean(err_genie) - 3 * np.std(err_genie) / math.sqrt(300)
    assert np.mean(err_eb) < 0.05
