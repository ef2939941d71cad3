import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from gaussest import (
    DomainError,
    MeasurementBatch,
    ProbeConfig,
    RngStream,
    Scheme,
    heterodyne_variances,
    homodyne_variance,
    povm_variance,
    sample_von_mises,
    simulate_displacement_heterodyne,
    simulate_displacement_homodyne,
    simulate_phase_heterodyne,
    simulate_squeezing_homodyne,
    simulate_squeezing_povm,
)
from gaussest.phase import circular_mean

BIG = 10**6


def assert_moments(x, mean, var, var_rtol=0.01):
    n = x.size
    assert abs(x.mean() - mean) < 3 * math.sqrt(var / n)
    assert abs(x.var(ddof=1) / var - 1) < var_rtol


# --- variance maps ---------------------------------------------------------------


@pytest.mark.parametrize(
    "r, want",
    [(0.0, (0.5, 0.5)), (1.0, (0.283833, 2.097264)), (-1.0, (2.097264, 0.283833))],
)
def test_heterodyne_variances(r, want):
    assert heterodyne_variances(r) == pytest.approx(want, abs=1e-5)


def test_heterodyne_variances_exact_at_zero():
    assert heterodyne_variances(0.0) == (0.5, 0.5)


@pytest.mark.parametrize("r, want", [(0.0, 0.5), (1.0, 0.067668), (-1.0, 3.694528)])
def test_homodyne_variance(r, want):
    assert abs(homodyne_variance(r) - want) < 1e-6
    assert homodyne_variance(r) == pytest.approx((math.cosh(2 * r) - math.sinh(2 * r)) / 2, rel=1e-12)


@pytest.mark.parametrize("alpha, want", [(1.0, 0.25), (abs(1 + 1j), 0.125), (abs(2 + 2j), 0.03125)])
def test_povm_variance(alpha, want):
    assert povm_variance(alpha) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("fn, arg", [(heterodyne_variances, math.nan), (homodyne_variance, math.inf),
                                     (povm_variance, 0.0), (povm_variance, -1.0)])
def test_variance_map_domain_errors(fn, arg):
    with pytest.raises(DomainError):
        fn(arg)


@settings(max_examples=200)
@given(st.floats(min_value=-5, max_value=5))
def test_uncertainty_product(r):
    a, b = heterodyne_variances(r)
    assert a * b >= 0.25
    if r != 0.0:
        assert a * b > 0.25 or abs(r) < 1e-7


# --- simulators -------------------------------------------------------------------


def test_heterodyne_moments():
    b = simulate_displacement_heterodyne(ProbeConfig(2.0, 2.0, 0.0), BIG, RngStream(1))
    assert b.scheme is Scheme.HETERODYNE_DISPLACEMENT and b.count == BIG
    assert_moments(b.samples_re, 2.0, 0.5)
    assert_moments(b.samples_im, 2.0, 0.5)


def test_heterodyne_squeezed_moments():
    var_re, var_im = heterodyne_variances(1.0)
    b = simulate_displacement_heterodyne(ProbeConfig(-1.0, 0.5, 1.0), BIG, RngStream(2))
    assert_moments(b.samples_re, -1.0, var_re)
    assert_moments(b.samples_im, 0.5, var_im)


def test_heterodyne_single_sample_and_vacuum():
    one = simulate_displacement_heterodyne(ProbeConfig(0.3, -0.2, 0.4), 1, RngStream(3))
    assert one.count == 1 and one.samples.shape == (1,) and np.iscomplexobj(one.samples)
    vac = simulate_displacement_heterodyne(ProbeConfig(), 10**5, RngStream(4))
    assert abs(vac.samples_re.mean()) < 3 * math.sqrt(0.5 / 1e5)
    assert abs(vac.samples_im.mean()) < 3 * math.sqrt(0.5 / 1e5)


@pytest.mark.parametrize("alpha_re, r, m", [(2.0, 0.0, BIG), (0.0, 0.0, 10**5), (2.0, 1.0, BIG)])
def test_homodyne_displacement_moments(alpha_re, r, m):
    b = simulate_displacement_homodyne(ProbeConfig(alpha_re, 7.0, r), m, RngStream(5))
    assert b.samples_im.size == 0
    assert_moments(b.samples_re, math.sqrt(2) * alpha_re, homodyne_variance(r))


@pytest.mark.parametrize("alpha, r, m", [(math.sqrt(2), 1.0, BIG), (1.0, 0.0, 10**5)])
def test_povm_moments(alpha, r, m):
    b = simulate_squeezing_povm(alpha, r, m, RngStream(6))
    assert_moments(b.samples_re, r, povm_variance(alpha), var_rtol=0.02)


def test_povm_large_alpha_concentrates():
    b = simulate_squeezing_povm(1e6, 0.7, 10, RngStream(7))
    assert np.max(np.abs(b.samples_re - 0.7)) < 1e-5


@pytest.mark.parametrize("alpha_re, r, m", [(1.0, 0.0, BIG), (0.0, 0.0, 10**5), (2.0, 1.0, BIG)])
def test_homodyne_squeezing_moments(alpha_re, r, m):
    b = simulate_squeezing_homodyne(alpha_re, r, m, RngStream(8))
    assert_moments(b.samples_re, math.sqrt(2) * alpha_re * math.exp(-r), math.exp(-2 * r) / 2)


@pytest.mark.parametrize("alpha, theta, m", [(2.0, 0.5, BIG), (1.0, 0.0, 10**5), (1.0, math.pi / 2, 10**5)])
def test_phase_moments(alpha, theta, m):
    b = simulate_phase_heterodyne(alpha, theta, m, RngStream(9))
    mean = alpha * np.exp(-1j * theta)
    assert_moments(b.samples_re, mean.real, 0.5)
    assert_moments(b.samples_im, mean.imag, 0.5)


def test_phase_rotation_covariance():
    m, delta = 10**5, 0.8
    z0 = simulate_phase_heterodyne(1.5, 0.2, m, RngStream(10)).samples.mean()
    z1 = simulate_phase_heterodyne(1.5, 0.2 + delta, m, RngStream(10)).samples.mean()
    assert abs(np.angle(z1 / z0) + delta) < 4 * math.sqrt(1 / m) / 1.5


@pytest.mark.parametrize(
    "call",
    [
        lambda: simulate_displacement_heterodyne(ProbeConfig(), 0, RngStream(0)),
        lambda: simulate_displacement_homodyne(ProbeConfig(), -3, RngStream(0)),
        lambda: simulate_squeezing_homodyne(1.0, 0.0, 0, RngStream(0)),
    ],
)
def test_nonpositive_count_rejected(call):
    with pytest.raises(ValueError):
        call()


@pytest.mark.parametrize(
    "call",
    [
        lambda: simulate_squeezing_povm(0.0, 1.0, 5, RngStream(0)),
        lambda: simulate_phase_heterodyne(-1.0, 0.0, 5, RngStream(0)),
    ],
)
def test_vacuum_probe_rejected(call):
    with pytest.raises(DomainError):
        call()


def test_determinism_and_stream_separation():
    p = ProbeConfig(1.0, -1.0, 0.3)
    a = simulate_displacement_heterodyne(p, 50, RngStream(11, 4))
    b = simulate_displacement_heterodyne(p, 50, RngStream(11, 4))
    c = simulate_displacement_heterodyne(p, 50, RngStream(11, 5))
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


# --- batch and probe types ---------------------------------------------------------


def test_probe_wraps_phase():
    assert ProbeConfig(phase_theta=math.pi).phase_theta == pytest.approx(-math.pi)
    assert ProbeConfig(phase_theta=7.0).phase_theta == pytest.approx(7.0 - 2 * math.pi)
    with pytest.raises(DomainError):
        ProbeConfig(alpha_re=math.nan)


def test_batch_invariants():
    b = MeasurementBatch(Scheme.POVM_SQUEEZING, [1.0, 2.0])
    assert b.count == 2 and b.samples_im.size == 0
    with pytest.raises(ValueError):
        b.samples_re[0] = 3.0
    with pytest.raises(ValueError):
        MeasurementBatch(Scheme.POVM_SQUEEZING, [1.0], [2.0])
    with pytest.raises(ValueError):
        MeasurementBatch(Scheme.HETERODYNE_PHASE, [1.0, 2.0], [2.0])
    with pytest.raises(ValueError):
        MeasurementBatch(Scheme.HOMODYNE_SQUEEZING, [])
    with pytest.raises(DomainError):
        MeasurementBatch(Scheme.HOMODYNE_SQUEEZING, [1.0, math.inf])


# --- von Mises sampler ---------------------------------------------------------------


def test_von_mises_zero_concentration_is_uniform():
    x = sample_von_mises(0j, RngStream(12), size=10**5)
    assert np.all((x >= -math.pi) & (x < math.pi))
    assert stats.kstest(x, stats.uniform(loc=-math.pi, scale=2 * math.pi).cdf).pvalue > 1e-3


def test_von_mises_mean_direction():
    x = sample_von_mises(4 * np.exp(0.5j), RngStream(13), size=BIG)
    # circular-mean sd from the mean resultant length of a kappa = 4 law
    rbar = float(np.abs(np.exp(1j * x).mean()))
    sd = math.sqrt((1 - np.mean(np.cos(2 * (x - 0.5)))) / 2) / rbar / math.sqrt(x.size)
    assert abs(circular_mean(x) - 0.5) < 3 * sd


def test_von_mises_high_concentration_variance():
    x = sample_von_mises(50.0, RngStream(14), size=BIG)
    assert abs(np.mean(x**2) * 50 - 1) < 0.1


def test_von_mises_matches_scipy_law():
    kappa = 2.5 * np.exp(-2.0j)
    x = sample_von_mises(kappa, RngStream(15), size=50_000)
    # scipy's support is centred on loc, so compare the recentred angles
    centred = np.angle(np.exp(1j * (x - np.angle(kappa))))
    assert stats.kstest(centred, stats.vonmises(abs(kappa)).cdf).pvalue > 1e-3


def test_von_mises_scalar_and_domain():
    v = sample_von_mises(1.0, RngStream(16))
    assert isinstance(v, float) and -math.pi <= v < math.pi
    with pytest.raises(DomainError):
        sample_von_mises(complex(math.nan, 0), RngStream(0))
