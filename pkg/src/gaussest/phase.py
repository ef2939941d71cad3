"""Phase estimation with a von Mises prior learned by empirical Bayes.

With heterodyne outcomes ``beta_i`` of a real coherent probe ``alpha``, a
von Mises prior with shaping parameter ``kappa0`` gives a von Mises posterior
with ``kappa_p = kappa0 + 2 alpha conj(sum beta_i)``. The prior is fitted by
maximising ``log I0(|kappa0 + c|) - log I0(|kappa0|)`` with ``c = 2 alpha conj(sum beta)``.

For fixed ``|kappa0|`` that objective is largest when ``kappa0`` points along
``c``, so the search runs over the ray ``kappa0 = t c/|c|``. Along the ray the
objective increases with ``t`` and has no finite maximiser; the search is
capped at ``EbOptions.kappa_max``. Since ``kappa0`` and ``c`` are collinear,
the cap has no effect on the phase estimate ``angle(kappa_p)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import DegenerateDataError, check_complex, check_count, check_positive, wrap_angle
from .simulate import MeasurementBatch, Scheme
from .special import log_i0

__all__ = [
    "VonMisesParam",
    "PhaseEstimate",
    "EbOptions",
    "von_mises_log_pdf",
    "posterior_kappa",
    "eb_objective",
    "golden_section_max",
    "fit_kappa0",
    "estimate_phase",
    "genie_phase_estimate",
    "circular_mean",
    "phase_estimates_from_sums",
]

_LOG_2PI = math.log(2.0 * math.pi)
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class VonMisesParam:
    kappa: complex

    def __post_init__(self):
        object.__setattr__(self, "kappa", check_complex(self.kappa, "kappa"))

    @classmethod
    def polar(cls, concentration: float, direction: float) -> "VonMisesParam":
        return cls(concentration * complex(math.cos(direction), math.sin(direction)))

    @property
    def concentration(self) -> float:
        return abs(self.kappa)

    @property
    def direction(self) -> float:
        return math.atan2(self.kappa.imag, self.kappa.real)


@dataclass
class PhaseEstimate:
    theta_hat: float
    fitted_kappa0: complex | None
    kappa_p: complex
    objective_value: float | None = None


@dataclass(frozen=True)
class EbOptions:
    kappa_max: float = 1e3
    tol: float = 1e-6
    max_eval: int = 200

    def __post_init__(self):
        check_positive(self.kappa_max, "kappa_max")
        check_positive(self.tol, "tol")
        check_count(self.max_eval, "max_eval")


def von_mises_log_pdf(theta, kappa: complex):
    """``Re(kappa e^{-i theta}) - log(2 pi) - log I0(|kappa|)``; ``theta`` may be an array."""
    kappa = check_complex(kappa, "kappa")
    th = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(th)):
        raise ValueError("theta must be finite")
    val = kappa.real * np.cos(th) + kappa.imag * np.sin(th) - _LOG_2PI - log_i0(abs(kappa))
    return float(val) if val.ndim == 0 else val


def _require_phase(batch: MeasurementBatch):
    if batch.scheme is not Scheme.HETERODYNE_PHASE:
        raise ValueError(f"expected a heterodyne_phase batch, got {batch.scheme.value}")


def _data_term(batch: MeasurementBatch, alpha_abs: float) -> complex:
    # 2 alpha conj(sum beta)
    return 2.0 * alpha_abs * complex(batch.samples_re.sum(), -batch.samples_im.sum())


def posterior_kappa(kappa0: complex, alpha_abs: float, batch: MeasurementBatch) -> complex:
    _require_phase(batch)
    kappa0 = check_complex(kappa0, "kappa0")
    alpha_abs = check_positive(alpha_abs, "alpha_abs")
    return kappa0 + _data_term(batch, alpha_abs)


def eb_objective(kappa0_mag, c):
    """Marginal log-likelihood (up to a constant) at ``kappa0 = kappa0_mag * c/|c|``.

    Vectorised over matching arrays of ``kappa0_mag`` and ``c``.
    """
    t = np.asarray(kappa0_mag, dtype=float)
    c = np.asarray(c, dtype=complex)
    mag = np.abs(c)
    if np.any(mag == 0):
        raise DegenerateDataError("degenerate measurement sum: the data term is zero")
    val = log_i0(np.abs(t * (c / mag) + c)) - log_i0(t)
    return float(val) if np.ndim(val) == 0 else val


def golden_section_max(f, lo, hi, tol=1e-6, max_eval=200):
    """Maximise ``f`` on ``[lo, hi]`` by golden-section search.

    ``f`` is evaluated on arrays: every instance shares the same bracket
    length, so all instances take the same number of steps. The interior
    optimum is compared against both endpoints, which covers monotone
    objectives. Returns ``(x, f(x), n_eval)``.
    """
    lo = np.array(lo, dtype=float, ndmin=1)
    hi = np.array(hi, dtype=float, ndmin=1)
    a, b = lo.copy(), hi.copy()
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    n_eval = 2
    while np.max(b - a) > tol and n_eval < max_eval - 2:
        left = f1 >= f2  # keep [a, x2]
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        x2n = np.where(left, x1, a + _INV_PHI * (b - a))
        x1n = np.where(left, b - _INV_PHI * (b - a), x2)
        f2n = np.where(left, f1, np.nan)
        f1n = np.where(left, np.nan, f2)
        fresh = np.where(left, x1n, x2n)
        fv = f(fresh)
        f1 = np.where(left, fv, f1n)
        f2 = np.where(left, f2n, fv)
        x1, x2 = x1n, x2n
        n_eval += 1
    mid = np.where(f1 >= f2, x1, x2)
    f_mid = np.maximum(f1, f2)
    f_lo, f_hi = f(lo), f(hi)
    n_eval += 2
    x = np.where(f_hi > f_mid, hi, mid)
    fx = np.maximum(f_mid, f_hi)
    x = np.where(f_lo > fx, lo, x)
    fx = np.maximum(fx, f_lo)
    return x, fx, n_eval


def phase_estimates_from_sums(c, opts: EbOptions | None = None):
    """Empirical-Bayes fit for an array of data terms ``c = 2 alpha conj(sum beta)``.

    Returns ``(theta_hat, kappa0_hat, kappa_p, objective_value)`` arrays.
    """
    opts = opts or EbOptions()
    c = np.array(c, dtype=complex, ndmin=1)
    mag = np.abs(c)
    if np.any(mag == 0):
        raise DegenerateDataError("degenerate measurement sum: the data term is zero")
    unit = c / mag
    t, obj, _ = golden_section_max(
        lambda x: eb_objective(x, c),
        np.zeros(c.shape),
        np.full(c.shape, float(opts.kappa_max)),
        opts.tol,
        opts.max_eval,
    )
    kappa0 = t * unit
    kappa_p = kappa0 + c
    theta = wrap_angle(np.angle(kappa_p))
    return np.atleast_1d(theta), kappa0, kappa_p, obj


def fit_kappa0(batch: MeasurementBatch, alpha_abs: float, opts: EbOptions | None = None) -> complex:
    """Empirical-Bayes estimate of the prior shaping parameter."""
    _require_phase(batch)
    alpha_abs = check_positive(alpha_abs, "alpha_abs")
    _, kappa0, _, _ = phase_estimates_from_sums([_data_term(batch, alpha_abs)], opts)
    return complex(kappa0[0])


def estimate_phase(batch: MeasurementBatch, alpha_abs: float, opts: EbOptions | None = None) -> PhaseEstimate:
    """Phase estimate ``angle(kappa0_hat + 2 alpha conj(sum beta))`` with ``kappa0_hat`` learned from the batch."""
    _require_phase(batch)
    alpha_abs = check_positive(alpha_abs, "alpha_abs")
    theta, kappa0, kappa_p, obj = phase_estimates_from_sums([_data_term(batch, alpha_abs)], opts)
    return PhaseEstimate(float(theta[0]), complex(kappa0[0]), complex(kappa_p[0]), float(obj[0]))


def genie_phase_estimate(batch: MeasurementBatch, alpha_abs: float, true_kappa0: complex) -> PhaseEstimate:
    kappa_p = posterior_kappa(true_kappa0, alpha_abs, batch)
    theta = wrap_angle(math.atan2(kappa_p.imag, kappa_p.real))
    return PhaseEstimate(theta, None, kappa_p)


def circular_mean(angles) -> float:
    z = np.exp(1j * np.asarray(angles, dtype=float)).mean()
    return math.atan2(z.imag, z.real)


