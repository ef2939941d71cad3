"""Log-domain modified Bessel function of the first kind, order zero."""
from __future__ import annotations

import numpy as np

from ._validation import DomainError

__all__ = ["log_i0", "SERIES_SWITCH"]

SERIES_SWITCH = 20.0
_SERIES_TERMS = 60
_ASYMPTOTIC_TERMS = 20
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _log_i0_series(x: np.ndarray) -> np.ndarray:
    # I0(x) - 1 = sum_{k>=1} (x^2/4)^k / (k!)^2; all terms positive, no cancellation.
    q = 0.25 * x * x
    term = np.ones_like(x)
    tail = np.zeros_like(x)
    for k in range(1, _SERIES_TERMS + 1):
        term = term * q / (k * k)
        tail = tail + term
    return np.log1p(tail)


def _log_i0_asymptotic(x: np.ndarray) -> np.ndarray:
    # I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k); terms shrink while k < 2x.
    term = np.ones_like(x)
    tail = np.zeros_like(x)
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        term = term * (2 * k - 1) ** 2 / (8.0 * k * x)
        tail = tail + term
    return x - _HALF_LOG_2PI - 0.5 * np.log(x) + np.log1p(tail)


def log_i0(x):
    """Natural log of the modified Bessel function I0.

    Parameters
    ----------
    x : float or array_like
        Nonnegative, finite argument(s).

    Returns
    -------
    float or ndarray
        ``ln I0(x)``, evaluated with a power series up to ``SERIES_SWITCH``
        and a log-domain asymptotic expansion above it, so large arguments
        never overflow.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("log_i0 requires finite, nonnegative arguments")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_SWITCH
    if np.any(small):
        out[small] = _log_i0_series(flat[small])
    if not np.all(small):
        out[~small] = _log_i0_asymptotic(flat[~small])
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)
