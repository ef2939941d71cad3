"""Input validation helpers shared across the package."""
from __future__ import annotations

import math

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateDataError(ValueError):
    """The observed data do not determine the requested estimate."""


def check_finite(value, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


def check_positive(value, name: str) -> float:
    value = check_finite(value, name)
    if value <= 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")
    return value


def check_count(m, name: str = "m") -> int:
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"{name} must be a positive integer, got {m!r}")
    return int(m)


def check_complex(value, name: str) -> complex:
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


def as_float_vector(y, name: str = "y") -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def wrap_angle(theta):
    """Wrap an angle (scalar or array) into [-pi, pi)."""
    wrapped = np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped
