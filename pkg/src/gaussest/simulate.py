"""Seedable measurement simulators and the outcome-variance maps.

Every simulator takes an :class:`RngStream` *value*: the same stream always
reproduces the same samples, and independent streams can be used from
different workers without coordination.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    DomainError,
    check_complex,
    check_count,
    check_finite,
    check_positive,
    wrap_angle,
)

__all__ = [
    "Scheme",
    "ProbeConfig",
    "MeasurementBatch",
    "RngStream",
    "heterodyne_variances",
    "homodyne_variance",
    "povm_variance",
    "simulate_displacement_heterodyne",
    "simulate_displacement_homodyne",
    "simulate_squeezing_povm",
    "simulate_squeezing_homodyne",
    "simulate_phase_heterodyne",
    "sample_von_mises",
]

_U64 = (1 << 64) - 1


class Scheme(str, enum.Enum):
    HETERODYNE_DISPLACEMENT = "heterodyne_displacement"
    HOMODYNE_DISPLACEMENT = "homodyne_displacement"
    POVM_SQUEEZING = "povm_squeezing"
    HOMODYNE_SQUEEZING = "homodyne_squeezing"
    HETERODYNE_PHASE = "heterodyne_phase"

    @property
    def is_complex(self) -> bool:
        return self in (Scheme.HETERODYNE_DISPLACEMENT, Scheme.HETERODYNE_PHASE)


@dataclass(frozen=True)
class ProbeConfig:
    """True physical parameters of a simulated probe."""

    alpha_re: float = 0.0
    alpha_im: float = 0.0
    squeeze_r: float = 0.0
    phase_theta: float = 0.0

    def __post_init__(self):
        for name in ("alpha_re", "alpha_im", "squeeze_r", "phase_theta"):
            object.__setattr__(self, name, check_finite(getattr(self, name), name))
        object.__setattr__(self, "phase_theta", wrap_angle(self.phase_theta))

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_re, self.alpha_im)


@dataclass(frozen=True)
class MeasurementBatch:
    """M i.i.d. outcomes of one measurement scheme.

    Complex schemes keep the real and imaginary parts in ``samples_re`` and
    ``samples_im``; real schemes leave ``samples_im`` empty.
    """

    scheme: Scheme
    samples_re: np.ndarray
    samples_im: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        scheme = Scheme(self.scheme)
        re = np.asarray(self.samples_re, dtype=float).reshape(-1)
        im = np.asarray(self.samples_im, dtype=float).reshape(-1)
        if re.size < 1:
            raise ValueError("a measurement batch needs at least one sample")
        expected_im = re.size if scheme.is_complex else 0
        if im.size != expected_im:
            raise ValueError(
                f"{scheme.value} expects {expected_im} imaginary parts, got {im.size}"
            )
        if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
            raise DomainError("measurement samples must be finite")
        re.setflags(write=False)
        im.setflags(write=False)
        object.__setattr__(self, "scheme", scheme)
        object.__setattr__(self, "samples_re", re)
        object.__setattr__(self, "samples_im", im)

    @property
    def count(self) -> int:
        return int(self.samples_re.size)

    @property
    def samples(self) -> np.ndarray:
        """Samples as a complex array for complex schemes, real otherwise."""
        if self.scheme.is_complex:
            return self.samples_re + 1j * self.samples_im
        return self.samples_re

    @classmethod
    def from_complex(cls, scheme, samples) -> "MeasurementBatch":
        z = np.asarray(samples, dtype=complex).reshape(-1)
        return cls(scheme, z.real.copy(), z.imag.copy())


@dataclass(frozen=True)
class RngStream:
    """Identifies a reproducible random stream by ``(seed, stream_id)``."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence([int(self.seed) & _U64, int(self.stream_id) & _U64])
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, stream_id: int) -> "RngStream":
        """A stream keyed by this stream's identity plus ``stream_id``."""
        mixed = hash_to_u64(self.seed, self.stream_id)
        return RngStream(mixed, stream_id)


def hash_to_u64(*parts) -> int:
    """Stable 64-bit hash of a tuple of ints/strings (independent of PYTHONHASHSEED)."""
    import hashlib

    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected an RngStream, got {type(rng).__name__}")


def heterodyne_variances(r: float) -> tuple[float, float]:
    """Per-quadrature outcome variances ``((1+e^{-2r})/4, (1+e^{2r})/4)``."""
    r = check_finite(r, "r")
    return (1.0 + math.exp(-2.0 * r)) / 4.0, (1.0 + math.exp(2.0 * r)) / 4.0


def homodyne_variance(r: float) -> float:
    r = check_finite(r, "r")
    return math.exp(-2.0 * r) / 2.0


def povm_variance(alpha_abs: float) -> float:
    alpha_abs = check_positive(alpha_abs, "alpha_abs")
    return 1.0 / (4.0 * alpha_abs * alpha_abs)


def simulate_displacement_heterodyne(probe: ProbeConfig, m: int, rng) -> MeasurementBatch:
    m = check_count(m)
    var_re, var_im = heterodyne_variances(probe.squeeze_r)
    gen = _generator(rng)
    re = probe.alpha_re + math.sqrt(var_re) * gen.standard_normal(m)
    im = probe.alpha_im + math.sqrt(var_im) * gen.standard_normal(m)
    return MeasurementBatch(Scheme.HETERODYNE_DISPLACEMENT, re, im)


def simulate_displacement_homodyne(probe: ProbeConfig, m: int, rng) -> MeasurementBatch:
    m = check_count(m)
    sd = math.sqrt(homodyne_variance(probe.squeeze_r))
    q = math.sqrt(2.0) * probe.alpha_re + sd * _generator(rng).standard_normal(m)
    return MeasurementBatch(Scheme.HOMODYNE_DISPLACEMENT, q)


def simulate_squeezing_povm(alpha_abs: float, r_true: float, m: int, rng) -> MeasurementBatch:
    sd = math.sqrt(povm_variance(alpha_abs))
    r_true = check_finite(r_true, "r_true")
    m = check_count(m)
    xi = r_true + sd * _generator(rng).standard_normal(m)
    return MeasurementBatch(Scheme.POVM_SQUEEZING, xi)


def simulate_squeezing_homodyne(alpha_re: float, r_true: float, m: int, rng) -> MeasurementBatch:
    alpha_re = check_finite(alpha_re, "alpha_re")
    r_true = check_finite(r_true, "r_true")
    m = check_count(m)
    mean = math.sqrt(2.0) * alpha_re * math.exp(-r_true)
    sd = math.sqrt(math.exp(-2.0 * r_true) / 2.0)
    q = mean + sd * _generator(rng).standard_normal(m)
    return MeasurementBatch(Scheme.HOMODYNE_SQUEEZING, q)


def simulate_phase_heterodyne(alpha_abs: float, theta_true: float, m: int, rng) -> MeasurementBatch:
    """Heterodyne outcomes ``e^{-i theta} alpha + n`` with unit-total-variance complex noise."""
    alpha_abs = check_positive(alpha_abs, "alpha_abs")
    theta_true = check_finite(theta_true, "theta_true")
    m = check_count(m)
    gen = _generator(rng)
    mean = alpha_abs * complex(math.cos(theta_true), -math.sin(theta_true))
    sd = math.sqrt(0.5)
    re = mean.real + sd * gen.standard_normal(m)
    im = mean.imag + sd * gen.standard_normal(m)
    return MeasurementBatch(Scheme.HETERODYNE_PHASE, re, im)


def sample_von_mises(kappa: complex, rng, size=None):
    """Draw angles in [-pi, pi) from the von Mises law with shaping parameter ``kappa``.

    ``|kappa|`` is the concentration and ``angle(kappa)`` the mean direction.
    Uses the Best & Fisher (1979) wrapped-Cauchy rejection scheme.
    """
    kappa = check_complex(kappa, "kappa")
    gen = _generator(rng)
    n = 1 if size is None else int(np.prod(size))
    conc = abs(kappa)
    loc = math.atan2(kappa.imag, kappa.real)
    if conc == 0.0:
        out = gen.uniform(-math.pi, math.pi, n)
    else:
        if conc < 1e-5:
            s = 1.0 / conc + conc
        else:
            tau = 1.0 + math.sqrt(1.0 + 4.0 * conc * conc)
            rho = (tau - math.sqrt(2.0 * tau)) / (2.0 * conc)
            s = (1.0 + rho * rho) / (2.0 * rho)
        out = np.empty(n)
        todo = np.arange(n)
        while todo.size:
            k = todo.size
            u1, u2, u3 = gen.random(k), gen.random(k), gen.random(k)
            z = np.cos(np.pi * u1)
            f = (1.0 + s * z) / (s + z)
            c = conc * (s - f)
            with np.errstate(divide="ignore"):
                accept = (c * (2.0 - c) - u2 > 0) | (np.log(c / u2) + 1.0 - c >= 0)
            theta = np.sign(u3 - 0.5) * np.arccos(np.clip(f, -1.0, 1.0))
            out[todo[accept]] = theta[accept]
            todo = todo[~accept]
        out = wrap_angle(out + loc)
    out = np.asarray(out)
    if size is None:
        return float(out[0])
    return out.reshape(size)
