"""Fading and path-loss model.

The received input power at the harvester is P_R = P(d) * g where
P(d) = P_T * L(d) collects the link budget and g is the Nakagami power
gain, Gamma-distributed with shape m and mean omega.  Sampling uses the
Marsaglia-Tsang squeeze method driven by counter-based Philox streams so
that identical seeds reproduce identical draws regardless of chunking.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from . import special
from .errors import ValidationError

DEFAULT_WAVELENGTH_M = 0.3456
DEFAULT_CHUNK_SIZE = 1 << 20


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power plus the log-distance path-loss parameters."""

    transmit_power_mw: float
    distance_m: float
    path_loss_exponent: float
    wavelength_m: float = DEFAULT_WAVELENGTH_M
    reference_distance_m: float = 1.0

    def __post_init__(self):
        if self.transmit_power_mw <= 0.0:
            raise ValidationError("transmit power must be positive")
        if self.reference_distance_m <= 0.0:
            raise ValidationError("reference distance must be positive")
        if self.distance_m < self.reference_distance_m:
            raise ValidationError("distance must be at least the reference distance")
        if self.path_loss_exponent <= 0.0:
            raise ValidationError("path-loss exponent must be positive")
        if self.wavelength_m <= 0.0:
            raise ValidationError("wavelength must be positive")

    @property
    def path_gain(self) -> float:
        """Inverse path loss L(d) = (lambda / (4 pi d0))^2 (d0 / d)^nu."""
        near_field = (self.wavelength_m / (self.reference_distance_m * 4.0 * math.pi)) ** 2
        return near_field * (self.reference_distance_m / self.distance_m) ** self.path_loss_exponent

    @property
    def power_scale_mw(self) -> float:
        """P(d) = P_T * L(d), the scale of the received power."""
        return self.transmit_power_mw * self.path_gain


def path_gain(link: LinkBudget) -> float:
    return link.path_gain


@dataclass(frozen=True)
class FadingChannel:
    """Nakagami-m block fading; the power gain is Gamma(m, omega/m)."""

    nakagami_m: float
    omega: float = 1.0

    def __post_init__(self):
        if self.nakagami_m < 0.5:
            raise ValidationError("Nakagami shape must satisfy m >= 0.5")
        if self.omega <= 0.0:
            raise ValidationError("mean power gain omega must be positive")


def rician_to_nakagami(kappa: float) -> float:
    """Nakagami shape matching a Rician K-factor: m = (k+1)^2 / (2k+1)."""
    if kappa < 0.0:
        raise ValidationError("Rician parameter must be non-negative")
    return (kappa + 1.0) ** 2 / (2.0 * kappa + 1.0)


def gamma_pdf(ch: FadingChannel, x):
    """Density of the power gain.  Diverges at 0 for m < 1 (returned as inf)."""
    m, omega = ch.nakagami_m, ch.omega
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0.0):
        raise ValueError("gamma_pdf requires x >= 0")
    rate = m / omega
    log_norm = m * math.log(rate) - math.lgamma(m)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_pdf = log_norm + (m - 1.0) * np.log(x_arr) - rate * x_arr
        pdf = np.exp(log_pdf)
    if m < 1.0:
        pdf = np.where(x_arr == 0.0, np.inf, pdf)
    elif m > 1.0:
        pdf = np.where(x_arr == 0.0, 0.0, pdf)
    else:
        pdf = np.where(x_arr == 0.0, rate, pdf)
    return float(pdf) if np.isscalar(x) else pdf


def gamma_cdf(ch: FadingChannel, x):
    """CDF of the power gain, 1 - Gamma(m, m x / omega) / Gamma(m)."""
    m, omega = ch.nakagami_m, ch.omega
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0.0):
        raise ValueError("gamma_cdf requires x >= 0")
    cdf = special.regularized_lower_gamma(m, x_arr * (m / omega))
    return float(cdf) if np.isscalar(x) else cdf


def received_power_pdf(link: LinkBudget, ch: FadingChannel, x):
    """Density of P_R = P(d) * g: (1 / P(d)) f_g(x / P(d))."""
    scale = link.power_scale_mw
    if np.isscalar(x):
        return gamma_pdf(ch, x / scale) / scale
    return gamma_pdf(ch, np.asarray(x, dtype=float) / scale) / scale


def received_power_cdf(link: LinkBudget, ch: FadingChannel, x):
    """CDF of P_R, the monotone-transform identity F_g(x / P(d))."""
    scale = link.power_scale_mw
    if np.isscalar(x):
        return gamma_cdf(ch, x / scale)
    return gamma_cdf(ch, np.asarray(x, dtype=float) / scale)


def chunk_rng(seed: int, chunk_index: int) -> Generator:
    """Independent Philox4x64 stream for one chunk of a seeded computation.

    Streams are derived by counter jumps from the same key, so a chunked
    computation is reproducible and independent of execution order.
    """
    return Generator(Philox(key=seed).jumped(chunk_index))


def gamma_variates(rng: Generator, shape: float, size: int) -> np.ndarray:
    """Unit-scale Gamma(shape) draws via the Marsaglia-Tsang squeeze method.

    Shapes below one use the boost Gamma(a) = Gamma(a+1) * U^(1/a).  The
    rejection loop is vectorized; the draw order is fixed, so results are
    deterministic for a given generator state.
    """
    if shape < 0.5:
        raise ValidationError("gamma_variates requires shape >= 0.5")
    boost = None
    base = shape
    if shape < 1.0:
        boost = rng.random(size) ** (1.0 / shape)
        base = shape + 1.0
    d = base - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(size, dtype=float)
    pending = np.arange(size)
    while pending.size:
        x = rng.standard_normal(pending.size)
        u = rng.random(pending.size)
        v = (1.0 + c * x) ** 3
        positive = v > 0.0
        x2 = x * x
        squeeze = u < 1.0 - 0.0331 * x2 * x2
        with np.errstate(divide="ignore", invalid="ignore"):
            full = np.log(u) < 0.5 * x2 + d * (1.0 - v + np.log(np.where(positive, v, 1.0)))
        accept = positive & (squeeze | full)
        out[pending[accept]] = d * v[accept]
        pending = pending[~accept]
    if boost is not None:
        out *= boost
    return out


def sample_gamma(ch: FadingChannel, n: int, seed: int,
                 chunk_size: int = DEFAULT_CHUNK_SIZE) -> np.ndarray:
    """n IID power-gain draws, deterministic given the seed."""
    if n < 1:
        raise ValidationError("sample count must be at least 1")
    scale = ch.omega / ch.nakagami_m
    out = np.empty(n, dtype=float)
    for index, start in enumerate(range(0, n, chunk_size)):
        stop = min(start + chunk_size, n)
        rng = chunk_rng(seed, index)
        out[start:stop] = gamma_variates(rng, ch.nakagami_m, stop - start) * scale
    return out


def sample_received_power(link: LinkBudget, ch: FadingChannel, n: int, seed: int,
                          chunk_size: int = DEFAULT_CHUNK_SIZE) -> np.ndarray:
    """n IID draws of P_R = P(d) * g."""
    return link.power_scale_mw * sample_gamma(ch, n, seed, chunk_size)
