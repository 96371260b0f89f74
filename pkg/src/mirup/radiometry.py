"""Thermal background model and noise-budget bookkeeping.

A single up-converted spatial mode at temperature T carries a mean photon
occupation of 1/(exp(h nu / k T) - 1) per spectral mode; an emissivity
factor scales that occupation for partially emitting sources. Folding the
occupation through the acceptance band of the optical chain gives the
background count rate; adding the detector dark rate gives the total.

Acceptance-band transfer functions come in two flavors: an analytic
narrow band (:class:`DeltaBand`) and a tabulated curve loaded from CSV
(:class:`TabulatedTransfer`). Frequencies are signal-band frequencies:
only photons in the convertible band produce counts.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy import integrate

from .errors import DomainError
from .quantities import BOLTZMANN, PLANCK, SpectralBand

# exp() argument above which the occupation is returned as exactly zero
# (the true value is < 1e-304, far below any measurable rate).
_OCCUPATION_UNDERFLOW = 700.0


@dataclass(frozen=True)
class ThermalEnvironment:
    """Temperature (K) and emissivity of the dominant thermal emitter."""

    temperature: float
    emissivity: float = 1.0

    def __post_init__(self) -> None:
        if not self.temperature > 0:
            raise DomainError("ThermalEnvironment.temperature must be positive")
        if not 0.0 <= self.emissivity <= 1.0:
            raise DomainError("ThermalEnvironment.emissivity must lie in [0, 1]")


@dataclass(frozen=True)
class DeltaBand:
    """Narrow-band transfer function: flat ``peak`` transmission over ``band``."""

    band: SpectralBand
    peak: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.peak <= 1.0:
            raise DomainError("DeltaBand.peak must lie in [0, 1]")


@dataclass(frozen=True)
class TabulatedTransfer:
    """Pointwise transfer function on a strictly increasing frequency grid."""

    frequency_hz: np.ndarray
    transmission: np.ndarray

    def __post_init__(self) -> None:
        freq = np.asarray(self.frequency_hz, dtype=float)
        trans = np.asarray(self.transmission, dtype=float)
        object.__setattr__(self, "frequency_hz", freq)
        object.__setattr__(self, "transmission", trans)
        if freq.ndim != 1 or trans.ndim != 1 or freq.size != trans.size:
            raise DomainError("TabulatedTransfer arrays must be 1-D and equally sized")
        if freq.size < 2:
            raise DomainError("TabulatedTransfer needs at least two grid points")
        if not np.all(np.diff(freq) > 0):
            raise DomainError("TabulatedTransfer.frequency_hz must be strictly increasing")
        if freq[0] <= 0:
            raise DomainError("TabulatedTransfer frequencies must be positive")
        if np.any(trans < 0) or np.any(trans > 1):
            raise DomainError("TabulatedTransfer.transmission values must lie in [0, 1]")


TransferFunction = Union[DeltaBand, TabulatedTransfer]


@dataclass(frozen=True)
class NoiseBudget:
    """Dark and background count rates in Hz; the total is their exact sum."""

    dark_rate: float
    background_rate: float

    def __post_init__(self) -> None:
        if self.dark_rate < 0 or self.background_rate < 0:
            raise DomainError("NoiseBudget rates must be >= 0")

    @property
    def total_rate(self) -> float:
        return self.dark_rate + self.background_rate


def mean_thermal_occupation(frequency: float, env: ThermalEnvironment) -> float:
    """Mean photon number per mode: emissivity / (exp(h nu / k T) - 1)."""
    if not frequency > 0:
        raise DomainError(f"frequency must be positive (got {frequency!r})")
    x = PLANCK * frequency / (BOLTZMANN * env.temperature)
    if x > _OCCUPATION_UNDERFLOW:
        return 0.0
    return env.emissivity / math.expm1(x)


def _occupation_grid(frequency_hz: np.ndarray, env: ThermalEnvironment) -> np.ndarray:
    x = PLANCK * frequency_hz / (BOLTZMANN * env.temperature)
    out = np.zeros_like(x)
    small = x <= _OCCUPATION_UNDERFLOW
    out[small] = env.emissivity / np.expm1(x[small])
    return out


def background_rate_delta(eta_tot: float, band: SpectralBand, env: ThermalEnvironment) -> float:
    """Background count rate (Hz) in the narrow-band approximation.

    eta_tot * width * occupation(center); exact in the limit of a band much
    narrower than its center frequency.
    """
    if not 0.0 <= eta_tot <= 1.0:
        raise DomainError(f"eta_tot must lie in [0, 1] (got {eta_tot!r})")
    if band.width == 0.0:
        return 0.0
    return eta_tot * band.width * mean_thermal_occupation(band.center_frequency, env)


def background_rate_integral(
    eta_tot: float,
    tf: TransferFunction,
    env: ThermalEnvironment,
) -> float:
    """Background count rate (Hz) by quadrature of transmission x occupation.

    Adaptive quadrature over an analytic :class:`DeltaBand`; trapezoid on
    the supplied grid for a :class:`TabulatedTransfer`. Converges to
    :func:`background_rate_delta` as the band narrows.
    """
    if not 0.0 <= eta_tot <= 1.0:
        raise DomainError(f"eta_tot must lie in [0, 1] (got {eta_tot!r})")
    if isinstance(tf, DeltaBand):
        if tf.band.width == 0.0 or tf.peak == 0.0:
            return 0.0
        value, _ = integrate.quad(
            lambda nu: tf.peak * mean_thermal_occupation(nu, env),
            tf.band.low,
            tf.band.high,
            epsabs=0.0,
            epsrel=1e-10,
        )
        return eta_tot * value
    if isinstance(tf, TabulatedTransfer):
        integrand = tf.transmission * _occupation_grid(tf.frequency_hz, env)
        return eta_tot * float(np.trapezoid(integrand, tf.frequency_hz))
    raise DomainError(f"unsupported transfer function type: {type(tf).__name__}")


def compose_noise(dark_rate: float, background_rate: float) -> NoiseBudget:
    """Total noise rate as the sum of statistically independent sources."""
    if dark_rate < 0:
        raise DomainError(f"dark_rate must be >= 0 (got {dark_rate!r})")
    if background_rate < 0:
        raise DomainError(f"background_rate must be >= 0 (got {background_rate!r})")
    return NoiseBudget(dark_rate=dark_rate, background_rate=background_rate)


def load_transfer_csv(path: str | Path) -> TabulatedTransfer:
    """Read a tabulated transfer function from a two-column CSV file.

    The header row is required and must name the columns ``frequency_hz``
    and ``transmission``.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DomainError(f"{path}: empty transfer-function file") from None
        expected = ["frequency_hz", "transmission"]
        if [h.strip().lower() for h in header] != expected:
            raise DomainError(
                f"{path}: header must be 'frequency_hz,transmission' (got {header!r})"
            )
        freqs: list[float] = []
        trans: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise DomainError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                freqs.append(float(row[0]))
                trans.append(float(row[1]))
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from None
    return TabulatedTransfer(frequency_hz=np.array(freqs), transmission=np.array(trans))
