"""Physical constants and spectral conversions.

Everything in this package computes in SI units (m, s, Hz, J, K, W).
Prefixed units such as nm, GHz or pW exist only at the I/O boundary.

Constant values are CODATA 2018; h and k are exact in the 2019 SI.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError

# Planck constant (J s)
PLANCK = 6.62607015e-34

# Speed of light in vacuum (m/s)
LIGHT_SPEED = 299_792_458.0

# Boltzmann constant (J/K)
BOLTZMANN = 1.380649e-23

# Vacuum permittivity (F/m)
VACUUM_PERMITTIVITY = 8.8541878128e-12

ABSOLUTE_ZERO_CELSIUS = -273.15


@dataclass(frozen=True)
class PhysicalConstants:
    """The fixed constant set used by every model in the package."""

    planck: float = PLANCK
    light_speed: float = LIGHT_SPEED
    boltzmann: float = BOLTZMANN
    vacuum_permittivity: float = VACUUM_PERMITTIVITY

    def __post_init__(self) -> None:
        for name in ("planck", "light_speed", "boltzmann", "vacuum_permittivity"):
            if not getattr(self, name) > 0:
                raise DomainError(f"PhysicalConstants.{name} must be positive")


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class SpectralBand:
    """A narrow optical band: center frequency and full width, both in Hz.

    A zero width is allowed as the degenerate limit of a perfectly narrow
    filter; the center must stay positive and above width/2 so the band
    never reaches non-positive frequencies.
    """

    center_frequency: float
    width: float

    def __post_init__(self) -> None:
        if self.width < 0:
            raise DomainError("SpectralBand.width must be >= 0")
        if not self.center_frequency > self.width / 2:
            raise DomainError("SpectralBand.center_frequency must exceed width/2")

    @property
    def low(self) -> float:
        return self.center_frequency - self.width / 2

    @property
    def high(self) -> float:
        return self.center_frequency + self.width / 2


def _require_positive(name: str, value: float) -> None:
    if not value > 0:
        raise DomainError(f"{name} must be positive (got {value!r})")


def wavelength_to_frequency(wavelength: float) -> float:
    """Convert a vacuum wavelength (m) to frequency (Hz)."""
    _require_positive("wavelength", wavelength)
    return LIGHT_SPEED / wavelength


def frequency_to_wavelength(frequency: float) -> float:
    """Convert a frequency (Hz) to vacuum wavelength (m)."""
    _require_positive("frequency", frequency)
    return LIGHT_SPEED / frequency


def bandwidth_wavelength_to_frequency(delta_lambda: float, center_lambda: float) -> float:
    """Convert a wavelength width (m) at a carrier (m) into a frequency width (Hz).

    First-order relation c*dl/l^2, valid for dl << l. A zero width maps to
    zero; the carrier must be positive.
    """
    if delta_lambda < 0:
        raise DomainError(f"delta_lambda must be >= 0 (got {delta_lambda!r})")
    _require_positive("center_lambda", center_lambda)
    return LIGHT_SPEED * delta_lambda / (center_lambda * center_lambda)


def bandwidth_frequency_to_wavelength(delta_nu: float, center_lambda: float) -> float:
    """Inverse of :func:`bandwidth_wavelength_to_frequency` at the same carrier."""
    if delta_nu < 0:
        raise DomainError(f"delta_nu must be >= 0 (got {delta_nu!r})")
    _require_positive("center_lambda", center_lambda)
    return delta_nu * center_lambda * center_lambda / LIGHT_SPEED


def photon_energy(wavelength: float) -> float:
    """Energy (J) of a single photon at the given vacuum wavelength (m)."""
    _require_positive("wavelength", wavelength)
    return PLANCK * LIGHT_SPEED / wavelength


def sfg_wavelength(pump_lambda: float, signal_lambda: float) -> float:
    """Sum-frequency wavelength (m) for energy-conserving three-wave mixing.

    1/lam_sum = 1/lam_pump + 1/lam_signal; always shorter than either input.
    """
    _require_positive("pump_lambda", pump_lambda)
    _require_positive("signal_lambda", signal_lambda)
    return 1.0 / (1.0 / pump_lambda + 1.0 / signal_lambda)


def celsius_to_kelvin(t: float) -> float:
    """Convert a Celsius temperature to Kelvin."""
    if t < ABSOLUTE_ZERO_CELSIUS:
        raise DomainError(f"temperature {t!r} C is below absolute zero")
    return t - ABSOLUTE_ZERO_CELSIUS


__all__ = [
    "PLANCK",
    "LIGHT_SPEED",
    "BOLTZMANN",
    "VACUUM_PERMITTIVITY",
    "ABSOLUTE_ZERO_CELSIUS",
    "PhysicalConstants",
    "CONSTANTS",
    "SpectralBand",
    "wavelength_to_frequency",
    "frequency_to_wavelength",
    "bandwidth_wavelength_to_frequency",
    "bandwidth_frequency_to_wavelength",
    "photon_energy",
    "sfg_wavelength",
    "celsius_to_kelvin",
]
