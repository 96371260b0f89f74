"""Sum-frequency conversion efficiency and efficiency-budget arithmetic.

The conversion model is the focused-Gaussian, phase-matched result for a
single crystal pass: the probability that one signal photon is converted is

    eta_sfg = 32 pi^2 d_eff^2 P_pump exp(-alpha L) L h(xi)
              / (eps0 c lam_signal^2 lam_pump n_sfg^2)

where h(xi) = arctan(xi)^2 / xi is the Boyd-Kleinman focusing factor at
zero phase mismatch and zero walk-off, and xi = L/b with b the confocal
parameter of the focused beams. The formula is perturbative: raw values
above 1 are clamped and flagged rather than returned as probabilities.

The budget side is plain arithmetic on the detection chain: the overall
quantum efficiency factorizes as eta_tot = eta_sfg * eta_opt * eta_det.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DomainError, InconsistentBudgetError
from .numerics import golden_section_maximize
from .quantities import LIGHT_SPEED, VACUUM_PERMITTIVITY

_BUDGET_RTOL = 1e-12

# Default refractive index at the sum frequency: congruent LiNbO3,
# extraordinary axis near 810 nm and room temperature (Sellmeier value
# 2.167, carried here as the configured default 2.17).
DEFAULT_N_SFG = 2.17


@dataclass(frozen=True)
class CrystalSpec:
    """Nonlinear crystal parameters, all SI.

    ``d_eff`` is the effective second-order susceptibility in m/V (the
    conventional pm/V figure divided by 1e12); ``attenuation`` is the total
    intensity attenuation coefficient for the three interacting beams in
    1/m; ``n_sfg`` is the refractive index at the sum frequency.
    """

    length: float
    d_eff: float
    attenuation: float = 0.0
    n_sfg: float = DEFAULT_N_SFG
    temperature: float = 298.15

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise DomainError("CrystalSpec.length must be positive")
        if not self.d_eff > 0:
            raise DomainError("CrystalSpec.d_eff must be positive")
        if self.attenuation < 0:
            raise DomainError("CrystalSpec.attenuation must be >= 0")
        if self.n_sfg < 1:
            raise DomainError("CrystalSpec.n_sfg must be >= 1")
        if not self.temperature > 0:
            raise DomainError("CrystalSpec.temperature must be positive")


@dataclass(frozen=True)
class PumpBeam:
    """Pump wavelength (m) and net power (W) delivered to the crystal."""

    wavelength: float
    power: float

    def __post_init__(self) -> None:
        if not self.wavelength > 0:
            raise DomainError("PumpBeam.wavelength must be positive")
        if self.power < 0:
            raise DomainError("PumpBeam.power must be >= 0")


@dataclass(frozen=True)
class SignalBeam:
    """Signal (input) wavelength in m."""

    wavelength: float

    def __post_init__(self) -> None:
        if not self.wavelength > 0:
            raise DomainError("SignalBeam.wavelength must be positive")


@dataclass(frozen=True)
class FocusingGeometry:
    """Focusing state of the interacting Gaussian beams.

    ``confocal_parameter`` is b (twice the Rayleigh range) in m and ``xi``
    the dimensionless focusing ratio L/b. Use :meth:`for_crystal` or
    :meth:`from_xi` so the two stay mutually consistent.
    """

    confocal_parameter: float
    xi: float

    def __post_init__(self) -> None:
        if not self.confocal_parameter > 0:
            raise DomainError("FocusingGeometry.confocal_parameter must be positive")
        if not self.xi > 0:
            raise DomainError("FocusingGeometry.xi must be positive")

    @classmethod
    def for_crystal(cls, crystal_length: float, confocal_parameter: float) -> "FocusingGeometry":
        if not crystal_length > 0:
            raise DomainError("crystal_length must be positive")
        if not confocal_parameter > 0:
            raise DomainError("confocal_parameter must be positive")
        return cls(confocal_parameter=confocal_parameter, xi=crystal_length / confocal_parameter)

    @classmethod
    def from_xi(cls, crystal_length: float, xi: float) -> "FocusingGeometry":
        if not crystal_length > 0:
            raise DomainError("crystal_length must be positive")
        if not xi > 0:
            raise DomainError("xi must be positive")
        return cls(confocal_parameter=crystal_length / xi, xi=xi)


@dataclass(frozen=True)
class EfficiencyBudget:
    """Conversion / optics / detector efficiency chain and its product."""

    eta_sfg: float
    eta_opt: float
    eta_det: float
    eta_tot: float

    def __post_init__(self) -> None:
        for name in ("eta_sfg", "eta_opt", "eta_det", "eta_tot"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"EfficiencyBudget.{name} must lie in [0, 1] (got {value!r})")
        product = self.eta_sfg * self.eta_opt * self.eta_det
        if not math.isclose(self.eta_tot, product, rel_tol=_BUDGET_RTOL, abs_tol=0.0):
            raise InconsistentBudgetError(
                f"eta_tot={self.eta_tot!r} does not equal eta_sfg*eta_opt*eta_det={product!r}"
            )


class SfgEfficiency(NamedTuple):
    """Conversion probability plus an out-of-validity flag.

    ``clamped`` is True when the perturbative formula produced a raw value
    above 1 and the result was clipped to 1.
    """

    value: float
    clamped: bool


class OptimalFocus(NamedTuple):
    xi_star: float
    h_star: float


def boyd_kleinman_h(xi: float) -> float:
    """Focusing factor h(xi) = arctan(xi)^2 / xi for zero phase mismatch.

    Equivalent to (1/4 xi) |Integral_{-xi}^{xi} dt/(1+it)|^2 evaluated in
    closed form. Rises like xi for weak focusing, peaks near xi = 1.392,
    and decays like (pi/2)^2/xi for tight focusing.
    """
    if not xi > 0:
        raise DomainError(f"xi must be positive (got {xi!r})")
    a = math.atan(xi)
    return a * a / xi


def optimal_focusing(xatol: float = 1e-9) -> OptimalFocus:
    """Maximizer of :func:`boyd_kleinman_h` and its value.

    Golden-section search on a bracket comfortably containing the single
    interior maximum; ``xatol`` is the absolute tolerance on xi.
    """
    xi_star, h_star = golden_section_maximize(boyd_kleinman_h, 1e-4, 100.0, xatol=xatol)
    return OptimalFocus(xi_star=xi_star, h_star=h_star)


def sfg_quantum_efficiency(
    crystal: CrystalSpec,
    pump: PumpBeam,
    signal: SignalBeam,
    h: float,
) -> SfgEfficiency:
    """Single-photon conversion probability for the given configuration.

    ``h`` is the focusing factor, normally ``boyd_kleinman_h(xi)`` of the
    actual geometry; values up to 1.1 are accepted to leave headroom for
    externally supplied factors. The raw perturbative value is clamped to
    [0, 1]; the ``clamped`` flag marks configurations that left the
    formula's domain of validity.
    """
    if not 0.0 < h <= 1.1:
        raise DomainError(f"focusing factor h must lie in (0, 1.1] (got {h!r})")
    raw = (
        32.0
        * math.pi**2
        * crystal.d_eff**2
        * pump.power
        * math.exp(-crystal.attenuation * crystal.length)
        * crystal.length
        * h
    ) / (
        VACUUM_PERMITTIVITY
        * LIGHT_SPEED
        * signal.wavelength**2
        * pump.wavelength
        * crystal.n_sfg**2
    )
    if raw > 1.0:
        return SfgEfficiency(value=1.0, clamped=True)
    return SfgEfficiency(value=raw, clamped=False)


def compose_budget(eta_sfg: float, eta_opt: float, eta_det: float) -> EfficiencyBudget:
    """Build the efficiency budget with eta_tot as the product of the three."""
    for name, value in (("eta_sfg", eta_sfg), ("eta_opt", eta_opt), ("eta_det", eta_det)):
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1] (got {value!r})")
    return EfficiencyBudget(
        eta_sfg=eta_sfg,
        eta_opt=eta_opt,
        eta_det=eta_det,
        eta_tot=eta_sfg * eta_opt * eta_det,
    )


def infer_sfg_efficiency(eta_tot: float, eta_opt: float, eta_det: float) -> float:
    """Recover eta_sfg = eta_tot / (eta_opt * eta_det) from measured factors."""
    for name, value in (("eta_opt", eta_opt), ("eta_det", eta_det)):
        if not 0.0 < value <= 1.0:
            raise DomainError(f"{name} must lie in (0, 1] (got {value!r})")
    if eta_tot < 0:
        raise DomainError(f"eta_tot must be >= 0 (got {eta_tot!r})")
    eta_sfg = eta_tot / (eta_opt * eta_det)
    if eta_sfg > 1.0:
        raise InconsistentBudgetError(
            f"eta_tot={eta_tot!r} exceeds eta_opt*eta_det={eta_opt * eta_det!r}; "
            "implied eta_sfg is above 1"
        )
    return eta_sfg


def per_watt_efficiency(eta_sfg: float, pump_power: float) -> float:
    """Conversion efficiency normalized to pump power, in 1/W."""
    if not pump_power > 0:
        raise DomainError(f"pump_power must be positive (got {pump_power!r})")
    if eta_sfg < 0:
        raise DomainError(f"eta_sfg must be >= 0 (got {eta_sfg!r})")
    return eta_sfg / pump_power


def theory_gap(theory_per_watt: float, measured_per_watt: float) -> float:
    """Ratio of predicted to measured per-watt conversion efficiency."""
    if not theory_per_watt > 0:
        raise DomainError(f"theory_per_watt must be positive (got {theory_per_watt!r})")
    if not measured_per_watt > 0:
        raise DomainError(f"measured_per_watt must be positive (got {measured_per_watt!r})")
    return theory_per_watt / measured_per_watt
