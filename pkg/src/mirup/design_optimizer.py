"""Scenario evaluation, parameter sweeps and detector-design optimization.

A :class:`Scenario` carries everything needed to run the model chain
(conversion efficiency -> thermal background -> sensitivity) for one
detector configuration. Sweeps re-evaluate the chain along a grid of one
scenario parameter; the optimizers search the crystal-length trade-off
between conversion gain (longer crystal) and absorption plus defocusing
(shorter crystal).

All searches are deterministic golden-section runs; repeated calls with
identical inputs return bit-identical results.
"""

from __future__ import annotations

import csv
import io
import math
import numbers
from dataclasses import dataclass, fields, is_dataclass, replace
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError, DomainError, NoInteriorOptimumError
from .numerics import golden_section_maximize
from .quantities import photon_energy
from .radiometry import (
    DeltaBand,
    NoiseBudget,
    TabulatedTransfer,
    ThermalEnvironment,
    background_rate_delta,
    background_rate_integral,
)
from .sensitivity import DetectorSpec, sensitivity_floor, snr0
from .upconversion import (
    CrystalSpec,
    FocusingGeometry,
    PumpBeam,
    SignalBeam,
    boyd_kleinman_h,
    sfg_quantum_efficiency,
)

DEFAULT_MAX_LENGTH = 0.1  # m; generous upper bracket for crystal-length searches


@dataclass(frozen=True)
class Scenario:
    """One fully specified detector configuration.

    ``environment_tracks_crystal`` marks scenarios whose thermal emitter is
    the crystal itself: evaluation then reads the temperature from
    ``crystal.temperature`` (keeping only the environment's emissivity), so
    temperature sweeps on the crystal move the background accordingly.
    ``excess_background_hz`` is an additive catch-all for background that
    the thermal model does not cover (for example pump leakage through the
    filter stack).
    """

    crystal: CrystalSpec
    pump: PumpBeam
    signal: SignalBeam
    focusing: FocusingGeometry
    filters: Union[DeltaBand, TabulatedTransfer]
    environment: ThermalEnvironment
    detector: DetectorSpec
    eta_opt: float
    excess_background_hz: float = 0.0
    environment_tracks_crystal: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta_opt <= 1.0:
            raise DomainError("Scenario.eta_opt must lie in [0, 1]")
        if self.excess_background_hz < 0:
            raise DomainError("Scenario.excess_background_hz must be >= 0")

    def effective_environment(self) -> ThermalEnvironment:
        if self.environment_tracks_crystal:
            return ThermalEnvironment(
                temperature=self.crystal.temperature,
                emissivity=self.environment.emissivity,
            )
        return self.environment


@dataclass(frozen=True)
class ScenarioEvaluation:
    """Model-chain outputs for one scenario: efficiencies, noise, SNR0."""

    xi: float
    h: float
    eta_sfg: float
    eta_tot: float
    background_rate: float
    noise: NoiseBudget
    snr0: float
    floor: float
    clamped: bool
    flags: tuple[str, ...]


@dataclass(frozen=True)
class SweepRow:
    value: float
    eta_sfg: float
    eta_tot: float
    background_rate: float
    snr0: float
    flags: tuple[str, ...]


@dataclass(frozen=True)
class SweepResult:
    """Per-point chain outputs along a grid; rows follow grid order."""

    parameter: str
    rows: tuple[SweepRow, ...]

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(row.value for row in self.rows)


@dataclass(frozen=True)
class TradeoffPoint:
    power: float
    eta_tot: float
    snr0: float
    flags: tuple[str, ...]


@dataclass(frozen=True)
class JointLengthOptimum:
    """Result of the joint length/focusing search.

    ``interior=False`` marks a boundary solution (no interior optimum in
    the searched interval; with zero absorption the objective grows
    monotonically toward the bracket end).
    """

    length: float
    objective: float
    interior: bool


def evaluate_scenario(scenario: Scenario) -> ScenarioEvaluation:
    """Run the full model chain for one scenario.

    The focusing ratio is re-derived from the crystal length and the
    confocal parameter (the lens system fixes b, not xi), so sweeps over
    the length implicitly refocus.
    """
    xi = scenario.crystal.length / scenario.focusing.confocal_parameter
    h = boyd_kleinman_h(xi)
    conv = sfg_quantum_efficiency(scenario.crystal, scenario.pump, scenario.signal, h)
    eta_tot = conv.value * scenario.eta_opt * scenario.detector.eta_det
    env = scenario.effective_environment()

    if isinstance(scenario.filters, DeltaBand):
        band = scenario.filters.band
        background = scenario.filters.peak * background_rate_delta(eta_tot, band, env)
        floor = scenario.filters.peak * sensitivity_floor(
            scenario.signal.wavelength, band, env
        )
    else:
        background = background_rate_integral(eta_tot, scenario.filters, env)
        floor = photon_energy(scenario.signal.wavelength) * background_rate_integral(
            1.0, scenario.filters, env
        )
    background += scenario.excess_background_hz
    noise = NoiseBudget(dark_rate=scenario.detector.dark_rate, background_rate=background)

    flags: list[str] = []
    if conv.clamped:
        flags.append("eta_sfg_clamped")
    if eta_tot > 0:
        snr = snr0(scenario.signal.wavelength, eta_tot, noise)
    else:
        snr = math.inf
        flags.append("undetectable")
    return ScenarioEvaluation(
        xi=xi,
        h=h,
        eta_sfg=conv.value,
        eta_tot=eta_tot,
        background_rate=background,
        noise=noise,
        snr0=snr,
        floor=floor,
        clamped=conv.clamped,
        flags=tuple(flags),
    )


def optimal_length_fixed_focus(attenuation: float) -> float:
    """Crystal length maximizing exp(-alpha L) * L at fixed focusing: 1/alpha."""
    if attenuation < 0:
        raise DomainError(f"attenuation must be >= 0 (got {attenuation!r})")
    if attenuation == 0:
        raise NoInteriorOptimumError(
            "with zero attenuation the conversion gain grows without bound in L; "
            "no interior optimum exists"
        )
    return 1.0 / attenuation


def optimal_length_joint(
    attenuation: float,
    confocal_parameter: float,
    l_max: float = DEFAULT_MAX_LENGTH,
    xatol: float = 1e-9,
) -> JointLengthOptimum:
    """Maximize exp(-alpha L) * L * h(L/b) over L in (0, l_max].

    The objective is unimodal (log-concave in L), so a golden-section
    search suffices. With alpha = 0 it reduces to b * arctan(L/b)^2,
    monotone increasing, and the boundary l_max is returned flagged as a
    non-interior solution.
    """
    if attenuation < 0:
        raise DomainError(f"attenuation must be >= 0 (got {attenuation!r})")
    if not confocal_parameter > 0:
        raise DomainError(f"confocal_parameter must be positive (got {confocal_parameter!r})")
    if not l_max > 0:
        raise DomainError(f"l_max must be positive (got {l_max!r})")

    def objective(length: float) -> float:
        return (
            math.exp(-attenuation * length)
            * length
            * boyd_kleinman_h(length / confocal_parameter)
        )

    if attenuation == 0:
        return JointLengthOptimum(length=l_max, objective=objective(l_max), interior=False)
    length, value = golden_section_maximize(objective, l_max * 1e-9, l_max, xatol=xatol)
    interior = (l_max - length) > 10 * xatol
    return JointLengthOptimum(length=length, objective=value, interior=interior)


def set_parameter(scenario: Scenario, path: str, value: float) -> Scenario:
    """Return a copy of the scenario with one numeric field replaced.

    ``path`` is a dotted attribute path such as ``pump.power`` or
    ``crystal.temperature``. Setting ``environment.*`` detaches the
    environment from the crystal temperature.
    """
    parts = path.split(".")
    if not all(parts):
        raise ConfigError(f"malformed parameter path {path!r}")
    if not isinstance(value, numbers.Real):
        raise ConfigError(f"parameter {path!r} needs a numeric value (got {value!r})")
    updated = _replace_path(scenario, parts, float(value), path)
    if parts[0] == "environment" and scenario.environment_tracks_crystal:
        updated = replace(updated, environment_tracks_crystal=False)
    return updated


def _replace_path(obj, parts: list[str], value: float, full_path: str):
    name = parts[0]
    if not is_dataclass(obj) or name not in {f.name for f in fields(obj)}:
        raise ConfigError(f"unknown parameter path {full_path!r}")
    current = getattr(obj, name)
    if len(parts) == 1:
        if not isinstance(current, numbers.Real) or isinstance(current, bool):
            raise ConfigError(f"parameter path {full_path!r} is not a numeric field")
        return replace(obj, **{name: value})
    return replace(obj, **{name: _replace_path(current, parts[1:], value, full_path)})


def sweep(scenario: Scenario, parameter: str, grid: Sequence[float]) -> SweepResult:
    """Evaluate the model chain at each grid value of one parameter.

    Pure with respect to the input scenario; rows are ordered by grid
    index. Points where the conversion formula left its validity range
    arrive flagged, not silently clamped away.
    """
    if len(grid) == 0:
        raise DomainError("sweep grid must not be empty")
    rows = []
    for value in grid:
        ev = evaluate_scenario(set_parameter(scenario, parameter, value))
        rows.append(
            SweepRow(
                value=float(value),
                eta_sfg=ev.eta_sfg,
                eta_tot=ev.eta_tot,
                background_rate=ev.background_rate,
                snr0=ev.snr0,
                flags=ev.flags,
            )
        )
    return SweepResult(parameter=parameter, rows=tuple(rows))


def pump_power_tradeoff(scenario: Scenario, powers: Sequence[float]) -> list[TradeoffPoint]:
    """Efficiency/sensitivity trade-off along a pump-power grid.

    More pump power buys overall efficiency linearly while SNR0 falls
    toward the background-dominated floor.
    """
    for p in powers:
        if not p > 0:
            raise DomainError(f"pump powers must be positive (got {p!r})")
    result = sweep(scenario, "pump.power", powers)
    return [
        TradeoffPoint(power=row.value, eta_tot=row.eta_tot, snr0=row.snr0, flags=row.flags)
        for row in result.rows
    ]


def grid_search_length(
    attenuation: float,
    confocal_parameter: float,
    l_max: float = DEFAULT_MAX_LENGTH,
    n_points: int = 10_000,
) -> tuple[float, float]:
    """Brute-force reference for :func:`optimal_length_joint`."""
    lengths = np.linspace(l_max / n_points, l_max, n_points)
    best_l, best_v = lengths[0], -math.inf
    for length in lengths:
        v = (
            math.exp(-attenuation * length)
            * length
            * boyd_kleinman_h(length / confocal_parameter)
        )
        if v > best_v:
            best_l, best_v = float(length), v
    return best_l, best_v


def export_sweep_csv(result: SweepResult, destination: str | Path | io.TextIOBase) -> None:
    """Write sweep rows as CSV: value (SI), efficiencies, n_bg_hz, snr0_pw, flags."""
    if isinstance(destination, (str, Path)):
        with open(destination, "w", newline="") as fh:
            _write_sweep(result, fh)
    else:
        _write_sweep(result, destination)


def _write_sweep(result: SweepResult, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["parameter", "value", "eta_sfg", "eta_tot", "n_bg_hz", "snr0_pw", "flags"])
    for row in result.rows:
        writer.writerow(
            [
                result.parameter,
                f"{row.value:.9g}",
                f"{row.eta_sfg:.9g}",
                f"{row.eta_tot:.9g}",
                f"{row.background_rate:.9g}",
                f"{row.snr0 * 1e12:.9g}",
                ";".join(row.flags),
            ]
        )
