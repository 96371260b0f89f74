"""Command-line workbench: scenario files in, reports and CSV out.

Scenario files are TOML with the sections crystal, pump, signal, focusing,
filters, environment, optics, detector, measured, simulation and tac; all
fields carry explicit unit suffixes (nm, mW, GHz, ...) and every omitted
field falls back to the bundled 25 C reference configuration. Reports go
out as human-readable text, schema-stable JSON, or CSV for the tabular
payloads (sweeps, histograms, detector comparisons).

Exit codes: 0 success, 2 configuration error, 3 domain error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import math
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__
from .counting_sim import (
    RNG_ALGORITHM,
    DetectionChainSpec,
    PulseTrainSpec,
    TacConfig,
    expected_detection_rate,
    histogram_from_delays,
    histogram_fwhm,
    periodic_sync_delays,
    simulate_run,
)
from .design_optimizer import (
    Scenario,
    SweepResult,
    evaluate_scenario,
    optimal_length_fixed_focus,
    optimal_length_joint,
    sweep,
)
from .errors import ConfigError, DomainError
from .quantities import SpectralBand, celsius_to_kelvin, wavelength_to_frequency
from .radiometry import (
    DeltaBand,
    NoiseBudget,
    ThermalEnvironment,
    background_rate_delta,
    load_transfer_csv,
    mean_thermal_occupation,
)
from .sensitivity import (
    DetectorSpec,
    bundled_catalog,
    compare_detectors,
    load_catalog_csv,
    sensitivity_report,
)
from .sensitivity import snr0 as compute_snr0
from .upconversion import (
    CrystalSpec,
    FocusingGeometry,
    PumpBeam,
    SignalBeam,
    compose_budget,
    infer_sfg_efficiency,
    optimal_focusing,
    per_watt_efficiency,
    theory_gap,
)

COMMANDS = ("efficiency", "noise", "sensitivity", "simulate", "optimize", "compare")

BUNDLED_SCENARIOS = ("paper_25C", "paper_93C")


@dataclass(frozen=True)
class MeasuredBudget:
    """Optional calibration block of a scenario file."""

    eta_tot: float | None = None
    background_rate: float | None = None
    reported_snr0: float | None = None


@dataclass(frozen=True)
class WorkbenchConfig:
    """A fully resolved scenario file."""

    label: str
    scenario: Scenario
    pulses: PulseTrainSpec
    duration: float
    seed: int | None
    sync_delay: float
    tac: TacConfig
    measured: MeasuredBudget
    echo: dict
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class Options:
    """Per-invocation knobs that are not part of the scenario file."""

    seed: int | None = None
    duration: float | None = None
    sweep_path: str | None = None
    sweep_grid: tuple[float, ...] | None = None
    catalog: str | None = None


@dataclass
class Report:
    """Self-contained command output: echo of inputs, results, provenance."""

    command: str
    label: str
    inputs: dict
    results: dict
    notes: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    text_sections: list[tuple[str, list[tuple[str, str]]]] = field(default_factory=list)
    tabular: tuple[list[str], list[list]] | None = None

    def to_json_dict(self) -> dict:
        return {
            "command": self.command,
            "label": self.label,
            "inputs": self.inputs,
            "results": self.results,
            "notes": list(self.notes),
            "warnings": list(self.warnings),
            "provenance": self.provenance,
        }

    def text_lines(self) -> list[str]:
        lines = [f"mirup {self.command} -- scenario {self.label}"]
        for heading, rows in self.text_sections:
            lines.append("")
            lines.append(f"[{heading}]")
            width = max((len(name) for name, _ in rows), default=0)
            for name, value in rows:
                lines.append(f"  {name.ljust(width)}  {value}")
        if self.warnings:
            lines.append("")
            lines.extend(f"warning: {w}" for w in self.warnings)
        if self.notes:
            lines.append("")
            lines.extend(f"note: {n}" for n in self.notes)
        lines.append("")
        lines.append(
            f"provenance: mirup {self.provenance.get('version', '?')}"
            + (f", seed {self.provenance['seed']}" if self.provenance.get("seed") is not None else "")
            + f", {self.provenance.get('timestamp', '')}"
        )
        return lines


# ---------------------------------------------------------------------------
# scenario file parsing


class _Section:
    """Typed, validating view of one TOML table; records resolved values."""

    def __init__(self, name: str, data: dict, echo: dict, issues: list[str]):
        self.name = name
        self.data = dict(data)
        self.echo: dict[str, Any] = {}
        echo[name] = self.echo
        self.issues = issues

    def _get(self, key: str, default):
        return self.data.pop(key, default)

    def take_number(
        self,
        key: str,
        default: float | None,
        minimum: float | None = None,
        maximum: float | None = None,
        exclusive_min: bool = False,
        required: bool = False,
    ) -> float | None:
        raw = self._get(key, None)
        if raw is None:
            if required:
                raise ConfigError(f"{self.name}.{key}: required field is missing")
            value = default
        else:
            if isinstance(raw, bool) or not isinstance(raw, (int, float)):
                raise ConfigError(f"{self.name}.{key}: expected a number (got {raw!r})")
            value = float(raw)
        if value is None:
            return None
        if minimum is not None:
            if exclusive_min and not value > minimum:
                raise ConfigError(f"{self.name}.{key}: must be > {minimum} (got {value})")
            if not exclusive_min and value < minimum:
                raise ConfigError(f"{self.name}.{key}: must be >= {minimum} (got {value})")
        if maximum is not None and value > maximum:
            raise ConfigError(f"{self.name}.{key}: must be <= {maximum} (got {value})")
        self.echo[key] = value
        return value

    def take_int(self, key: str, default: int | None) -> int | None:
        raw = self._get(key, None)
        if raw is None:
            value = default
        elif isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{self.name}.{key}: expected an integer (got {raw!r})")
        else:
            value = raw
        if value is not None:
            self.echo[key] = value
        return value

    def take_choice(self, key: str, default: str, choices: Sequence[str]) -> str:
        raw = self._get(key, default)
        if raw not in choices:
            raise ConfigError(
                f"{self.name}.{key}: must be one of {list(choices)} (got {raw!r})"
            )
        self.echo[key] = raw
        return raw

    def take_string(self, key: str, default: str | None) -> str | None:
        raw = self._get(key, default)
        if raw is not None and not isinstance(raw, str):
            raise ConfigError(f"{self.name}.{key}: expected a string (got {raw!r})")
        if raw is not None:
            self.echo[key] = raw
        return raw

    def take_pair(self, key: str, default: tuple[float, float]) -> tuple[float, float]:
        raw = self._get(key, None)
        if raw is None:
            value = default
        else:
            if (
                not isinstance(raw, (list, tuple))
                or len(raw) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in raw)
            ):
                raise ConfigError(f"{self.name}.{key}: expected a pair of numbers (got {raw!r})")
            value = (float(raw[0]), float(raw[1]))
        self.echo[key] = list(value)
        return value

    def finish(self) -> None:
        for key in self.data:
            self.issues.append(f"unknown key {self.name}.{key}")


_KNOWN_SECTIONS = (
    "crystal",
    "pump",
    "signal",
    "focusing",
    "filters",
    "environment",
    "optics",
    "detector",
    "measured",
    "simulation",
    "tac",
)


def load_scenario(source: str | Path, strict: bool = False) -> WorkbenchConfig:
    """Load and validate a scenario file (path or bundled name).

    Unknown keys are collected as warnings, or rejected outright with
    ``strict=True``. Every validation failure names the offending field.
    """
    label, text, base_dir = _read_scenario_text(source)
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{label}: TOML parse error: {exc}") from None
    if not isinstance(document, dict) or not document:
        raise ConfigError(f"{label}: no scenario sections found")
    if not any(key in _KNOWN_SECTIONS for key in document):
        raise ConfigError(
            f"{label}: no recognizable scenario sections (found {sorted(document)}, "
            f"expected some of {_KNOWN_SECTIONS})"
        )
    return _build_config(label, document, strict, base_dir)


def _read_scenario_text(source: str | Path) -> tuple[str, str, Path | None]:
    path = Path(source)
    if path.exists():
        try:
            return path.stem, path.read_text(), path.parent
        except OSError as exc:
            raise ConfigError(f"cannot read scenario file {path}: {exc}") from None
    name = str(source)
    if name in BUNDLED_SCENARIOS:
        text = resources.files("mirup.data").joinpath(f"{name}.toml").read_text()
        return name, text, None
    raise ConfigError(
        f"scenario {source!r} is neither an existing file nor a bundled name "
        f"(bundled: {', '.join(BUNDLED_SCENARIOS)})"
    )


def _build_config(
    label: str, document: dict, strict: bool, base_dir: Path | None = None
) -> WorkbenchConfig:
    issues: list[str] = []
    echo: dict[str, Any] = {}
    for key in document:
        if key not in _KNOWN_SECTIONS:
            issues.append(f"unknown section [{key}]")

    def section(name: str) -> _Section:
        data = document.get(name, {})
        if not isinstance(data, dict):
            raise ConfigError(f"[{name}] must be a table")
        return _Section(name, data, echo, issues)

    sec = section("crystal")
    length = sec.take_number("length_mm", 10.0, minimum=0.0, exclusive_min=True) * 1e-3
    d_eff = sec.take_number("d_eff_pm_per_v", 16.0, minimum=0.0, exclusive_min=True) * 1e-12
    absorption = sec.take_number("absorption_fraction", None, minimum=0.0, maximum=0.999999)
    attenuation = sec.take_number("attenuation_per_m", None, minimum=0.0)
    if absorption is not None and attenuation is not None:
        raise ConfigError(
            "crystal.absorption_fraction and crystal.attenuation_per_m are mutually exclusive"
        )
    if attenuation is None:
        if absorption is None:
            absorption = 0.40
            sec.echo["absorption_fraction"] = absorption
        attenuation = -math.log(1.0 - absorption) / length
    n_sfg = sec.take_number("n_sfg", 2.17, minimum=1.0)
    temp_c = sec.take_number("temperature_c", 25.0, minimum=-273.15)
    sec.finish()
    crystal = CrystalSpec(
        length=length,
        d_eff=d_eff,
        attenuation=attenuation,
        n_sfg=n_sfg,
        temperature=celsius_to_kelvin(temp_c),
    )

    sec = section("pump")
    pump = PumpBeam(
        wavelength=sec.take_number("wavelength_nm", 980.0, minimum=0.0, exclusive_min=True) * 1e-9,
        power=sec.take_number("power_mw", 63.0, minimum=0.0) * 1e-3,
    )
    sec.finish()

    sec = section("signal")
    signal = SignalBeam(
        wavelength=sec.take_number("wavelength_um", 4.65, minimum=0.0, exclusive_min=True) * 1e-6
    )
    sec.finish()

    sec = section("focusing")
    confocal_mm = sec.take_number("confocal_parameter_mm", None, minimum=0.0, exclusive_min=True)
    xi = sec.take_number("xi", None, minimum=0.0, exclusive_min=True)
    sec.finish()
    if confocal_mm is not None and xi is not None:
        raise ConfigError("focusing.confocal_parameter_mm and focusing.xi are mutually exclusive")
    if confocal_mm is not None:
        focusing = FocusingGeometry.for_crystal(crystal.length, confocal_mm * 1e-3)
    else:
        if xi is None:
            xi = optimal_focusing().xi_star
            echo["focusing"]["xi"] = xi
        focusing = FocusingGeometry.from_xi(crystal.length, xi)

    sec = section("filters")
    bandwidth_ghz = sec.take_number("bandwidth_ghz", 160.0, minimum=0.0)
    center_um = sec.take_number("center_wavelength_um", None, minimum=0.0, exclusive_min=True)
    peak = sec.take_number("peak_transmission", 1.0, minimum=0.0, maximum=1.0)
    table_csv = sec.take_string("table_csv", None)
    sec.finish()
    if table_csv is not None:
        table_path = Path(table_csv)
        if not table_path.is_absolute() and base_dir is not None:
            table_path = base_dir / table_path  # relative to the scenario file
        try:
            filters = load_transfer_csv(table_path)
        except (DomainError, OSError) as exc:
            raise ConfigError(f"filters.table_csv: {exc}") from None
    else:
        center_lambda = center_um * 1e-6 if center_um is not None else signal.wavelength
        if center_um is None:
            echo["filters"]["center_wavelength_um"] = signal.wavelength * 1e6
        band = SpectralBand(
            center_frequency=wavelength_to_frequency(center_lambda),
            width=bandwidth_ghz * 1e9,
        )
        filters = DeltaBand(band=band, peak=peak)

    sec = section("environment")
    env_temp_c = sec.take_number("temperature_c", None, minimum=-273.15)
    emissivity = sec.take_number("emissivity", 1.0, minimum=0.0, maximum=1.0)
    excess = sec.take_number("excess_background_hz", 0.0, minimum=0.0)
    sec.finish()
    tracks = env_temp_c is None
    env_temperature = crystal.temperature if tracks else celsius_to_kelvin(env_temp_c)
    environment = ThermalEnvironment(temperature=env_temperature, emissivity=emissivity)

    sec = section("optics")
    eta_opt = sec.take_number("eta_opt", 0.137, minimum=0.0, maximum=1.0)
    sec.finish()

    sec = section("detector")
    detector = DetectorSpec(
        eta_det=sec.take_number("eta_det", 0.52, minimum=0.0, maximum=1.0),
        dark_rate=sec.take_number("dark_rate_hz", 55.0, minimum=0.0),
        jitter_fwhm=sec.take_number("jitter_fwhm_ns", 0.3, minimum=0.0) * 1e-9,
        dead_time=sec.take_number("dead_time_ns", 0.0, minimum=0.0) * 1e-9,
    )
    sec.finish()

    sec = section("measured")
    measured = MeasuredBudget(
        eta_tot=sec.take_number("eta_tot", None, minimum=0.0, maximum=1.0),
        background_rate=sec.take_number("background_rate_hz", None, minimum=0.0),
        reported_snr0=sec.take_number("reported_snr0_pw", None, minimum=0.0, exclusive_min=True),
    )
    sec.finish()
    if measured.reported_snr0 is not None:
        measured = replace(measured, reported_snr0=measured.reported_snr0 * 1e-12)

    sec = section("simulation")
    rep_rate = sec.take_number("rep_rate_khz", 750.0, minimum=0.0, exclusive_min=True) * 1e3
    pulse_width = sec.take_number("pulse_width_ns", 1.0, minimum=0.0, exclusive_min=True) * 1e-9
    mu = sec.take_number("mean_photons_per_pulse", 1.0, minimum=0.0)
    shape = sec.take_choice("pulse_shape", "rectangular", ("rectangular", "gaussian"))
    statistics = sec.take_choice("statistics", "poissonian", ("poissonian", "thermal"))
    duration = sec.take_number("duration_s", 60.0, minimum=0.0, exclusive_min=True)
    seed = sec.take_int("seed", None)
    sync_delay = sec.take_number("sync_delay_ns", 10.0, minimum=0.0) * 1e-9
    sec.finish()
    try:
        pulses = PulseTrainSpec(
            rep_rate=rep_rate,
            pulse_width=pulse_width,
            mean_photons_per_pulse=mu,
            pulse_shape=shape,
            statistics=statistics,
        )
    except DomainError as exc:
        raise ConfigError(f"simulation: {exc}") from None

    sec = section("tac")
    bin_width = sec.take_number("bin_width_ns", 0.05, minimum=0.0, exclusive_min=True) * 1e-9
    window_ns = sec.take_pair("window_ns", (-12.0, -6.0))
    sec.finish()
    try:
        tac = TacConfig(bin_width=bin_width, window=(window_ns[0] * 1e-9, window_ns[1] * 1e-9))
    except DomainError as exc:
        raise ConfigError(f"tac: {exc}") from None

    if strict and issues:
        raise ConfigError(f"{label}: " + "; ".join(issues))

    scenario = Scenario(
        crystal=crystal,
        pump=pump,
        signal=signal,
        focusing=focusing,
        filters=filters,
        environment=environment,
        detector=detector,
        eta_opt=eta_opt,
        excess_background_hz=excess,
        environment_tracks_crystal=tracks,
    )
    return WorkbenchConfig(
        label=label,
        scenario=scenario,
        pulses=pulses,
        duration=duration,
        seed=seed,
        sync_delay=sync_delay,
        tac=tac,
        measured=measured,
        echo=echo,
        warnings=tuple(issues),
    )


# ---------------------------------------------------------------------------
# command implementations


def _fmt(value: float, unit: str, digits: int = 6) -> str:
    if math.isinf(value):
        return f"inf {unit}".strip()
    return f"{value:.{digits}g} {unit}".strip()


def _new_report(command: str, config: WorkbenchConfig, seed: int | None = None) -> Report:
    return Report(
        command=command,
        label=config.label,
        inputs=config.echo,
        results={},
        warnings=list(config.warnings),
        provenance={
            "tool": "mirup",
            "version": __version__,
            "seed": seed,
            "rng": RNG_ALGORITHM if seed is not None else None,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        },
    )


def _model_band(scenario: Scenario) -> SpectralBand | None:
    if isinstance(scenario.filters, DeltaBand):
        return scenario.filters.band
    return None


def _cmd_efficiency(config: WorkbenchConfig, options: Options) -> Report:
    report = _new_report("efficiency", config)
    s = config.scenario
    ev = evaluate_scenario(s)
    lossless = replace(s, crystal=replace(s.crystal, attenuation=0.0))
    ev0 = evaluate_scenario(lossless)
    per_watt_theory = per_watt_efficiency(ev0.eta_sfg, s.pump.power)

    report.results["xi"] = ev.xi
    report.results["boyd_kleinman_h"] = ev.h
    report.results["eta_sfg_theory"] = ev.eta_sfg
    report.results["eta_sfg_theory_lossless"] = ev0.eta_sfg
    report.results["per_watt_theory_lossless_per_w"] = per_watt_theory
    report.results["eta_tot_model"] = ev.eta_tot
    rows = [
        ("xi", _fmt(ev.xi, "(dimensionless)")),
        ("boyd_kleinman_h", _fmt(ev.h, "(dimensionless)")),
        ("eta_sfg_theory", _fmt(ev.eta_sfg, "(probability)")),
        ("eta_sfg_theory_lossless", _fmt(ev0.eta_sfg, "(probability)")),
        ("per_watt_theory_lossless", _fmt(per_watt_theory, "/W")),
        ("eta_tot_model", _fmt(ev.eta_tot, "(probability)")),
    ]
    if ev.clamped:
        report.warnings.append(
            "conversion formula left its validity range; eta_sfg clamped to 1"
        )

    m = config.measured
    if m.eta_tot is not None:
        eta_sfg_measured = infer_sfg_efficiency(m.eta_tot, s.eta_opt, s.detector.eta_det)
        budget = compose_budget(eta_sfg_measured, s.eta_opt, s.detector.eta_det)
        per_watt_measured = per_watt_efficiency(eta_sfg_measured, s.pump.power)
        gap = theory_gap(per_watt_theory, per_watt_measured)
        report.results["eta_tot_measured"] = m.eta_tot
        report.results["eta_sfg_measured"] = eta_sfg_measured
        report.results["per_watt_measured_per_w"] = per_watt_measured
        report.results["theory_gap"] = gap
        rows += [
            ("eta_tot_measured", _fmt(m.eta_tot, "(probability)")),
            ("eta_opt", _fmt(budget.eta_opt, "(probability)")),
            ("eta_det", _fmt(budget.eta_det, "(probability)")),
            ("eta_sfg_measured", _fmt(eta_sfg_measured, "(probability)")),
            ("per_watt_measured", _fmt(per_watt_measured, "/W")),
            ("theory_gap", _fmt(gap, "x")),
        ]
        report.notes.append(
            "theory_gap compares the lossless per-watt prediction with the measured "
            "per-watt conversion efficiency; crystal absorption and imperfect overlap "
            "account for the difference"
        )
    else:
        report.notes.append("no [measured] block: theory-only report")
    report.text_sections.append(("efficiency", rows))
    return report


def _cmd_noise(config: WorkbenchConfig, options: Options) -> Report:
    report = _new_report("noise", config)
    s = config.scenario
    env = s.effective_environment()
    ev = evaluate_scenario(s)
    band = _model_band(s)

    rows = [
        ("temperature", _fmt(env.temperature, "K")),
        ("emissivity", _fmt(env.emissivity, "(dimensionless)")),
    ]
    report.results["temperature_k"] = env.temperature
    report.results["emissivity"] = env.emissivity
    if band is not None:
        occupation = mean_thermal_occupation(band.center_frequency, env)
        report.results["center_frequency_hz"] = band.center_frequency
        report.results["bandwidth_hz"] = band.width
        report.results["mean_thermal_occupation"] = occupation
        rows += [
            ("center_frequency", _fmt(band.center_frequency, "Hz")),
            ("bandwidth", _fmt(band.width, "Hz")),
            ("mean_thermal_occupation", _fmt(occupation, "(photons/mode)")),
        ]
    report.results["eta_tot_model"] = ev.eta_tot
    report.results["background_model_hz"] = ev.background_rate
    report.results["dark_rate_hz"] = s.detector.dark_rate
    report.results["total_model_hz"] = ev.noise.total_rate
    rows += [
        ("eta_tot_model", _fmt(ev.eta_tot, "(probability)")),
        ("background_model", _fmt(ev.background_rate, "Hz")),
        ("dark_rate", _fmt(s.detector.dark_rate, "Hz")),
        ("total_model", _fmt(ev.noise.total_rate, "Hz")),
    ]

    m = config.measured
    if m.eta_tot is not None and band is not None:
        bg_meas_eta = background_rate_delta(m.eta_tot, band, env)
        if isinstance(s.filters, DeltaBand):
            bg_meas_eta *= s.filters.peak
        report.results["background_predicted_measured_eta_hz"] = bg_meas_eta
        rows.append(("background_predicted(measured eta)", _fmt(bg_meas_eta, "Hz")))
    if m.background_rate is not None:
        budget = NoiseBudget(dark_rate=s.detector.dark_rate, background_rate=m.background_rate)
        report.results["background_measured_hz"] = budget.background_rate
        report.results["total_measured_hz"] = budget.total_rate
        rows += [
            ("background_measured", _fmt(budget.background_rate, "Hz")),
            ("total_measured", _fmt(budget.total_rate, "Hz")),
        ]
        report.notes.append(
            "measured background exceeds the thermal model when residual pump photons "
            "bypass the filter stack; model it with environment.excess_background_hz"
        )
    report.text_sections.append(("noise", rows))
    return report


def _cmd_sensitivity(config: WorkbenchConfig, options: Options) -> Report:
    report = _new_report("sensitivity", config)
    s = config.scenario
    env = s.effective_environment()
    ev = evaluate_scenario(s)
    m = config.measured

    if m.eta_tot is not None and m.background_rate is not None:
        eta_used = m.eta_tot
        noise_used = NoiseBudget(dark_rate=s.detector.dark_rate, background_rate=m.background_rate)
        basis = "measured"
    else:
        eta_used = ev.eta_tot
        noise_used = ev.noise
        basis = "model"
    if not eta_used > 0:
        raise DomainError("overall efficiency is zero; sensitivity is undefined")

    band = _model_band(s) or SpectralBand(
        center_frequency=wavelength_to_frequency(s.signal.wavelength), width=0.0
    )
    sr = sensitivity_report(s.signal.wavelength, eta_used, noise_used, band, env)

    report.results["basis"] = basis
    report.results["eta_tot"] = eta_used
    report.results["dark_rate_hz"] = noise_used.dark_rate
    report.results["background_rate_hz"] = noise_used.background_rate
    report.results["total_rate_hz"] = noise_used.total_rate
    report.results["snr0_pw"] = sr.snr0 * 1e12
    report.results["snr0_model_pw"] = ev.snr0 * 1e12
    report.results["floor_pw"] = ev.floor * 1e12
    report.results["background_dominated"] = sr.background_dominated
    rows = [
        ("basis", basis),
        ("eta_tot", _fmt(eta_used, "(probability)")),
        ("dark_rate", _fmt(noise_used.dark_rate, "Hz")),
        ("background_rate", _fmt(noise_used.background_rate, "Hz")),
        ("total_rate", _fmt(noise_used.total_rate, "Hz")),
        ("snr0", _fmt(sr.snr0 * 1e12, "pW")),
        ("snr0_model", _fmt(ev.snr0 * 1e12, "pW")),
        ("sensitivity_floor", _fmt(ev.floor * 1e12, "pW")),
        ("background_dominated", str(sr.background_dominated)),
    ]
    report.text_sections.append(("sensitivity", rows))

    if m.reported_snr0 is not None:
        factor = m.reported_snr0 / sr.snr0
        report.results["reported_snr0_pw"] = m.reported_snr0 * 1e12
        report.results["reported_vs_computed"] = factor
        report.notes.append(
            f"computed SNR0 ({sr.snr0 * 1e12:.3f} pW) differs from the recorded reference "
            f"value ({m.reported_snr0 * 1e12:.2f} pW) by a factor {factor:.2f}: the "
            "reference arithmetic evidently used temperature-specific efficiencies that "
            "are not part of this budget; this report applies the definition "
            "snr0 = photon_energy * n_tot / eta_tot literally"
        )
    return report


def _cmd_simulate(config: WorkbenchConfig, options: Options) -> Report:
    seed = options.seed if options.seed is not None else config.seed
    if seed is None:
        raise ConfigError("simulate requires a seed (--seed N or [simulation].seed)")
    duration = options.duration if options.duration is not None else config.duration

    s = config.scenario
    m = config.measured
    ev = evaluate_scenario(s)
    eta = m.eta_tot if m.eta_tot is not None else ev.eta_tot
    background = m.background_rate if m.background_rate is not None else ev.background_rate
    chain = DetectionChainSpec(
        eta_tot=eta,
        jitter_fwhm=s.detector.jitter_fwhm,
        dead_time=s.detector.dead_time,
        dark_rate=s.detector.dark_rate,
        background_rate=background,
    )
    events, summary = simulate_run(config.pulses, chain, duration, seed)
    delays = periodic_sync_delays(events, config.pulses.rep_rate, config.sync_delay)
    hist = histogram_from_delays(delays, config.tac)
    expected = expected_detection_rate(config.pulses, chain)
    # a peak-width estimate needs real statistics behind the peak bin
    fwhm = histogram_fwhm(hist) if hist.counts.max(initial=0) >= 25 else None

    report = _new_report("simulate", config, seed=seed)
    report.results["duration_s"] = duration
    report.results["n_pulses"] = summary.n_pulses
    report.results["photons_generated"] = summary.photons_generated
    report.results["signal_detected"] = summary.signal_detected
    report.results["events_recorded"] = summary.events_recorded
    report.results["signal_recorded"] = summary.signal_recorded
    report.results["dark_recorded"] = summary.dark_recorded
    report.results["background_recorded"] = summary.background_recorded
    report.results["dead_time_losses"] = summary.dead_time_losses
    report.results["detection_rate_hz"] = summary.detection_rate
    report.results["expected_rate_hz"] = expected
    report.results["histogram"] = {
        "bin_start_ns": [round(v, 9) for v in (hist.bin_edges[:-1] * 1e9).tolist()],
        "bin_end_ns": [round(v, 9) for v in (hist.bin_edges[1:] * 1e9).tolist()],
        "counts": hist.counts.tolist(),
        "overflow": hist.overflow,
        "paired": hist.paired,
    }
    if fwhm is not None:
        report.results["histogram_peak_fwhm_ns"] = fwhm * 1e9
    rows = [
        ("duration", _fmt(duration, "s")),
        ("pulses", f"{summary.n_pulses} (count)"),
        ("photons_generated", f"{summary.photons_generated} (count)"),
        ("signal_detected", f"{summary.signal_detected} (count)"),
        ("events_recorded", f"{summary.events_recorded} (count)"),
        ("dead_time_losses", f"{summary.dead_time_losses} (count)"),
        ("detection_rate", _fmt(summary.detection_rate, "Hz")),
        ("expected_rate", _fmt(expected, "Hz")),
        ("tac_in_window", f"{int(hist.counts.sum())} (count)"),
        ("tac_overflow", f"{hist.overflow} (count)"),
    ]
    if fwhm is not None:
        rows.append(("histogram_peak_fwhm", _fmt(fwhm * 1e9, "ns")))
    else:
        report.notes.append(
            "histogram statistics too sparse for a stable peak-width estimate; "
            "extend --duration or raise the efficiency"
        )
    report.text_sections.append(("simulate", rows))

    header = ["bin_start_ns", "bin_end_ns", "counts"]
    edges_ns = hist.bin_edges * 1e9
    table = [
        [f"{edges_ns[i]:.9g}", f"{edges_ns[i + 1]:.9g}", int(c)]
        for i, c in enumerate(hist.counts)
    ]
    report.tabular = (header, table)
    return report


def _cmd_optimize(config: WorkbenchConfig, options: Options) -> Report:
    report = _new_report("optimize", config)
    s = config.scenario
    focus = optimal_focusing()
    report.results["xi_star"] = focus.xi_star
    report.results["h_star"] = focus.h_star
    rows = [
        ("xi_star", _fmt(focus.xi_star, "(dimensionless)")),
        ("h_star", _fmt(focus.h_star, "(dimensionless)")),
    ]

    alpha = s.crystal.attenuation
    if alpha > 0:
        l_fixed = optimal_length_fixed_focus(alpha)
        report.results["optimal_length_fixed_focus_m"] = l_fixed
        rows.append(("optimal_length_fixed_focus", _fmt(l_fixed * 1e3, "mm")))
    else:
        report.results["optimal_length_fixed_focus_m"] = None
        report.notes.append(
            "zero attenuation: conversion grows monotonically with length, "
            "no interior length optimum"
        )
    joint = optimal_length_joint(alpha, s.focusing.confocal_parameter)
    report.results["optimal_length_joint_m"] = joint.length
    report.results["optimal_length_joint_interior"] = joint.interior
    rows.append(("optimal_length_joint", _fmt(joint.length * 1e3, "mm")))
    if not joint.interior:
        report.warnings.append("joint length optimum sits on the search boundary")

    if options.sweep_path is not None:
        if not options.sweep_grid:
            raise ConfigError("--sweep needs --grid with at least one value")
        result = sweep(s, options.sweep_path, list(options.sweep_grid))
        report.results["sweep"] = _sweep_json(result)
        report.tabular = _sweep_table(result)
        rows.append(("sweep", f"{options.sweep_path}, {len(result.rows)} points (see table)"))
    else:
        base = s.pump.power if s.pump.power > 0 else 0.063
        powers = [base * k for k in (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)]
        result = sweep(s, "pump.power", powers)
        report.results["pump_power_tradeoff"] = [
            {
                "power_w": row.value,
                "eta_tot": row.eta_tot,
                "snr0_pw": row.snr0 * 1e12,
                "flags": list(row.flags),
            }
            for row in result.rows
        ]
        report.tabular = _sweep_table(result)
        rows.append(("pump_power_tradeoff", f"{len(result.rows)} points (see table)"))
        if any(row.flags for row in result.rows):
            report.warnings.append("some trade-off points are flagged (formula validity)")
    report.text_sections.append(("optimize", rows))
    return report


def _sweep_json(result: SweepResult) -> dict:
    return {
        "parameter": result.parameter,
        "rows": [
            {
                "value": row.value,
                "eta_sfg": row.eta_sfg,
                "eta_tot": row.eta_tot,
                "n_bg_hz": row.background_rate,
                "snr0_pw": row.snr0 * 1e12,
                "flags": list(row.flags),
            }
            for row in result.rows
        ],
    }


def _sweep_table(result: SweepResult) -> tuple[list[str], list[list]]:
    header = ["parameter", "value", "eta_sfg", "eta_tot", "n_bg_hz", "snr0_pw", "flags"]
    rows = [
        [
            result.parameter,
            f"{row.value:.9g}",
            f"{row.eta_sfg:.9g}",
            f"{row.eta_tot:.9g}",
            f"{row.background_rate:.9g}",
            f"{row.snr0 * 1e12:.9g}",
            ";".join(row.flags),
        ]
        for row in result.rows
    ]
    return header, rows


def _cmd_compare(config: WorkbenchConfig, options: Options) -> Report:
    report = _new_report("compare", config)
    s = config.scenario
    m = config.measured
    catalog = load_catalog_csv(options.catalog) if options.catalog else bundled_catalog()

    if m.reported_snr0 is not None:
        our_snr0 = m.reported_snr0
        basis = "reported"
    elif m.eta_tot is not None and m.background_rate is not None:
        noise = NoiseBudget(dark_rate=s.detector.dark_rate, background_rate=m.background_rate)
        our_snr0 = compute_snr0(s.signal.wavelength, m.eta_tot, noise)
        basis = "measured"
    else:
        our_snr0 = evaluate_scenario(s).snr0
        basis = "model"
    ours = (s.detector.jitter_fwhm, our_snr0)
    ranked = compare_detectors(ours, catalog)

    report.results["our_timing_ns"] = ours[0] * 1e9
    report.results["our_snr0_pw"] = our_snr0 * 1e12
    report.results["basis"] = basis
    report.results["entries"] = [
        {
            "name": row.entry.name,
            "timing_ns": row.entry.timing * 1e9,
            "snr0_pw": row.entry.snr0 * 1e12,
            "ratio": row.ratio,
            "note": row.entry.note,
        }
        for row in ranked
    ]
    rows = [
        ("our_timing", _fmt(ours[0] * 1e9, "ns")),
        ("our_snr0", _fmt(our_snr0 * 1e12, "pW")),
    ] + [
        (row.entry.name, f"{_fmt(row.entry.snr0 * 1e12, 'pW')} ({_fmt(row.ratio, 'x')})")
        for row in ranked
    ]
    report.text_sections.append(("compare", rows))
    header = ["name", "timing_ns", "snr0_pw", "ratio", "note"]
    table = [
        [
            row.entry.name,
            f"{row.entry.timing * 1e9:.9g}",
            f"{row.entry.snr0 * 1e12:.9g}",
            f"{row.ratio:.9g}",
            row.entry.note,
        ]
        for row in ranked
    ]
    report.tabular = (header, table)
    return report


_COMMAND_IMPL = {
    "efficiency": _cmd_efficiency,
    "noise": _cmd_noise,
    "sensitivity": _cmd_sensitivity,
    "simulate": _cmd_simulate,
    "optimize": _cmd_optimize,
    "compare": _cmd_compare,
}


def run_command(command: str, config: WorkbenchConfig, options: Options | None = None) -> Report:
    """Dispatch one workbench command against a loaded scenario."""
    if command not in _COMMAND_IMPL:
        raise ConfigError(f"unknown command {command!r} (expected one of {COMMANDS})")
    return _COMMAND_IMPL[command](config, options or Options())


def emit_report(report: Report, fmt: str = "text", out: str | Path | None = None) -> None:
    """Render a report as text, JSON or CSV to stdout or a file."""
    if fmt == "text":
        payload = "\n".join(report.text_lines()) + "\n"
    elif fmt == "json":
        payload = json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        if report.tabular is None:
            raise ConfigError(
                f"csv output requested but the {report.command} report is not tabular"
            )
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        header, rows = report.tabular
        writer.writerow(header)
        writer.writerows(rows)
        payload = buffer.getvalue()
    else:
        raise ConfigError(f"unknown output format {fmt!r}")
    if out is None:
        sys.stdout.write(payload)
    else:
        Path(out).write_text(payload)


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"--grid: {exc}") from None
    if not values:
        raise ConfigError("--grid: no values given")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirup",
        description=(
            "Model, simulate and optimize a mid-infrared single-photon detector "
            "based on sum-frequency up-conversion."
        ),
    )
    parser.add_argument("--version", action="version", version=f"mirup {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default="paper_25C",
        help="scenario file path or bundled name (default: paper_25C)",
    )
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument(
        "--strict", action="store_true", help="reject unknown scenario keys"
    )
    sub.add_parser("efficiency", parents=[common], help="conversion-efficiency budget")
    sub.add_parser("noise", parents=[common], help="thermal background and noise budget")
    sub.add_parser("sensitivity", parents=[common], help="SNR0 figure of merit")
    p_sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo counting run")
    p_sim.add_argument("--seed", type=int, default=None, help="RNG seed (overrides scenario)")
    p_sim.add_argument(
        "--duration", type=float, default=None, help="virtual seconds (overrides scenario)"
    )
    p_opt = sub.add_parser("optimize", parents=[common], help="design optima and sweeps")
    p_opt.add_argument("--sweep", default=None, help="scenario parameter path, e.g. pump.power")
    p_opt.add_argument("--grid", default=None, help="comma-separated sweep values (SI units)")
    p_cmp = sub.add_parser("compare", parents=[common], help="rank against a detector catalog")
    p_cmp.add_argument("--catalog", default=None, help="catalog CSV (default: bundled)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_scenario(args.config, strict=args.strict)
        options = Options(
            seed=getattr(args, "seed", None),
            duration=getattr(args, "duration", None),
            sweep_path=getattr(args, "sweep", None),
            sweep_grid=_parse_grid(args.grid) if getattr(args, "grid", None) else None,
            catalog=getattr(args, "catalog", None),
        )
        report = run_command(args.command, config, options)
        for warning in report.warnings:
            print(f"mirup: warning: {warning}", file=sys.stderr)
        emit_report(report, fmt=args.format, out=args.out)
    except ConfigError as exc:
        print(f"mirup: config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"mirup: domain error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"mirup: i/o error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
