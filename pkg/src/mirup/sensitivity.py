"""Detection sensitivity figure of merit and detector comparison.

The sensitivity SNR0 is the optical signal power at which the detected
signal rate equals the total noise rate: one photon energy per converted
count, scaled by the noise rate and divided by the overall efficiency,

    SNR0 = (h c / lam_signal) * n_tot / eta_tot    [W]

In the background-dominated regime the efficiency cancels between signal
and background and SNR0 approaches an efficiency-independent floor.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DomainError
from .quantities import SpectralBand, photon_energy
from .radiometry import (
    NoiseBudget,
    ThermalEnvironment,
    background_rate_delta,
    mean_thermal_occupation,
)

# background_rate > threshold * dark_rate counts as background-dominated
DOMINANCE_THRESHOLD = 10.0


@dataclass(frozen=True)
class DetectorSpec:
    """Photon-counting detector parameters: efficiency, noise hz, timing s."""

    eta_det: float
    dark_rate: float = 0.0
    jitter_fwhm: float = 0.0
    dead_time: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta_det <= 1.0:
            raise DomainError("DetectorSpec.eta_det must lie in [0, 1]")
        for name in ("dark_rate", "jitter_fwhm", "dead_time"):
            if getattr(self, name) < 0:
                raise DomainError(f"DetectorSpec.{name} must be >= 0")


@dataclass(frozen=True)
class DetectorCatalogEntry:
    """One row of the detector-comparison catalog (SI: timing s, snr0 W)."""

    name: str
    timing: float
    snr0: float
    note: str = ""

    def __post_init__(self) -> None:
        if not self.timing > 0:
            raise DomainError(f"catalog entry {self.name!r}: timing must be positive")
        if not self.snr0 > 0:
            raise DomainError(f"catalog entry {self.name!r}: snr0 must be positive")


@dataclass(frozen=True)
class ComparisonRow:
    """Catalog entry paired with its sensitivity ratio to the reference."""

    entry: DetectorCatalogEntry
    ratio: float


@dataclass(frozen=True)
class SensitivityReport:
    """Sensitivity summary for one detection-chain configuration."""

    snr0: float
    floor: float
    background_dominated: bool
    signal_wavelength: float
    eta_tot: float
    noise: NoiseBudget


def snr0(signal_lambda: float, eta_tot: float, noise: NoiseBudget) -> float:
    """Noise-equivalent signal power (W) for unity signal-to-noise ratio."""
    if not eta_tot > 0:
        raise DomainError(
            f"eta_tot must be positive (got {eta_tot!r}); a dead chain detects nothing"
        )
    if eta_tot > 1.0:
        raise DomainError(f"eta_tot must lie in (0, 1] (got {eta_tot!r})")
    return photon_energy(signal_lambda) * noise.total_rate / eta_tot


def sensitivity_floor(
    signal_lambda: float,
    band: SpectralBand,
    env: ThermalEnvironment,
) -> float:
    """Efficiency-independent lower bound of SNR0 (W) in the background limit.

    Substituting the narrow-band background rate into the SNR0 definition
    cancels eta_tot, leaving photon energy x bandwidth x occupation.
    """
    if band.width == 0.0:
        return 0.0
    return (
        photon_energy(signal_lambda)
        * band.width
        * mean_thermal_occupation(band.center_frequency, env)
    )


def snr0_vs_efficiency(
    signal_lambda: float,
    dark_rate: float,
    band: SpectralBand,
    env: ThermalEnvironment,
    eta_grid: Sequence[float],
) -> list[tuple[float, float]]:
    """SNR0 along an efficiency grid, with the background tied to eta.

    Each point uses n_tot = dark_rate + background(eta); the curve is
    strictly decreasing in eta and bounded below by the sensitivity floor.
    """
    if len(eta_grid) == 0:
        raise DomainError("eta_grid must not be empty")
    if dark_rate < 0:
        raise DomainError(f"dark_rate must be >= 0 (got {dark_rate!r})")
    curve: list[tuple[float, float]] = []
    for eta in eta_grid:
        if not 0.0 < eta <= 1.0:
            raise DomainError(f"efficiency grid values must lie in (0, 1] (got {eta!r})")
        noise = NoiseBudget(
            dark_rate=dark_rate,
            background_rate=background_rate_delta(eta, band, env),
        )
        curve.append((eta, snr0(signal_lambda, eta, noise)))
    return curve


def sensitivity_report(
    signal_lambda: float,
    eta_tot: float,
    noise: NoiseBudget,
    band: SpectralBand,
    env: ThermalEnvironment,
    dominance_threshold: float = DOMINANCE_THRESHOLD,
) -> SensitivityReport:
    """Bundle SNR0, its floor and the background-dominance flag."""
    return SensitivityReport(
        snr0=snr0(signal_lambda, eta_tot, noise),
        floor=sensitivity_floor(signal_lambda, band, env),
        background_dominated=noise.background_rate > dominance_threshold * noise.dark_rate,
        signal_wavelength=signal_lambda,
        eta_tot=eta_tot,
        noise=noise,
    )


def compare_detectors(
    ours: tuple[float, float],
    catalog: Iterable[DetectorCatalogEntry],
) -> list[ComparisonRow]:
    """Rank catalog entries by sensitivity against a reference detector.

    ``ours`` is (timing s, snr0 W). Entries come back sorted by snr0
    ascending, each carrying entry.snr0 / ours.snr0 (how much more power
    the entry needs for unity SNR).
    """
    entries = list(catalog)
    if not entries:
        raise DomainError("detector catalog must not be empty")
    _, our_snr0 = ours
    if not our_snr0 > 0:
        raise DomainError("reference snr0 must be positive")
    ranked = sorted(entries, key=lambda e: e.snr0)
    return [ComparisonRow(entry=e, ratio=e.snr0 / our_snr0) for e in ranked]


def load_catalog_csv(path: str | Path) -> list[DetectorCatalogEntry]:
    """Read a detector catalog: columns name, timing_ns, snr0_pw, note."""
    path = Path(path)
    with path.open(newline="") as fh:
        return _parse_catalog(csv.reader(fh), str(path))


def bundled_catalog() -> list[DetectorCatalogEntry]:
    """The catalog shipped with the package."""
    text = resources.files("mirup.data").joinpath("detector_catalog.csv").read_text()
    return _parse_catalog(csv.reader(text.splitlines()), "bundled detector_catalog.csv")


def _parse_catalog(reader, origin: str) -> list[DetectorCatalogEntry]:
    try:
        header = next(reader)
    except StopIteration:
        raise DomainError(f"{origin}: empty catalog") from None
    expected = ["name", "timing_ns", "snr0_pw", "note"]
    if [h.strip().lower() for h in header] != expected:
        raise DomainError(f"{origin}: header must be 'name,timing_ns,snr0_pw,note'")
    entries: list[DetectorCatalogEntry] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 4:
            raise DomainError(f"{origin}:{lineno}: expected 4 columns, got {len(row)}")
        try:
            entries.append(
                DetectorCatalogEntry(
                    name=row[0].strip(),
                    timing=float(row[1]) * 1e-9,
                    snr0=float(row[2]) * 1e-12,
                    note=row[3].strip(),
                )
            )
        except ValueError as exc:
            raise DomainError(f"{origin}:{lineno}: {exc}") from None
    if not entries:
        raise DomainError(f"{origin}: catalog has a header but no rows")
    return entries
