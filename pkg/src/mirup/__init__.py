"""mirup: mid-infrared single-photon detection by sum-frequency up-conversion.

Modeling, Monte Carlo simulation and design optimization for a two-stage
detector: a nonlinear crystal converts mid-infrared photons to the
near-infrared, where a silicon avalanche photodiode counts them. The
package computes the conversion-efficiency budget, the thermal-background
noise it admits, the resulting detection sensitivity, and simulates the
pulsed photon-counting experiment end to end.
"""

__version__ = "0.1.0"

from .counting_sim import (
    DetectionChainSpec,
    EventRecord,
    Histogram,
    PulseTrainSpec,
    RunSummary,
    TacConfig,
    build_tac_histogram,
    dead_time_correction,
    expected_detection_rate,
    sample_photon_number,
    simulate_run,
)
from .design_optimizer import (
    Scenario,
    ScenarioEvaluation,
    SweepResult,
    evaluate_scenario,
    optimal_length_fixed_focus,
    optimal_length_joint,
    pump_power_tradeoff,
    sweep,
)
from .errors import (
    ConfigError,
    DomainError,
    InconsistentBudgetError,
    MirupError,
    NoInteriorOptimumError,
)
from .quantities import (
    CONSTANTS,
    PhysicalConstants,
    SpectralBand,
    bandwidth_wavelength_to_frequency,
    celsius_to_kelvin,
    photon_energy,
    sfg_wavelength,
    wavelength_to_frequency,
)
from .radiometry import (
    DeltaBand,
    NoiseBudget,
    TabulatedTransfer,
    ThermalEnvironment,
    background_rate_delta,
    background_rate_integral,
    compose_noise,
    mean_thermal_occupation,
)
from .sensitivity import (
    DetectorCatalogEntry,
    DetectorSpec,
    SensitivityReport,
    compare_detectors,
    sensitivity_floor,
    snr0,
    snr0_vs_efficiency,
)
from .upconversion import (
    CrystalSpec,
    EfficiencyBudget,
    FocusingGeometry,
    PumpBeam,
    SignalBeam,
    boyd_kleinman_h,
    compose_budget,
    infer_sfg_efficiency,
    optimal_focusing,
    per_watt_efficiency,
    sfg_quantum_efficiency,
    theory_gap,
)
