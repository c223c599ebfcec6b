"""Analytic model of the drive-induced shift of a flux qubit's levels,
three-tone dispersive readout of the shifted spectrum, and a
brute-force time-evolution oracle for validating the closed forms."""

from .core import (
    FluxBias,
    QubitParams,
    ResonatorParams,
    DissipationRates,
    Tone,
    bias_from_flux,
    flux_from_bias,
    level_splitting,
    projections,
)
from .driveshift import (
    ValidityWarning,
    ShiftResult,
    ModifiedRates,
    effective_drive,
    detunings,
    ac_shift_approx,
    ac_shift_exact,
    rabi_splitting,
    correction_strength,
    coupling_factors,
    modified_rates,
    offres_population,
    sideband_amplitudes,
    drive_response,
)
from .steady import (
    OperatingPoint,
    ToneSet,
    SteadyState,
    solve,
    solve_prepared,
    qubit_population,
    cavity_amplitude,
    transmission,
    spectroscopy_sidebands,
)
from .oracle import (
    TruncatedSystem,
    FloquetProblem,
    IntegratorConfig,
    NonConvergenceError,
    TruncationError,
    ZoneFoldingError,
    system_from_point,
    evolve,
    evolve_to_steady,
    transmission_oracle,
    floquet_quasienergies,
)
from .sweeps import (
    AxisSpec,
    SweepSpec,
    DeviceGeometry,
    MapResult,
    resolve_geometry,
    resolve_threads,
    spectroscopy_map,
    bias_trace,
    level_diagram,
    drive_from_power,
    power_for_drive,
    extract_min_gap,
    write_map_csv,
    write_sidecar,
)

__version__ = "0.1.0"

__all__ = [
    "FluxBias", "QubitParams", "ResonatorParams", "DissipationRates",
    "Tone", "bias_from_flux", "flux_from_bias", "level_splitting",
    "projections",
    "ValidityWarning", "ShiftResult", "ModifiedRates", "effective_drive",
    "detunings", "ac_shift_approx", "ac_shift_exact", "rabi_splitting",
    "correction_strength", "coupling_factors", "modified_rates",
    "offres_population", "sideband_amplitudes", "drive_response",
    "OperatingPoint", "ToneSet", "SteadyState", "solve", "solve_prepared",
    "qubit_population", "cavity_amplitude", "transmission",
    "spectroscopy_sidebands",
    "TruncatedSystem", "FloquetProblem", "IntegratorConfig",
    "NonConvergenceError", "TruncationError", "ZoneFoldingError",
    "system_from_point", "evolve", "evolve_to_steady",
    "transmission_oracle", "floquet_quasienergies",
    "AxisSpec", "SweepSpec", "DeviceGeometry", "MapResult",
    "resolve_geometry", "resolve_threads", "spectroscopy_map", "bias_trace",
    "level_diagram",
    "drive_from_power", "power_for_drive", "extract_min_gap",
    "write_map_csv", "write_sidecar",
    "__version__",
]
