"""Parameter-scan orchestration: 2D spectroscopy maps, bias traces at
multiple powers, level diagrams, power calibration, and gap extraction.

Grid points are independent; columns are dispatched to a thread pool
and assembled by index, so results are identical for any thread count.
"""

import json
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import h as PLANCK_H

from .core import FluxBias, Tone
from .driveshift import drive_response
from .steady import OperatingPoint, solve_prepared

FLOAT_FMT = "%.8e"
THREADS_ENV_VAR = "FLUXSHIFT_THREADS"


@dataclass(frozen=True)
class AxisSpec:
    """One scan axis: parameter name plus an inclusive linear range."""

    name: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("axis needs at least 2 points")

    def grid(self):
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepSpec:
    """A 1D or 2D scan over an operating-point template."""

    axis1: AxisSpec
    axis2: AxisSpec = None
    quantity: str = "t_abs"

    def __post_init__(self):
        if self.quantity not in ("t_abs", "t_phase", "population", "levels"):
            raise ValueError(f"unknown quantity {self.quantity}")
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ValueError("axes must name distinct parameters")


@dataclass(frozen=True)
class DeviceGeometry:
    """Input-line and resonator electrical parameters for the
    power-to-amplitude calibration."""

    coupling_capacitance_ff: float = 5.0
    resonator_capacitance_pf: float = 0.4
    line_impedance_ohm: float = 50.0
    drive_mode_decay_mhz: float = None  # default: drive_harmonic*omega_r/Q
    drive_coupling_mhz: float = None    # default: 3^1.5 * coupling
    calibration_factor: float = 1.0

    def __post_init__(self):
        for name in ("coupling_capacitance_ff", "resonator_capacitance_pf",
                     "line_impedance_ohm", "calibration_factor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("drive_mode_decay_mhz", "drive_coupling_mhz"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be > 0")


def resolve_geometry(geometry: DeviceGeometry, resonator):
    """Fill the resonator-derived defaults: drive-mode decay at the
    drive harmonic with the same quality factor, drive coupling scaled
    by harmonic^1.5."""
    kd = geometry.drive_mode_decay_mhz
    if kd is None:
        kd = resonator.drive_harmonic * resonator.photon_decay_ghz * 1e3
    gd = geometry.drive_coupling_mhz
    if gd is None:
        gd = resonator.drive_harmonic ** 1.5 * resonator.coupling_mhz
    return replace(geometry, drive_mode_decay_mhz=kd, drive_coupling_mhz=gd)


@dataclass
class MapResult:
    """Scan values plus everything needed to reproduce them."""

    axis1_name: str
    axis1: np.ndarray
    axis2_name: str
    axis2: np.ndarray
    quantity: str
    values: np.ndarray  # shape (len(axis1), len(axis2))
    metadata: dict
    overlay: list = None  # [[axis1 value, shifted splitting], ...]


def resolve_threads(threads=None):
    """Thread count: explicit argument, else the environment variable,
    else 1."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        return max(1, int(env))
    return 1


def _with_bias(op: OperatingPoint, eps_ghz):
    return replace(op, bias=FluxBias(energy_bias_ghz=float(eps_ghz)))


def _with_drive_amp(op: OperatingPoint, amp_ghz):
    tones = replace(op.tones, drive=replace(op.tones.drive,
                                            amplitude_ghz=float(amp_ghz)))
    return replace(op, tones=tones)


def _column_order(order, eps_ghz):
    # "mixed" reproduces the split-figure recipe: first order on the
    # negative-bias side, second order at and above zero
    if order == "mixed":
        return 1 if eps_ghz < 0 else 2
    return order


def _prepare_columns(op: OperatingPoint, eps_grid, order):
    """Sequential drive evaluation per bias point, with validity
    warnings collected once, deterministically."""
    prepared = []
    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always")
        for eps in eps_grid:
            point = _with_bias(op, eps)
            point = replace(point, correction_order=_column_order(order, eps))
            try:
                shift, hats = drive_response(
                    point.qubit, point.bias, point.tones.drive, point.rates,
                    order=point.correction_order)
            except Exception as exc:
                raise type(exc)(
                    f"at energy_bias {eps:.6g} GHz: {exc}") from exc
            prepared.append((point, shift, hats))
    messages = sorted({str(w.message) for w in wlist})
    return prepared, messages


def _quantity_value(state, quantity):
    if quantity == "t_abs":
        return abs(state.transmission)
    if quantity == "t_phase":
        return float(np.angle(state.transmission))
    if quantity == "population":
        return state.population
    raise ValueError(f"unsupported point quantity {quantity}")


def spectroscopy_map(op: OperatingPoint, eps_axis: AxisSpec,
                     spec_axis: AxisSpec, order=2, normalize="column",
                     mode="fixed_n", threads=None, quantity="t_abs",
                     with_overlay=True):
    """|t| (or another point quantity) over (energy bias, spectroscopy
    frequency), probe fixed at its configured frequency.

    normalize="column" divides each bias column by its median, isolating
    the spectroscopic feature from the dispersive background.
    """
    if normalize not in ("column", "none"):
        raise ValueError("normalize must be 'column' or 'none'")
    eps_grid = eps_axis.grid()
    ws_grid = spec_axis.grid()
    prepared, messages = _prepare_columns(op, eps_grid, order)

    def column(i):
        point, shift, hats = prepared[i]
        out = np.empty(len(ws_grid))
        for j, ws in enumerate(ws_grid):
            tones = replace(point.tones, spectroscopy=replace(
                point.tones.spectroscopy, frequency_ghz=float(ws)))
            try:
                state = solve_prepared(replace(point, tones=tones),
                                       shift, hats, mode)
            except Exception as exc:
                raise type(exc)(
                    f"at energy_bias {eps_grid[i]:.6g} GHz, "
                    f"spectroscopy_freq {ws:.6g} GHz: {exc}") from exc
            out[j] = _quantity_value(state, quantity)
        return out

    nthreads = resolve_threads(threads)
    values = np.empty((len(eps_grid), len(ws_grid)))
    if nthreads == 1:
        for i in range(len(eps_grid)):
            values[i] = column(i)
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            for i, row in enumerate(pool.map(column,
                                             range(len(eps_grid)))):
                values[i] = row
    if normalize == "column":
        med = np.median(values, axis=1, keepdims=True)
        values = values / np.where(med == 0, 1.0, med)
    overlay = None
    if with_overlay:
        overlay = [[float(e), prepared[i][1].rabi_splitting_ghz]
                   for i, e in enumerate(eps_grid)]
    meta = {"normalization": normalize, "order": order, "mode": mode,
            "quantity": quantity, "warnings": messages}
    return MapResult("energy_bias_ghz", eps_grid, "spectroscopy_freq_ghz",
                     ws_grid, quantity, values, meta, overlay)


def drive_from_power(p_in_dbm, wd_ghz, geometry: DeviceGeometry):
    """Drive amplitude in GHz reconstructed from the input power.

    Implemented exactly in the printed form (amplitude = 4*g_d*sqrt(N_d)
    with sqrt(N_d) built from the line and resonator electrical
    parameters); the formula's dimensional bookkeeping is taken as is,
    so absolute values carry the exposed calibration factor (default 1)
    rather than physical meaning. Scaling in power is exact.
    """
    if geometry.drive_mode_decay_mhz is None \
            or geometry.drive_coupling_mhz is None:
        raise ValueError("geometry defaults unresolved; use resolve_geometry")
    p_watt = 10.0 ** ((p_in_dbm - 30.0) / 10.0)
    kappa_d = 2.0 * np.pi * geometry.drive_mode_decay_mhz * 1e6  # rad/s
    omega_d = 2.0 * np.pi * wd_ghz * 1e9
    c_c = geometry.coupling_capacitance_ff * 1e-15
    c_r = geometry.resonator_capacitance_pf * 1e-12
    sqrt_nd = (1.0 / kappa_d) * (c_c / 2.0) \
        * np.sqrt(p_watt / geometry.line_impedance_ohm) \
        * np.sqrt(PLANCK_H * omega_d / c_r)
    gd_ghz = geometry.drive_coupling_mhz * 1e-3
    return 4.0 * gd_ghz * sqrt_nd * geometry.calibration_factor


def power_for_drive(target_amp_ghz, wd_ghz, geometry: DeviceGeometry):
    """Inverse calibration: input power in dBm that reconstructs the
    given drive amplitude."""
    if target_amp_ghz <= 0:
        raise ValueError("target amplitude must be > 0")
    ref = drive_from_power(0.0, wd_ghz, geometry)
    return 20.0 * np.log10(target_amp_ghz / ref)


def bias_trace(op: OperatingPoint, eps_axis: AxisSpec, powers_dbm,
               geometry: DeviceGeometry, order=2, mode="fixed_n",
               threads=None):
    """|t(eps)| per input power, spectroscopy tone off.

    Powers convert to drive amplitudes through drive_from_power.
    Returns one 1D MapResult per power.
    """
    geometry = resolve_geometry(geometry, op.resonator)
    tones = replace(op.tones, spectroscopy=replace(
        op.tones.spectroscopy, amplitude_ghz=0.0))
    op = replace(op, tones=tones)
    eps_grid = eps_axis.grid()
    results = []
    for p_dbm in powers_dbm:
        amp = drive_from_power(p_dbm, op.tones.drive.frequency_ghz, geometry)
        point = _with_drive_amp(op, amp)
        prepared, messages = _prepare_columns(point, eps_grid, order)

        def value(i):
            pt, shift, hats = prepared[i]
            try:
                return abs(solve_prepared(pt, shift, hats, mode).transmission)
            except Exception as exc:
                raise type(exc)(
                    f"at energy_bias {eps_grid[i]:.6g} GHz, power "
                    f"{p_dbm:.6g} dBm: {exc}") from exc

        nthreads = resolve_threads(threads)
        if nthreads == 1:
            vals = np.array([value(i) for i in range(len(eps_grid))])
        else:
            with ThreadPoolExecutor(max_workers=nthreads) as pool:
                vals = np.array(list(pool.map(value, range(len(eps_grid)))))
        meta = {"order": order, "mode": mode, "power_dbm": float(p_dbm),
                "drive_amplitude_ghz": float(amp), "warnings": messages}
        results.append(MapResult(
            "energy_bias_ghz", eps_grid, "power_dbm",
            np.array([float(p_dbm)]), "t_abs", vals.reshape(-1, 1), meta,
            [[float(e), prepared[i][1].rabi_splitting_ghz]
             for i, e in enumerate(eps_grid)]))
    return results


def level_diagram(op: OperatingPoint, eps_axis: AxisSpec,
                  drive_amplitudes_ghz, order=None):
    """Shifted level branches and qubit population over (bias, drive
    amplitude).

    Returns three aligned MapResults keyed "upper", "lower",
    "population": branches at +-(shifted splitting)/2 and the
    steady population with the probe off (the spectroscopy tone of the
    operating point stays active).
    """
    from .steady import qubit_population
    if order is None:
        order = op.correction_order
    eps_grid = eps_axis.grid()
    amps = np.asarray(list(drive_amplitudes_ghz), dtype=float)
    if amps.size == 0:
        raise ValueError("need at least one drive amplitude")
    upper = np.empty((len(eps_grid), amps.size))
    pop = np.empty_like(upper)
    all_messages = set()
    for k, amp in enumerate(amps):
        point = _with_drive_amp(op, amp)
        prepared, messages = _prepare_columns(point, eps_grid, order)
        all_messages.update(messages)
        for i, (pt, shift, hats) in enumerate(prepared):
            upper[i, k] = shift.rabi_splitting_ghz / 2.0
            pop[i, k] = qubit_population(pt, shift, hats, 0.0)
    meta = {"order": order,
            "spectroscopy_freq_ghz": op.tones.spectroscopy.frequency_ghz,
            "spectroscopy_amp_ghz": op.tones.spectroscopy.amplitude_ghz,
            "warnings": sorted(all_messages)}
    mk = lambda quantity, vals: MapResult(
        "energy_bias_ghz", eps_grid, "drive_amplitude_ghz", amps.copy(),
        quantity, vals, dict(meta))
    return {"upper": mk("level_upper_ghz", upper),
            "lower": mk("level_lower_ghz", -upper),
            "population": mk("population", pop)}


def extract_min_gap(result: MapResult):
    """Minimal shifted splitting from a spectroscopy map.

    Per bias column, the spectroscopy feature is the extremal deviation
    from the column median; columns whose feature does not exceed three
    times the map noise floor (median of column median-absolute-
    deviations) are skipped, as are features pinned to the scan edge.
    The ridge minimum is refined parabolically on both axes.
    """
    values = result.values
    ws = result.axis2
    dev = values - np.median(values, axis=1, keepdims=True)
    mads = np.median(np.abs(dev), axis=1)
    noise = float(np.median(mads))
    step = ws[1] - ws[0]
    ridge = []
    for i in range(values.shape[0]):
        j = int(np.argmax(np.abs(dev[i])))
        if abs(dev[i, j]) <= max(3.0 * noise, 1e-12):
            continue
        if j == 0 or j == len(ws) - 1:
            continue
        y0, y1, y2 = np.abs(dev[i, j - 1:j + 2])
        denom = y0 - 2.0 * y1 + y2
        off = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        ridge.append((float(result.axis1[i]), float(ws[j] + off * step)))
    if not ridge:
        raise ValueError(
            "ridge not found: no column feature above 3x the noise floor")
    ridge = np.array(ridge)
    k = int(np.argmin(ridge[:, 1]))
    if 0 < k < len(ridge) - 1:
        y0, y1, y2 = ridge[k - 1:k + 2, 1]
        denom = y0 - 2.0 * y1 + y2
        if denom != 0:
            off = 0.5 * (y0 - y2) / denom
            return float(y1 - 0.25 * (y0 - y2) * off)
    return float(ridge[k, 1])


def write_map_csv(result: MapResult, path):
    """Axis1-major CSV with a header row; fixed scientific formatting so
    identical inputs give identical bytes."""
    lines = [f"{result.axis1_name},{result.axis2_name},{result.quantity}"]
    for i, x1 in enumerate(result.axis1):
        for j, x2 in enumerate(result.axis2):
            lines.append(",".join(FLOAT_FMT % v
                                  for v in (x1, x2, result.values[i, j])))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sidecar(path, resolved_config, result: MapResult = None,
                  extra=None):
    """JSON sidecar: resolved configuration, units, and map metadata.

    Deterministic serialization (sorted keys, fixed separators, no
    timestamps) so reruns are byte-identical.
    """
    doc = {
        "config": resolved_config,
        "units": {"frequency": "GHz", "rate": "MHz", "power": "dBm",
                  "flux": "flux quanta"},
    }
    if result is not None:
        doc["map"] = {
            "axis1": result.axis1_name,
            "axis2": result.axis2_name,
            "quantity": result.quantity,
            "shape": [int(result.values.shape[0]),
                      int(result.values.shape[1])],
            "metadata": result.metadata,
        }
        if result.overlay is not None:
            doc["map"]["overlay"] = [[float(a), float(b)]
                                     for a, b in result.overlay]
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
