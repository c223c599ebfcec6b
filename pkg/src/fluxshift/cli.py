"""Command-line front end: strict JSON configuration in, CSV data plus
a JSON sidecar out.

Identical configuration and flags give byte-identical output files; the
sidecar's "config" block is itself a valid configuration, so any run
can be reproduced from its sidecar alone.
"""

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .core import (DissipationRates, FluxBias, QubitParams, ResonatorParams,
                   Tone, level_splitting, resolve_bias)
from .driveshift import (ac_shift_approx, ac_shift_exact, drive_response,
                         effective_drive, offres_population,
                         sideband_amplitudes)
from .oracle import (FloquetProblem, evolve_to_steady, floquet_quasienergies,
                     system_from_point)
from .steady import OperatingPoint, ToneSet
from .sweeps import (THREADS_ENV_VAR, AxisSpec, DeviceGeometry, FLOAT_FMT,
                     MapResult, bias_trace, drive_from_power,
                     extract_min_gap, level_diagram, resolve_geometry,
                     spectroscopy_map, write_map_csv, write_sidecar)


class ConfigError(ValueError):
    pass


# Full schema with defaults. None marks a value resolved after merging
# (tone frequencies track the resonator, geometry tracks the drive mode)
# or, for the bias block, an exactly-one-of pair.
_DEFAULTS = {
    "qubit": {"gap_ghz": 2.97, "persistent_current_na": 160.0},
    "bias": {"energy_bias_ghz": None, "external_flux_phi0": None},
    "resonator": {"fundamental_freq_ghz": 2.59, "quality_factor": 120000.0,
                  "coupling_mhz": 3.0, "drive_harmonic": 3},
    "rates": {"relaxation_mhz": 10.0, "pure_dephasing_mhz": 20.0},
    "geometry": {"coupling_capacitance_ff": 5.0,
                 "resonator_capacitance_pf": 0.4,
                 "line_impedance_ohm": 50.0,
                 "drive_mode_decay_mhz": None,
                 "drive_coupling_mhz": None,
                 "calibration_factor": 1.0},
    "tones": {"probe": {"amplitude_ghz": 0.0, "frequency_ghz": None},
              "drive": {"amplitude_ghz": 0.4, "frequency_ghz": None},
              "spectroscopy": {"amplitude_ghz": 0.001,
                               "frequency_ghz": 3.5}},
    "photon_number": 5.0,
    "correction_order": 2,
    "solve_mode": "fixed_n",
    "normalization": "column",
    "sweep": {"quantity": "t_abs",
              "axis1": {"name": "energy_bias_ghz", "start": -6.0,
                        "stop": 6.0, "points": 201},
              "axis2": {"name": "spectroscopy_freq_ghz", "start": 2.0,
                        "stop": 6.0, "points": 201}},
    "powers_dbm": [-30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0,
                   5.0, 10.0],
    "drive_amplitudes_ghz": [0.0, 1.0, 2.0, 3.0],
}


def _walk(user, template, path, seen):
    """Reject unknown keys with their full path; type-check leaves."""
    if not isinstance(user, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    for key, val in user.items():
        sub = f"{path}.{key}" if path else key
        if key not in template:
            raise ConfigError(f"unknown config key: {sub}")
        tval = template[key]
        if isinstance(tval, dict):
            _walk(val, tval, sub, seen)
            continue
        seen.add(sub)
        if sub == "correction_order":
            if val not in (1, 2, "mixed"):
                raise ConfigError(f'{sub}: must be 1, 2, or "mixed"')
        elif isinstance(tval, str):
            if not isinstance(val, str):
                raise ConfigError(f"{sub}: expected a string")
        elif isinstance(tval, list):
            ok = isinstance(val, list) and all(
                isinstance(x, (int, float)) and not isinstance(x, bool)
                for x in val)
            if not ok:
                raise ConfigError(f"{sub}: expected a list of numbers")
        else:
            if val is None and tval is None:
                continue
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"{sub}: expected a number")


def _merge(user, base):
    for key, val in user.items():
        if isinstance(val, dict):
            _merge(val, base[key])
        else:
            base[key] = val


def load_config(path):
    """Parse, validate, and fully resolve a configuration.

    Returns (config, seen) where seen is the set of dotted paths the
    user supplied explicitly. A sidecar document is accepted in place of
    a bare configuration (its "config" block is used).
    """
    cfg = json.loads(json.dumps(_DEFAULTS))
    seen = set()
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if isinstance(doc, dict) and "config" in doc and "qubit" not in doc:
            doc = doc["config"]
        _walk(doc, _DEFAULTS, "", seen)
        _merge(doc, cfg)

    bias = cfg["bias"]
    if bias["energy_bias_ghz"] is not None \
            and bias["external_flux_phi0"] is not None:
        raise ConfigError(
            "bias: set exactly one of energy_bias_ghz, external_flux_phi0")
    if bias["energy_bias_ghz"] is None and bias["external_flux_phi0"] is None:
        bias["energy_bias_ghz"] = 0.0

    if cfg["solve_mode"] not in ("fixed_n", "self_consistent"):
        raise ConfigError('solve_mode: "fixed_n" or "self_consistent"')
    if cfg["normalization"] not in ("column", "none"):
        raise ConfigError('normalization: "column" or "none"')
    if cfg["sweep"]["quantity"] not in ("t_abs", "t_phase", "population"):
        raise ConfigError(
            'sweep.quantity: "t_abs", "t_phase", or "population"')
    if cfg["sweep"]["axis1"]["name"] != "energy_bias_ghz":
        raise ConfigError("sweep.axis1.name: only energy_bias_ghz scans "
                          "are supported")
    if cfg["sweep"]["axis2"]["name"] != "spectroscopy_freq_ghz":
        raise ConfigError("sweep.axis2.name: only spectroscopy_freq_ghz "
                          "scans are supported")
    for ax in ("axis1", "axis2"):
        pts = cfg["sweep"][ax]["points"]
        if isinstance(pts, bool) or not float(pts).is_integer() or pts < 2:
            raise ConfigError(f"sweep.{ax}.points: integer >= 2 required")
        cfg["sweep"][ax]["points"] = int(pts)
    if cfg["photon_number"] < 0:
        raise ConfigError("photon_number: must be >= 0")

    res = cfg["resonator"]
    if cfg["tones"]["probe"]["frequency_ghz"] is None:
        cfg["tones"]["probe"]["frequency_ghz"] = res["fundamental_freq_ghz"]
    if cfg["tones"]["drive"]["frequency_ghz"] is None:
        cfg["tones"]["drive"]["frequency_ghz"] = (
            res["drive_harmonic"] * res["fundamental_freq_ghz"])
    geo = resolve_geometry(
        DeviceGeometry(**cfg["geometry"]),
        ResonatorParams(res["fundamental_freq_ghz"], res["quality_factor"],
                        res["coupling_mhz"], res["drive_harmonic"]))
    cfg["geometry"]["drive_mode_decay_mhz"] = geo.drive_mode_decay_mhz
    cfg["geometry"]["drive_coupling_mhz"] = geo.drive_coupling_mhz
    return cfg, seen


def build_point(cfg):
    qubit = QubitParams(cfg["qubit"]["gap_ghz"],
                        cfg["qubit"]["persistent_current_na"])
    bias = FluxBias(energy_bias_ghz=cfg["bias"]["energy_bias_ghz"],
                    external_flux_phi0=cfg["bias"]["external_flux_phi0"])
    res = cfg["resonator"]
    resonator = ResonatorParams(res["fundamental_freq_ghz"],
                                res["quality_factor"], res["coupling_mhz"],
                                res["drive_harmonic"])
    rates = DissipationRates(cfg["rates"]["relaxation_mhz"],
                             cfg["rates"]["pure_dephasing_mhz"])
    t = cfg["tones"]
    tones = ToneSet(
        probe=Tone(t["probe"]["amplitude_ghz"],
                   t["probe"]["frequency_ghz"], "probe"),
        drive=Tone(t["drive"]["amplitude_ghz"],
                   t["drive"]["frequency_ghz"], "drive"),
        spectroscopy=Tone(t["spectroscopy"]["amplitude_ghz"],
                          t["spectroscopy"]["frequency_ghz"],
                          "spectroscopy"))
    order = cfg["correction_order"]
    return OperatingPoint(qubit, bias, resonator, tones, rates,
                          photon_number=cfg["photon_number"],
                          correction_order=2 if order == "mixed" else order)


def build_geometry(cfg):
    return DeviceGeometry(**cfg["geometry"])


def build_axes(cfg):
    ax1 = cfg["sweep"]["axis1"]
    ax2 = cfg["sweep"]["axis2"]
    return (AxisSpec(ax1["name"], ax1["start"], ax1["stop"], ax1["points"]),
            AxisSpec(ax2["name"], ax2["start"], ax2["stop"], ax2["points"]))


def _point_order(cfg, eps_ghz):
    order = cfg["correction_order"]
    if order == "mixed":
        return 1 if eps_ghz < 0 else 2
    return order


def _write_rows_csv(path, header, rows):
    lines = [header]
    for row in rows:
        lines.append(",".join(
            cell if isinstance(cell, str) else FLOAT_FMT % cell
            for cell in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_spectroscopy(cfg, args, seen):
    op = build_point(cfg)
    ax1, ax2 = build_axes(cfg)
    result = spectroscopy_map(op, ax1, ax2, order=cfg["correction_order"],
                              normalize=cfg["normalization"],
                              mode=cfg["solve_mode"], threads=args.threads,
                              quantity=cfg["sweep"]["quantity"])
    csv_path = os.path.join(args.out, "spectroscopy.csv")
    write_map_csv(result, csv_path)
    write_sidecar(os.path.join(args.out, "spectroscopy.json"), cfg, result,
                  extra={"command": "spectroscopy",
                         "files": ["spectroscopy.csv"]})
    print(f"wrote {csv_path} "
          f"({result.values.shape[0]}x{result.values.shape[1]} points)")
    try:
        gap = extract_min_gap(result)
        print(f"minimal splitting estimate: {gap:.6f} GHz")
    except ValueError as exc:
        print(f"minimal splitting estimate unavailable: {exc}")
    return 0


def cmd_levels(cfg, args, seen):
    # the level diagram convention uses a strong spectroscopy tone
    # unless the configuration pins one explicitly
    if "tones.spectroscopy.amplitude_ghz" not in seen:
        cfg["tones"]["spectroscopy"]["amplitude_ghz"] = 0.010
    op = build_point(cfg)
    ax1, _ = build_axes(cfg)
    maps = level_diagram(op, ax1, cfg["drive_amplitudes_ghz"],
                         order=cfg["correction_order"])
    files = []
    for name in ("upper", "lower", "population"):
        csv_path = os.path.join(args.out, f"levels_{name}.csv")
        write_map_csv(maps[name], csv_path)
        files.append(f"levels_{name}.csv")
        print(f"wrote {csv_path}")
    extra = {"command": "levels", "files": files,
             "maps": {name: {"quantity": m.quantity,
                             "shape": [int(m.values.shape[0]),
                                       int(m.values.shape[1])],
                             "metadata": m.metadata}
                      for name, m in maps.items()}}
    write_sidecar(os.path.join(args.out, "levels.json"), cfg, None, extra)
    return 0


def cmd_biastrace(cfg, args, seen):
    powers = cfg["powers_dbm"]
    if not powers:
        raise ConfigError("powers_dbm: need at least one power")
    op = build_point(cfg)
    ax1, _ = build_axes(cfg)
    traces = bias_trace(op, ax1, powers, build_geometry(cfg),
                        order=cfg["correction_order"],
                        mode=cfg["solve_mode"], threads=args.threads)
    values = np.hstack([t.values for t in traces])
    warnings_union = sorted(set().union(
        *[set(t.metadata["warnings"]) for t in traces]))
    stacked = MapResult(
        "energy_bias_ghz", traces[0].axis1, "power_dbm",
        np.array([float(p) for p in powers]), "t_abs", values,
        {"order": cfg["correction_order"], "mode": cfg["solve_mode"],
         "drive_amplitudes_ghz": [t.metadata["drive_amplitude_ghz"]
                                  for t in traces],
         "warnings": warnings_union})
    csv_path = os.path.join(args.out, "biastrace.csv")
    write_map_csv(stacked, csv_path)
    write_sidecar(os.path.join(args.out, "biastrace.json"), cfg, stacked,
                  extra={"command": "biastrace", "files": ["biastrace.csv"]})
    print(f"wrote {csv_path} ({len(traces[0].axis1)} bias points x "
          f"{len(powers)} powers)")
    return 0


def cmd_calibrate(cfg, args, seen):
    powers = cfg["powers_dbm"]
    if not powers:
        raise ConfigError("powers_dbm: need at least one power")
    geo = build_geometry(cfg)
    wd = cfg["tones"]["drive"]["frequency_ghz"]
    values = np.array([[drive_from_power(p, wd, geo)] for p in powers])
    result = MapResult("power_dbm", np.array([float(p) for p in powers]),
                       "drive_frequency_ghz", np.array([float(wd)]),
                       "drive_amplitude_ghz", values,
                       {"calibration_factor": geo.calibration_factor})
    csv_path = os.path.join(args.out, "calibrate.csv")
    write_map_csv(result, csv_path)
    write_sidecar(os.path.join(args.out, "calibrate.json"), cfg, result,
                  extra={"command": "calibrate", "files": ["calibrate.csv"]})
    for p, amp in zip(powers, values[:, 0]):
        print(f"{p:+8.2f} dBm -> {amp:.6e} GHz")
    print(f"wrote {csv_path}")
    return 0


def cmd_shift(cfg, args, seen):
    op = build_point(cfg)
    eps = resolve_bias(op.qubit, op.bias)
    order = _point_order(cfg, eps)
    shift, hats = drive_response(op.qubit, op.bias, op.tones.drive,
                                 op.rates, order=order)
    wq = level_splitting(op.qubit, op.bias)
    wd = op.tones.drive.frequency_ghz
    bar_amp = effective_drive(op.qubit, op.bias,
                              op.tones.drive.amplitude_ghz)
    sz = offres_population(bar_amp, wq, wd, op.rates)
    sb = sideband_amplitudes(bar_amp, wq, wd, op.rates.decoherence_mhz, sz)
    rows = [
        ("energy_bias", "GHz", eps),
        ("bare_splitting", "GHz", wq),
        ("effective_drive", "GHz", bar_amp),
        ("level_shift", "GHz", shift.omega_ac_ghz),
        ("level_shift_exact", "GHz",
         ac_shift_exact(bar_amp, wq, wd, op.rates.decoherence_mhz)),
        ("shifted_splitting", "GHz", shift.rabi_splitting_ghz),
        ("longitudinal_weight", "1", shift.alpha),
        ("transverse_weight", "1", shift.beta),
        ("saturation_factor", "1", shift.a_factor),
        ("shift_ratio_factor", "1", shift.b_factor),
        ("correction_strength", "1", shift.c_factor),
        ("relaxation_modified", "MHz", hats.relaxation_hat_mhz),
        ("excitation_modified", "MHz", hats.excitation_hat_mhz),
        ("pure_dephasing_modified", "MHz", hats.dephasing_hat_mhz),
        ("decoherence_modified", "MHz", hats.decoherence_hat_mhz),
        ("population_drive_only", "1", sz),
        ("sideband_upper_mag", "1", abs(sb.s_plus)),
        ("sideband_lower_mag", "1", abs(sb.s_minus)),
    ]
    csv_path = os.path.join(args.out, "shift.csv")
    _write_rows_csv(csv_path, "quantity,unit,value", rows)
    write_sidecar(os.path.join(args.out, "shift.json"), cfg, None,
                  extra={"command": "shift", "files": ["shift.csv"],
                         "order": order,
                         "values": {name: float(val)
                                    for name, _, val in rows}})
    print(f"level shift: {shift.omega_ac_ghz:+.6f} GHz")
    print(f"shifted splitting: {shift.rabi_splitting_ghz:.6f} GHz")
    print(f"wrote {csv_path}")
    return 0


def cmd_oracle_compare(cfg, args, seen):
    op = build_point(cfg)
    eps = resolve_bias(op.qubit, op.bias)
    order = _point_order(cfg, eps)
    wq = level_splitting(op.qubit, op.bias)
    wd = op.tones.drive.frequency_ghz
    bar_amp = effective_drive(op.qubit, op.bias,
                              op.tones.drive.amplitude_ghz)
    # drive-only benchmark: probe and spectroscopy tones silenced and the
    # cavity decoupled so the brute-force run answers for the closed forms
    # alone; with coupling on, the cavity fills on the 1/kappa scale and
    # the steady-state detector would wait microseconds for nothing
    tones = replace(op.tones,
                    probe=replace(op.tones.probe, amplitude_ghz=0.0),
                    spectroscopy=replace(op.tones.spectroscopy,
                                         amplitude_ghz=0.0))
    bench = replace(op, tones=tones, photon_number=0.0,
                    resonator=replace(op.resonator, coupling_mhz=0.0))
    system = system_from_point(bench, fock_dim=2)
    print("integrating brute-force steady state...")
    evo = evolve_to_steady(system)
    sz_closed = offres_population(bar_amp, wq, wd, op.rates)
    sb = sideband_amplitudes(bar_amp, wq, wd, op.rates.decoherence_mhz,
                             sz_closed)
    split_closed = wq + ac_shift_approx(bar_amp, wq, wd)
    split_floquet, floquet_conv = floquet_quasienergies(
        FloquetProblem(wq, wd, bar_amp))
    exp = evo.period_averaged_expectations
    rows = [
        ("population", sz_closed, float(np.real(exp["sz"]))),
        ("sideband_upper_mag", abs(sb.s_plus), abs(exp["splus@-drive"])),
        ("sideband_lower_mag", abs(sb.s_minus), abs(exp["splus@+drive"])),
        ("shifted_splitting", split_closed, split_floquet),
    ]
    csv_path = os.path.join(args.out, "oracle_compare.csv")
    _write_rows_csv(csv_path, "quantity,closed_form,oracle,abs_error",
                    [(name, a, b, abs(a - b)) for name, a, b in rows])
    diag = {"trace_drift": evo.trace_drift,
            "min_eigenvalue": evo.min_eigenvalue,
            "windows_used": evo.windows_used,
            "window_ns": evo.window_ns,
            "floquet_convergence_ghz": floquet_conv,
            "fock_dim": 2, "order": order}
    write_sidecar(os.path.join(args.out, "oracle_compare.json"), cfg, None,
                  extra={"command": "oracle-compare",
                         "files": ["oracle_compare.csv"],
                         "diagnostics": diag})
    width = max(len(name) for name, _, _ in rows)
    for name, a, b in rows:
        print(f"{name:<{width}}  closed {a:+.6e}  oracle {b:+.6e}  "
              f"|diff| {abs(a - b):.3e}")
    print(f"wrote {csv_path}")
    return 0


_COMMANDS = {
    "levels": (cmd_levels,
               "shifted level branches and population vs bias and drive"),
    "spectroscopy": (cmd_spectroscopy,
                     "2D transmission map vs bias and spectroscopy "
                     "frequency"),
    "biastrace": (cmd_biastrace,
                  "transmission vs bias at one or more input powers"),
    "calibrate": (cmd_calibrate,
                  "input power to drive amplitude conversion table"),
    "shift": (cmd_shift,
              "closed-form shift, weights, and modified rates at one "
              "operating point"),
    "oracle-compare": (cmd_oracle_compare,
                       "closed forms against the brute-force evolution "
                       "at one operating point"),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fluxshift",
        description="Drive-shifted flux qubit levels and three-tone "
                    "dispersive readout")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None,
                        help="JSON configuration; defaults used if omitted")
    common.add_argument("--out", metavar="DIR", default=".",
                        help="output directory, created if missing")
    common.add_argument("--threads", type=int, default=None, metavar="N",
                        help=f"worker threads (default {THREADS_ENV_VAR} "
                             "env var, else 1)")
    common.add_argument("--order", type=int, choices=(1, 2), default=None,
                        help="override the correction order")
    common.add_argument("--normalize", choices=("column", "none"),
                        default=None, help="override map normalization")
    common.add_argument("--mode", choices=("fixed-n", "self-consistent"),
                        default=None, help="override the cavity photon "
                                           "treatment")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in _COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def apply_overrides(cfg, args):
    if args.order is not None:
        cfg["correction_order"] = args.order
    if args.normalize is not None:
        cfg["normalization"] = args.normalize
    if args.mode is not None:
        cfg["solve_mode"] = args.mode.replace("-", "_")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg, seen = load_config(args.config)
        apply_overrides(cfg, args)
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.command][0](cfg, args, seen)
    except Exception as exc:
        print(f"fluxshift: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
