"""Closed-form consequences of the strong off-resonant drive.

Covers the driven two-level sidebands, the off-resonant steady
population, the drive-induced level shift (rotating plus
counter-rotating contributions), the shifted splitting, the coupling
renormalization factors, and the modified dissipation rates.

All public functions take and return GHz (omega/2pi) and MHz rates as
in `core`; conversion to angular frequency happens at entry.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .core import (DissipationRates, FluxBias, QubitParams, Tone,
                   angular_to_ghz, ghz_to_angular, level_splitting,
                   projections, resolve_bias)


class ValidityWarning(UserWarning):
    """Emitted when inputs leave the perturbative trust region."""


@dataclass(frozen=True)
class Detunings:
    """Drive detunings in GHz: delta_minus = wq - wd, delta_plus = wq + wd."""

    delta_minus_ghz: float
    delta_plus_ghz: float


@dataclass(frozen=True)
class ShiftResult:
    """Shift quantities at one operating point (frequencies in GHz).

    omega_ac is the signed drive-induced shift of the splitting;
    rabi_splitting_ghz the shifted splitting; alpha/beta the renormalized
    longitudinal/transverse coupling projections; a_factor, b_factor the
    second-order renormalization weights; c_factor the overall correction
    strength (quadratic in the effective drive).
    """

    omega_ac_ghz: float
    rabi_splitting_ghz: float
    alpha: float
    beta: float
    a_factor: float
    b_factor: float
    c_factor: float


@dataclass(frozen=True)
class ModifiedRates:
    """Drive-modified dissipation rates in MHz."""

    relaxation_hat_mhz: float
    excitation_hat_mhz: float
    dephasing_hat_mhz: float

    @property
    def decoherence_hat_mhz(self):
        # by analogy with the bare Gamma_phi, the excitation channel
        # contributes symmetrically to coherence decay
        return (self.relaxation_hat_mhz + self.excitation_hat_mhz) / 2.0 \
            + self.dephasing_hat_mhz

    @property
    def relaxation_hat_ghz(self):
        return self.relaxation_hat_mhz * 1e-3

    @property
    def excitation_hat_ghz(self):
        return self.excitation_hat_mhz * 1e-3

    @property
    def dephasing_hat_ghz(self):
        return self.dephasing_hat_mhz * 1e-3

    @property
    def decoherence_hat_ghz(self):
        return self.decoherence_hat_mhz * 1e-3


@dataclass(frozen=True)
class SidebandAmplitudes:
    """Stationary raising-operator components oscillating at -/+ the
    drive frequency."""

    s_plus: complex
    s_minus: complex


def effective_drive(q: QubitParams, b: FluxBias, drive_amplitude_ghz):
    """Transverse (transition-driving) part of the drive amplitude:
    the bare amplitude weighted by the gap projection."""
    bar, _ = projections(q, b)
    return bar * drive_amplitude_ghz


def detunings(wq_ghz, wd_ghz):
    return Detunings(wq_ghz - wd_ghz, wq_ghz + wd_ghz)


def sideband_amplitudes(bar_drive_ghz, wq_ghz, wd_ghz, gamma_phi_mhz, sz):
    """Stationary sideband amplitudes of the driven qubit.

    For <sigma_+> = s_plus*exp(-i*wd*t) + s_minus*exp(+i*wd*t):
    s_pm = bar_drive*sz / (2*(wq ± wd + i*Gamma_phi)).
    """
    gphi = ghz_to_angular(gamma_phi_mhz * 1e-3)
    if gphi == 0 and (wq_ghz == wd_ghz or wq_ghz == -wd_ghz):
        raise ZeroDivisionError(
            "degenerate denominator: zero detuning with zero decoherence")
    omega_bar = ghz_to_angular(bar_drive_ghz)
    wq = ghz_to_angular(wq_ghz)
    wd = ghz_to_angular(wd_ghz)
    s_plus = omega_bar * sz / (2.0 * (wq + wd + 1j * gphi))
    s_minus = omega_bar * sz / (2.0 * (wq - wd + 1j * gphi))
    return SidebandAmplitudes(s_plus, s_minus)


def offres_population(bar_drive_ghz, wq_ghz, wd_ghz,
                      rates: DissipationRates):
    """Steady qubit population under the off-resonant drive alone.

    <sigma_z> = -Gr / (Gr + bar_drive^2 * Im[1/(wq-wd-i*Gphi)
    + 1/(wq+wd-i*Gphi)]). Returns a value in [-1, 0).
    """
    if rates.relaxation_mhz <= 0:
        raise ValueError("relaxation rate must be > 0")
    gr = ghz_to_angular(rates.relaxation_ghz)
    gphi = ghz_to_angular(rates.decoherence_ghz)
    omega_bar = ghz_to_angular(bar_drive_ghz)
    wq = ghz_to_angular(wq_ghz)
    wd = ghz_to_angular(wd_ghz)
    im_sum = (1.0 / (wq - wd - 1j * gphi)
              + 1.0 / (wq + wd - 1j * gphi)).imag
    return float(-gr / (gr + omega_bar ** 2 * im_sum))


def ac_shift_exact(bar_drive_ghz, wq_ghz, wd_ghz, gamma_phi_mhz):
    """Drive-induced shift with the decoherence-regularized denominators,
    in GHz. Keeps both the co-rotating and counter-rotating terms."""
    gphi = ghz_to_angular(gamma_phi_mhz * 1e-3)
    omega_bar = ghz_to_angular(bar_drive_ghz)
    wq = ghz_to_angular(wq_ghz)
    wd = ghz_to_angular(wd_ghz)
    val = 0.5 * omega_bar ** 2 * (1.0 / (wq - wd + 1j * gphi)
                                  + 1.0 / (wq + wd - 1j * gphi)).real
    return angular_to_ghz(val)


def ac_shift_approx(bar_drive_ghz, wq_ghz, wd_ghz):
    """Large-detuning form of the shift: bar_drive^2*wq/(wq^2-wd^2), GHz.

    Signed: negative when the drive sits above the splitting.
    """
    if wq_ghz == wd_ghz:
        raise ZeroDivisionError("shift diverges at wq == wd")
    omega_bar = ghz_to_angular(bar_drive_ghz)
    wq = ghz_to_angular(wq_ghz)
    wd = ghz_to_angular(wd_ghz)
    return angular_to_ghz(omega_bar ** 2 * wq / (wq ** 2 - wd ** 2))


def rabi_splitting(q: QubitParams, b: FluxBias, omega_ac_ghz):
    """Shifted level splitting in GHz for a given shift omega_ac."""
    eps = resolve_bias(q, b)
    wq = level_splitting(q, b)
    return float(np.hypot(wq + omega_ac_ghz,
                          2.0 * eps / q.gap_ghz * omega_ac_ghz))


def correction_strength(bar_drive_ghz, det: Detunings):
    """Dimensionless correction strength, quadratic in the effective
    drive: bar_drive^2*(1/dm^2 + 1/dp^2)."""
    if det.delta_minus_ghz == 0 or det.delta_plus_ghz == 0:
        raise ZeroDivisionError("zero detuning in correction strength")
    return bar_drive_ghz ** 2 * (det.delta_minus_ghz ** -2
                                 + det.delta_plus_ghz ** -2)


def coupling_factors(q: QubitParams, b: FluxBias, drive: Tone):
    """Renormalized coupling projections (alpha, beta) and the weights
    (A, B) at second order in the drive.

    At zero drive amplitude this reduces to (check, bar, 1, 1); B takes
    its analytic limit 1 there.
    """
    eps = resolve_bias(q, b)
    wq = level_splitting(q, b)
    bar, check = projections(q, b)
    omega_bar = bar * drive.amplitude_ghz
    if omega_bar == 0:
        return check, bar, 1.0, 1.0
    det = detunings(wq, drive.frequency_ghz)
    c = correction_strength(omega_bar, det)
    a_factor = 1.0 - c / 2.0
    omega_ac = ac_shift_approx(omega_bar, wq, drive.frequency_ghz)
    b_factor = 1.0 - (omega_ac / omega_bar) ** 2
    omega_r = rabi_splitting(q, b, omega_ac)
    alpha = (eps / (wq * omega_r)) * (a_factor * (wq + omega_ac)
                                      + 2.0 * b_factor * omega_ac)
    beta = (q.gap_ghz / (wq * omega_r)) * (
        b_factor * (wq + omega_ac)
        + (2.0 * eps ** 2 / q.gap_ghz ** 2) * a_factor * omega_ac)
    return alpha, beta, a_factor, b_factor


def modified_rates(rates: DissipationRates, bar_drive_ghz, det: Detunings):
    """Drive-modified relaxation, excitation, and dephasing rates.

    Valid while the correction strength keeps every rate nonnegative;
    raises otherwise, warns when the correction strength reaches 1.
    """
    c = correction_strength(bar_drive_ghz, det) if bar_drive_ghz else 0.0
    if c >= 1.0:
        warnings.warn(
            f"correction strength {c:.3f} >= 1, outside the perturbative "
            "trust region", ValidityWarning, stacklevel=2)
    gr = rates.relaxation_mhz
    gphi = rates.pure_dephasing_mhz
    r_hat = gr - (c / 2.0) * (gr - gphi)
    e_hat = (c / 2.0) * gphi
    d_hat = gphi + (c / 2.0) * (gr - 2.0 * gphi)
    bad = [name for name, v in
           (("relaxation", r_hat), ("excitation", e_hat),
            ("dephasing", d_hat)) if v < 0]
    if bad:
        raise ValueError(
            f"negative modified rate(s) {bad} at correction strength "
            f"{c:.4f}: inputs leave the validity region")
    return ModifiedRates(r_hat, e_hat, d_hat)


def drive_response(q: QubitParams, b: FluxBias, drive: Tone,
                   rates: DissipationRates, order=2):
    """Full shift evaluation at one operating point.

    Returns (ShiftResult, ModifiedRates). order=2 applies the coupling
    and dissipation corrections; order=1 keeps only the level shift
    (alpha, beta, rates stay at their undriven values). A validity
    warning is emitted when the effective drive exceeds 0.3 of the
    co-rotating detuning magnitude.
    """
    if drive.role != "drive":
        raise ValueError("drive_response needs the drive tone")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    wq = level_splitting(q, b)
    bar, check = projections(q, b)
    omega_bar = bar * drive.amplitude_ghz
    det = detunings(wq, drive.frequency_ghz)
    if omega_bar and abs(omega_bar / det.delta_minus_ghz) > 0.3:
        warnings.warn(
            f"effective drive is {abs(omega_bar / det.delta_minus_ghz):.2f} "
            "of the detuning; second-order results degrade",
            ValidityWarning, stacklevel=2)
    if omega_bar == 0:
        shift = ShiftResult(0.0, wq, check, bar, 1.0, 1.0, 0.0)
        return shift, ModifiedRates(rates.relaxation_mhz, 0.0,
                                    rates.pure_dephasing_mhz)
    omega_ac = ac_shift_approx(omega_bar, wq, drive.frequency_ghz)
    omega_r = rabi_splitting(q, b, omega_ac)
    if order == 1:
        shift = ShiftResult(omega_ac, omega_r, check, bar, 1.0, 1.0, 0.0)
        hats = ModifiedRates(rates.relaxation_mhz, 0.0,
                             rates.pure_dephasing_mhz)
        return shift, hats
    alpha, beta, a_factor, b_factor = coupling_factors(q, b, drive)
    c = correction_strength(omega_bar, det)
    shift = ShiftResult(omega_ac, omega_r, alpha, beta, a_factor,
                        b_factor, c)
    return shift, modified_rates(rates, omega_bar, det)
