"""Physical parameter types and elementary derived quantities.

Unit conventions used across the package: configuration and I/O carry
ordinary frequencies (GHz, the value of omega/2pi) and rates in MHz
(value of Gamma/2pi). Internal computation converts to angular frequency
in rad/ns where time enters; closed forms are homogeneous in the
frequency unit either way.
"""

from dataclasses import dataclass

import numpy as np
from scipy.constants import e as ELEMENTARY_CHARGE
from scipy.constants import h as PLANCK_H

# magnetic flux quantum h/2e in Wb
FLUX_QUANTUM = PLANCK_H / (2.0 * ELEMENTARY_CHARGE)

TWO_PI = 2.0 * np.pi

TONE_ROLES = ("probe", "drive", "spectroscopy")


def ghz_to_angular(f_ghz):
    """GHz (omega/2pi) to angular frequency in rad/ns."""
    return TWO_PI * f_ghz


def angular_to_ghz(w_rad_ns):
    return w_rad_ns / TWO_PI


def mhz_to_ghz(f_mhz):
    return f_mhz * 1e-3


@dataclass(frozen=True)
class QubitParams:
    """Flux qubit gap and persistent current.

    gap_ghz is the minimal level splitting (GHz); persistent_current_na
    sets the flux-to-bias conversion slope.
    """

    gap_ghz: float
    persistent_current_na: float

    def __post_init__(self):
        if self.gap_ghz <= 0:
            raise ValueError("gap_ghz must be > 0")
        if self.persistent_current_na <= 0:
            raise ValueError("persistent_current_na must be > 0")


@dataclass(frozen=True)
class FluxBias:
    """Operating bias, given either as an energy bias (GHz) or as the
    external flux in units of the flux quantum. Exactly one of the two."""

    energy_bias_ghz: float = None
    external_flux_phi0: float = None

    def __post_init__(self):
        given = [v is not None for v in
                 (self.energy_bias_ghz, self.external_flux_phi0)]
        if sum(given) != 1:
            raise ValueError(
                "give exactly one of energy_bias_ghz, external_flux_phi0")


@dataclass(frozen=True)
class ResonatorParams:
    """Readout resonator: fundamental mode, quality factor, qubit coupling,
    and which harmonic carries the strong drive tone."""

    fundamental_freq_ghz: float
    quality_factor: float
    coupling_mhz: float
    drive_harmonic: int = 3

    def __post_init__(self):
        if self.fundamental_freq_ghz <= 0:
            raise ValueError("fundamental_freq_ghz must be > 0")
        if self.quality_factor <= 0:
            raise ValueError("quality_factor must be > 0")
        if self.coupling_mhz < 0:
            raise ValueError("coupling_mhz must be >= 0")
        if self.drive_harmonic < 1:
            raise ValueError("drive_harmonic must be >= 1")

    @property
    def photon_decay_ghz(self):
        # kappa = omega_r/Q, derived, never stored twice
        return self.fundamental_freq_ghz / self.quality_factor

    @property
    def coupling_ghz(self):
        return mhz_to_ghz(self.coupling_mhz)


@dataclass(frozen=True)
class Tone:
    """One microwave tone: amplitude and frequency in GHz plus its role."""

    amplitude_ghz: float
    frequency_ghz: float
    role: str

    def __post_init__(self):
        if self.amplitude_ghz < 0:
            raise ValueError("amplitude_ghz must be >= 0")
        if self.frequency_ghz <= 0:
            raise ValueError("frequency_ghz must be > 0")
        if self.role not in TONE_ROLES:
            raise ValueError(f"role must be one of {TONE_ROLES}")


@dataclass(frozen=True)
class DissipationRates:
    """Bare qubit relaxation and pure dephasing rates in MHz."""

    relaxation_mhz: float
    pure_dephasing_mhz: float

    def __post_init__(self):
        if self.relaxation_mhz < 0 or self.pure_dephasing_mhz < 0:
            raise ValueError("rates must be >= 0")

    @property
    def decoherence_mhz(self):
        # Gamma_phi = Gamma_r/2 + gamma_phi, derived
        return self.relaxation_mhz / 2.0 + self.pure_dephasing_mhz

    @property
    def relaxation_ghz(self):
        return mhz_to_ghz(self.relaxation_mhz)

    @property
    def pure_dephasing_ghz(self):
        return mhz_to_ghz(self.pure_dephasing_mhz)

    @property
    def decoherence_ghz(self):
        return mhz_to_ghz(self.decoherence_mhz)


def bias_from_flux(q: QubitParams, flux: FluxBias):
    """Energy bias in GHz from an external flux given in flux quanta.

    The bias is linear in the flux offset from the half-quantum point,
    with slope 2*I_p*Phi_0/h.
    """
    if flux.external_flux_phi0 is None:
        raise ValueError("flux representation required")
    ip_amp = q.persistent_current_na * 1e-9
    slope_hz = 2.0 * ip_amp * FLUX_QUANTUM / PLANCK_H  # Hz per flux quantum
    return slope_hz * 1e-9 * (0.5 - flux.external_flux_phi0)


def flux_from_bias(q: QubitParams, energy_bias_ghz):
    """Inverse of bias_from_flux: external flux (in flux quanta) that
    realizes the given energy bias."""
    ip_amp = q.persistent_current_na * 1e-9
    slope_ghz = 2.0 * ip_amp * FLUX_QUANTUM / PLANCK_H * 1e-9
    return 0.5 - energy_bias_ghz / slope_ghz


def resolve_bias(q: QubitParams, b: FluxBias):
    """Energy bias in GHz regardless of which representation was given."""
    if b.energy_bias_ghz is not None:
        return b.energy_bias_ghz
    return bias_from_flux(q, b)


def level_splitting(q: QubitParams, b: FluxBias):
    """Qubit level splitting in GHz: hypot of gap and energy bias."""
    eps = resolve_bias(q, b)
    return float(np.hypot(q.gap_ghz, eps))


def projections(q: QubitParams, b: FluxBias):
    """Eigenbasis projection factors (bar, check) = (gap, bias)/splitting.

    bar weights transverse (sigma_x) coupling, check weights longitudinal
    (sigma_z) coupling; bar^2 + check^2 = 1.
    """
    eps = resolve_bias(q, b)
    wq = np.hypot(q.gap_ghz, eps)
    return q.gap_ghz / wq, eps / wq
