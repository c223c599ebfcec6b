"""Stationary semiclassical solution of the probed cavity coupled to the
shifted qubit under the spectroscopy tone.

Qubit and cavity expectation values are factorized here by
construction; entangled corrections live only in the oracle module.
"""

from dataclasses import dataclass, field

from .core import (DissipationRates, FluxBias, QubitParams, ResonatorParams,
                   Tone, ghz_to_angular)
from .driveshift import ModifiedRates, ShiftResult, drive_response

SOLVE_MODES = ("fixed_n", "self_consistent")


@dataclass(frozen=True)
class ToneSet:
    """The three tones: weak probe at the fundamental mode, strong
    off-resonant drive, weak spectroscopy tone."""

    probe: Tone
    drive: Tone
    spectroscopy: Tone

    def __post_init__(self):
        for tone, role in ((self.probe, "probe"), (self.drive, "drive"),
                           (self.spectroscopy, "spectroscopy")):
            if tone.role != role:
                raise ValueError(f"tone in slot {role} has role {tone.role}")


@dataclass(frozen=True)
class OperatingPoint:
    """Everything needed for one steady-state solve."""

    qubit: QubitParams
    bias: FluxBias
    resonator: ResonatorParams
    tones: ToneSet
    rates: DissipationRates
    photon_number: float = 5.0
    correction_order: int = 2

    def __post_init__(self):
        if self.photon_number < 0:
            raise ValueError("photon_number must be >= 0")
        if self.correction_order not in (1, 2):
            raise ValueError("correction_order must be 1 or 2")

    def probe_amplitude_ghz(self):
        """Explicit probe amplitude if set, else back-computed from the
        configured resonant photon number: kappa*sqrt(N)/2."""
        if self.tones.probe.amplitude_ghz > 0:
            return self.tones.probe.amplitude_ghz
        kappa = self.resonator.photon_decay_ghz
        return kappa * self.photon_number ** 0.5 / 2.0


@dataclass(frozen=True)
class SteadyState:
    """Solution at one operating point."""

    cavity_amplitude: complex
    population: float
    transmission: complex
    sidebands: tuple  # (s_p at the probe frequency, s_s at the spectroscopy frequency)
    solved_photon_number: float = field(default=0.0)
    iterations: int = field(default=0)


def _angular(op: OperatingPoint, shift: ShiftResult,
             rates_hat: ModifiedRates):
    """Common angular-frequency ingredients (rad/ns)."""
    wr = ghz_to_angular(op.resonator.fundamental_freq_ghz)
    wp = ghz_to_angular(op.tones.probe.frequency_ghz)
    ws = ghz_to_angular(op.tones.spectroscopy.frequency_ghz)
    omega_r = ghz_to_angular(shift.rabi_splitting_ghz)
    kappa = ghz_to_angular(op.resonator.photon_decay_ghz)
    g = ghz_to_angular(op.resonator.coupling_ghz)
    gphi_hat = ghz_to_angular(rates_hat.decoherence_hat_ghz)
    return wr, wp, ws, omega_r, kappa, g, gphi_hat


def qubit_population(op: OperatingPoint, shift: ShiftResult,
                     rates_hat: ModifiedRates, n_photon):
    """Steady qubit population with both saturation channels: the probe
    field (through the cavity coupling, weight 4 g^2 N) and the direct
    spectroscopy tone."""
    _, wp, ws, omega_r, _, g, gphi_hat = _angular(op, shift, rates_hat)
    ge = ghz_to_angular(rates_hat.excitation_hat_ghz)
    gr = ghz_to_angular(rates_hat.relaxation_hat_ghz)
    omega_s = ghz_to_angular(op.tones.spectroscopy.amplitude_ghz)
    d_probe = (omega_r - wp) ** 2 + gphi_hat ** 2
    d_spec = (omega_r - ws) ** 2 + gphi_hat ** 2
    saturation = shift.beta ** 2 * gphi_hat * (
        4.0 * g ** 2 * n_photon / d_probe + omega_s ** 2 / d_spec)
    return float((ge - gr) / (ge + gr + saturation))


def cavity_amplitude(op: OperatingPoint, shift: ShiftResult,
                     rates_hat: ModifiedRates, sz):
    """Stationary cavity field amplitude under the qubit pull."""
    wr, wp, _, omega_r, kappa, g, gphi_hat = _angular(op, shift, rates_hat)
    if kappa <= 0:
        raise ValueError("photon decay must be > 0")
    omega_p = ghz_to_angular(op.probe_amplitude_ghz())
    pull = g ** 2 * shift.beta ** 2 * sz / (omega_r - wp - 1j * gphi_hat)
    return -omega_p / ((wr - wp) - 1j * kappa / 2.0 + pull)


def transmission(op: OperatingPoint, shift: ShiftResult,
                 rates_hat: ModifiedRates, sz):
    """Complex transmission coefficient through the resonator."""
    wr, wp, _, omega_r, kappa, g, gphi_hat = _angular(op, shift, rates_hat)
    if kappa <= 0:
        raise ValueError("photon decay must be > 0")
    pull = g ** 2 * shift.beta ** 2 * sz / (omega_r - wp - 1j * gphi_hat)
    return 1j * kappa / 2.0 / ((wr - wp) - 1j * kappa / 2.0 + pull)


def spectroscopy_sidebands(op: OperatingPoint, shift: ShiftResult,
                           rates_hat: ModifiedRates, sz, a):
    """Lowering-operator components at the probe and spectroscopy
    frequencies for a given population and cavity amplitude."""
    _, wp, ws, omega_r, _, g, gphi_hat = _angular(op, shift, rates_hat)
    omega_s = ghz_to_angular(op.tones.spectroscopy.amplitude_ghz)
    s_p = shift.beta * g * sz * a / (omega_r - wp - 1j * gphi_hat)
    s_s = shift.beta * omega_s * sz / (2.0 * (omega_r - ws - 1j * gphi_hat))
    return s_p, s_s


def solve_prepared(op: OperatingPoint, shift: ShiftResult,
                   rates_hat: ModifiedRates, mode="fixed_n"):
    """Steady state with shift quantities already evaluated (lets sweeps
    reuse one drive evaluation across a spectroscopy-frequency column)."""
    if mode not in SOLVE_MODES:
        raise ValueError(f"mode must be one of {SOLVE_MODES}")
    if mode == "fixed_n":
        sz = qubit_population(op, shift, rates_hat, op.photon_number)
        a = cavity_amplitude(op, shift, rates_hat, sz)
        t = transmission(op, shift, rates_hat, sz)
        return SteadyState(a, sz, t, spectroscopy_sidebands(
            op, shift, rates_hat, sz, a), op.photon_number, 0)
    # self-consistent photon number: probe amplitude stays fixed by the
    # configured N, the saturation term tracks |<a>|^2
    n = op.photon_number
    for it in range(1, 10001):
        sz = qubit_population(op, shift, rates_hat, n)
        a = cavity_amplitude(op, shift, rates_hat, sz)
        n_next = n + 0.5 * (abs(a) ** 2 - n)
        delta, n = abs(n_next - n), n_next
        if delta < 1e-9:
            t = transmission(op, shift, rates_hat, sz)
            return SteadyState(a, sz, t, spectroscopy_sidebands(
                op, shift, rates_hat, sz, a), n, it)
    raise RuntimeError(
        "self-consistent photon number did not converge in 10000 "
        f"iterations (last |dN| = {delta:.3e})")


def solve(op: OperatingPoint, mode="fixed_n"):
    """Full steady-state solve at one operating point."""
    shift, rates_hat = drive_response(op.qubit, op.bias, op.tones.drive,
                                      op.rates, order=op.correction_order)
    return solve_prepared(op, shift, rates_hat, mode)
