import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fluxshift.core import DissipationRates, FluxBias, QubitParams, Tone
from fluxshift.driveshift import (ValidityWarning, ac_shift_approx,
                                  ac_shift_exact, correction_strength,
                                  coupling_factors, detunings,
                                  drive_response, effective_drive,
                                  modified_rates, offres_population,
                                  rabi_splitting, sideband_amplitudes)

QUBIT = QubitParams(2.97, 160.0)
RATES = DissipationRates(10.0, 20.0)
B0 = FluxBias(energy_bias_ghz=0.0)
WQ0 = 2.97
WD = 7.77


def test_shift_frozen_values():
    # drive above the splitting pushes the levels together
    for amp, want in ((1.0, -0.05761173), (2.0, -0.23044693),
                      (3.0, -0.51850559)):
        assert ac_shift_approx(amp, WQ0, WD) == pytest.approx(want, rel=1e-6)


@given(st.floats(0.01, 3.0), st.floats(0.1, 4.0))
def test_shift_scales_quadratically(amp, scale):
    base = ac_shift_approx(amp, WQ0, WD)
    assert ac_shift_approx(scale * amp, WQ0, WD) \
        == pytest.approx(scale ** 2 * base, rel=1e-9)


def test_shift_sign_tracks_detuning():
    assert ac_shift_approx(1.0, 2.97, 7.77) < 0   # drive above splitting
    assert ac_shift_approx(1.0, 9.0, 7.77) > 0    # drive below splitting


def test_shift_diverges_at_resonance():
    with pytest.raises(ZeroDivisionError):
        ac_shift_approx(1.0, 7.77, 7.77)


def test_exact_shift_matches_frozen_deviation():
    ex = ac_shift_exact(1.0, WQ0, WD, 25.0)
    ap = ac_shift_approx(1.0, WQ0, WD)
    assert (ex - ap) / abs(ap) == pytest.approx(4.4668e-5, rel=1e-3)


def test_exact_shift_reduces_to_approx_without_decoherence():
    assert ac_shift_exact(1.0, WQ0, WD, 0.0) \
        == pytest.approx(ac_shift_approx(1.0, WQ0, WD), rel=1e-12)


def test_effective_drive_is_transverse_projection():
    assert effective_drive(QUBIT, B0, 2.0) == pytest.approx(2.0, rel=1e-12)
    bar = 2.97 / np.hypot(2.97, 2.0)
    assert effective_drive(QUBIT, FluxBias(energy_bias_ghz=2.0), 2.0) \
        == pytest.approx(2.0 * bar, rel=1e-12)


def test_correction_strength_frozen():
    c = correction_strength(1.0, detunings(WQ0, WD))
    assert c == pytest.approx(0.05207223, rel=1e-6)


def test_modified_rates_frozen():
    hats = modified_rates(RATES, 1.0, detunings(WQ0, WD))
    assert hats.relaxation_hat_mhz == pytest.approx(10.26036113, rel=1e-8)
    assert hats.excitation_hat_mhz == pytest.approx(0.52072226, rel=1e-8)
    assert hats.dephasing_hat_mhz == pytest.approx(19.21891662, rel=1e-8)
    assert hats.decoherence_hat_mhz == pytest.approx(24.60945831, rel=1e-8)


@given(st.floats(0.0, 1.4), st.floats(0.5, 30.0), st.floats(0.0, 30.0))
def test_rate_sum_identity(amp, gr, gphi):
    # relaxation + excitation keeps the closed-form combination
    # Gr - (C/2)(Gr - 2*gphi) whatever the drive strength
    det = detunings(WQ0, WD)
    c = correction_strength(amp, det) if amp else 0.0
    rates = DissipationRates(gr, gphi)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            hats = modified_rates(rates, amp, det)
    except ValueError:
        return  # outside the validity region, checked elsewhere
    want = gr - (c / 2.0) * (gr - 2.0 * gphi)
    assert hats.relaxation_hat_mhz + hats.excitation_hat_mhz \
        == pytest.approx(want, abs=1e-10)
    assert hats.decoherence_hat_mhz == pytest.approx(
        (hats.relaxation_hat_mhz + hats.excitation_hat_mhz) / 2.0
        + hats.dephasing_hat_mhz, abs=1e-12)


def test_modified_rates_zero_drive_are_bare():
    hats = modified_rates(RATES, 0.0, detunings(WQ0, WD))
    assert hats.relaxation_hat_mhz == RATES.relaxation_mhz
    assert hats.excitation_hat_mhz == 0.0
    assert hats.dephasing_hat_mhz == RATES.pure_dephasing_mhz


def test_modified_rates_negative_raises_with_name():
    # strong drive close to resonance drives the dephasing rate negative
    det = detunings(6.77, WD)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ValueError, match="dephasing"):
            modified_rates(RATES, 0.9, det)


def test_validity_warning_at_large_correction():
    det = detunings(6.77, WD)
    with pytest.warns(ValidityWarning):
        try:
            modified_rates(RATES, 1.1, det)
        except ValueError:
            pass


def test_coupling_factors_frozen():
    _, _, a_factor, b_factor = coupling_factors(QUBIT, B0, Tone(1.0, WD,
                                                                "drive"))
    assert a_factor == pytest.approx(0.97396389, rel=1e-8)
    assert b_factor == pytest.approx(0.99668089, rel=1e-8)


def test_coupling_factors_zero_drive_limit():
    alpha, beta, a_factor, b_factor = coupling_factors(
        QUBIT, FluxBias(energy_bias_ghz=2.0), Tone(0.0, WD, "drive"))
    bar = 2.97 / np.hypot(2.97, 2.0)
    check = 2.0 / np.hypot(2.97, 2.0)
    assert (alpha, beta) == (check, bar)
    assert (a_factor, b_factor) == (1.0, 1.0)


@given(st.floats(0.1, 4.0), st.floats(0.1, 2.0))
def test_alpha_odd_beta_even_in_bias(eps, amp):
    drive = Tone(amp, WD, "drive")
    ap, bp, _, _ = coupling_factors(QUBIT, FluxBias(energy_bias_ghz=eps),
                                    drive)
    am, bm, _, _ = coupling_factors(QUBIT, FluxBias(energy_bias_ghz=-eps),
                                    drive)
    assert ap == pytest.approx(-am, rel=1e-9, abs=1e-12)
    assert bp == pytest.approx(bm, rel=1e-9)


def test_frozen_point_bias_two_drive_two():
    b2 = FluxBias(energy_bias_ghz=2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        shift, hats = drive_response(QUBIT, b2, Tone(2.0, WD, "drive"),
                                     RATES)
    assert effective_drive(QUBIT, b2, 2.0) == pytest.approx(1.65892667,
                                                            rel=1e-8)
    assert shift.omega_ac_ghz == pytest.approx(-0.20722629, rel=1e-7)
    assert shift.rabi_splitting_ghz == pytest.approx(3.38492759, rel=1e-8)
    assert shift.alpha == pytest.approx(0.43974745, rel=1e-7)
    assert shift.beta == pytest.approx(0.77178858, rel=1e-7)


def test_rabi_splitting_at_symmetry_point_is_shifted_sum():
    # the longitudinal component vanishes at zero bias
    w_ac = ac_shift_approx(1.0, WQ0, WD)
    assert rabi_splitting(QUBIT, B0, w_ac) == pytest.approx(WQ0 + w_ac,
                                                            rel=1e-12)


def test_population_zero_drive_is_ground():
    assert offres_population(0.0, WQ0, WD, RATES) == -1.0


def test_population_frozen_value():
    sz = offres_population(0.4, WQ0, WD, RATES)
    assert sz == pytest.approx(-0.97959657, rel=1e-7)


@given(st.floats(0.0, 2.0))
def test_population_bounded(amp):
    sz = offres_population(amp, WQ0, WD, RATES)
    assert -1.0 <= sz < 0.0


def test_population_needs_relaxation():
    with pytest.raises(ValueError):
        offres_population(0.4, WQ0, WD, DissipationRates(0.0, 20.0))


def test_sideband_frozen_values():
    sz = offres_population(0.4, WQ0, WD, RATES)
    sb = sideband_amplitudes(0.4, WQ0, WD, RATES.decoherence_mhz, sz)
    assert sb.s_plus.real == pytest.approx(-1.8241923e-2, rel=1e-6)
    assert sb.s_plus.imag == pytest.approx(4.2463e-5, rel=1e-3)
    # the co-rotating component is the larger one
    assert abs(sb.s_minus) > abs(sb.s_plus)


def test_sideband_degenerate_raises():
    with pytest.raises(ZeroDivisionError):
        sideband_amplitudes(0.4, WD, WD, 0.0, -1.0)


def test_drive_response_validates_inputs():
    with pytest.raises(ValueError):
        drive_response(QUBIT, B0, Tone(1.0, WD, "probe"), RATES)
    with pytest.raises(ValueError):
        drive_response(QUBIT, B0, Tone(1.0, WD, "drive"), RATES, order=3)


def test_drive_response_first_order_keeps_bare_projections():
    shift2, hats2 = drive_response(QUBIT, B0, Tone(1.0, WD, "drive"),
                                   RATES, order=2)
    shift1, hats1 = drive_response(QUBIT, B0, Tone(1.0, WD, "drive"),
                                   RATES, order=1)
    assert shift1.omega_ac_ghz == shift2.omega_ac_ghz
    assert shift1.rabi_splitting_ghz == shift2.rabi_splitting_ghz
    assert (shift1.alpha, shift1.beta) == (0.0, 1.0)
    assert (shift1.a_factor, shift1.b_factor) == (1.0, 1.0)
    assert hats1.relaxation_hat_mhz == RATES.relaxation_mhz
    assert hats1.excitation_hat_mhz == 0.0
    assert hats1.dephasing_hat_mhz == RATES.pure_dephasing_mhz


def test_drive_response_warns_on_strong_drive():
    with pytest.warns(ValidityWarning):
        drive_response(QUBIT, B0, Tone(2.0, WD, "drive"), RATES)
