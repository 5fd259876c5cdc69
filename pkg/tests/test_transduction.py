from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from moqtlab.errors import ModelError
from moqtlab.transduction import (
    MicrowaveModeParams,
    OpticalModeParams,
    PumpDrive,
    TransducerState,
    bandwidth_3db,
    calibrate_heating,
    calibrate_link,
    conversion_efficiency,
    cooperativity,
    efficiency_sweep,
    enhanced_coupling,
    heated_state,
    ideal_peak_efficiency,
    pump_heating_model,
    pump_photon_number,
    scattering_matrix,
    sweep_point,
)
from moqtlab.units import Transmittance

F_MINUS = 1.9594278e14
F_M = 3.71e9


def _device_state(
    power_w: float = 44.2e-6,
    detuning_hz: float = 0.0,
    kappa_m_i: float = 1.747e6,
    kappa_m_e: float = 6.37e6,
    g_eo_hz: float = 945.0,
) -> TransducerState:
    return TransducerState(
        optical_minus=OpticalModeParams(f_hz=F_MINUS, kappa_i_hz=25e6, kappa_e_hz=55e6),
        optical_plus=OpticalModeParams(f_hz=F_MINUS + F_M, kappa_i_hz=25e6, kappa_e_hz=55e6),
        microwave=MicrowaveModeParams(f_hz=F_M, kappa_i_hz=kappa_m_i, kappa_e_hz=kappa_m_e),
        g_eo_hz=g_eo_hz,
        pump=PumpDrive(
            power_peak_w=power_w,
            detuning_hz=detuning_hz,
            wavelength_m=1.53e-6,
            pulse_width_s=150e-9,
            rep_rate_hz=0.02 / 150e-9,
        ),
    )


def test_pump_photon_number_hand_value():
    # 44.2 uW at 1530 nm is 3.404e14 photons/s; on resonance the Lorentzian
    # factor is kappa_e / (kappa/2)^2 with angular rates, giving 1.8625e6
    state = _device_state()
    n = pump_photon_number(state.pump, state.optical_minus)
    assert n == pytest.approx(1.8625e6, rel=2e-4)


def test_pump_photon_number_detuning_halving():
    # at delta = kappa/2 the Lorentzian denominator exactly doubles
    on = _device_state(detuning_hz=0.0)
    off = _device_state(detuning_hz=40e6)
    n_on = pump_photon_number(on.pump, on.optical_minus)
    n_off = pump_photon_number(off.pump, off.optical_minus)
    assert n_off == pytest.approx(n_on / 2.0, rel=1e-12)


def test_pump_photon_number_linear_in_power():
    lo = _device_state(power_w=10e-6)
    hi = _device_state(power_w=20e-6)
    assert pump_photon_number(hi.pump, hi.optical_minus) == pytest.approx(
        2.0 * pump_photon_number(lo.pump, lo.optical_minus), rel=1e-12
    )
    zero = replace(lo.pump, power_peak_w=0.0)
    assert pump_photon_number(zero, lo.optical_minus) == 0.0


def test_enhanced_coupling_scaling():
    assert enhanced_coupling(945.0, 4.0) == pytest.approx(1890.0, rel=1e-15)
    assert enhanced_coupling(945.0, 0.0) == 0.0
    # quadrupling the photon number doubles g
    assert enhanced_coupling(945.0, 4e6) == pytest.approx(
        2.0 * enhanced_coupling(945.0, 1e6), rel=1e-15
    )


def test_cooperativity_formula_and_inversion():
    # C = 4 g^2 n / (k+ k_m); inverting at C = 0.0116 with the quoted rates
    # gives n = 0.0116 * 80e6 * 16e6 / (4 * 945^2) = 4156658.548
    n = 0.0116 * 80e6 * 16e6 / (4.0 * 945.0**2)
    assert cooperativity(945.0, n, 80e6, 16e6) == pytest.approx(0.0116, rel=1e-12)
    assert n == pytest.approx(4.1566585e6, rel=1e-7)


def test_cooperativity_unit_ratio_invariance():
    # C is a ratio of rate products: expressing every rate as angular
    # multiplies numerator and denominator by (2 pi)^2 each
    two_pi = 2.0 * math.pi
    plain = cooperativity(945.0, 1.8e6, 80e6, 16e6)
    angular = cooperativity(945.0 * two_pi, 1.8e6, 80e6 * two_pi, 16e6 * two_pi)
    assert angular == pytest.approx(plain, rel=1e-12)


def test_scattering_matrix_reciprocity_is_structural():
    state = _device_state()
    s = scattering_matrix(state, 1.3e6)
    assert s.shape == (2, 2)
    # same expression stored twice, so the difference is exactly zero
    assert s[0, 1] == s[1, 0]


def test_scattering_matrix_passive():
    state = _device_state()
    for delta in (0.0, 0.5e6, 2e6, 40e6, -3e6):
        s = scattering_matrix(state, delta)
        assert abs(s[0, 1]) ** 2 <= 1.0 + 1e-12
        assert abs(s[0, 0]) <= 1.0 + 1e-12
        assert abs(s[1, 1]) <= 1.0 + 1e-12


def test_peak_efficiency_matches_closed_form_at_large_c():
    # closed form is exact at any cooperativity, not only C << 1; drive the
    # device hard enough that C is order one
    state = _device_state(power_w=5e-3, kappa_m_i=0.5e6, kappa_m_e=1.5e6)
    n = pump_photon_number(state.pump, state.optical_minus)
    coop = cooperativity(state.g_eo_hz, n, 80e6, 2e6)
    assert coop > 0.3
    eta_peak, _ = conversion_efficiency(state)
    expected = ideal_peak_efficiency(55e6 / 80e6, 1.5e6 / 2e6, coop)
    assert eta_peak == pytest.approx(expected, rel=1e-10)


def test_conversion_efficiency_peaks_on_resonance():
    state = _device_state()
    eta_peak, sample = conversion_efficiency(state)
    assert eta_peak == pytest.approx(sample(0.0), rel=1e-15)
    assert sample(2e6) < eta_peak
    assert sample(-2e6) < eta_peak


def test_efficiency_symmetric_at_triple_resonance():
    _, sample = conversion_efficiency(_device_state())
    assert sample(1.7e6) == pytest.approx(sample(-1.7e6), rel=1e-9)


def test_bandwidth_weak_coupling_limit():
    # g << kappa: the optical Lorentzian is flat over the microwave line, so
    # the width collapses to kappa_m * (1 + C) ~ kappa_m
    state = _device_state(power_w=1e-7, kappa_m_i=0.25e6, kappa_m_e=0.75e6)
    state = replace(
        state,
        optical_minus=replace(state.optical_minus, kappa_i_hz=30e6, kappa_e_hz=70e6),
        optical_plus=replace(state.optical_plus, kappa_i_hz=30e6, kappa_e_hz=70e6),
    )
    n = pump_photon_number(state.pump, state.optical_minus)
    coop = cooperativity(state.g_eo_hz, n, 100e6, 1e6)
    assert coop < 0.05
    bw = bandwidth_3db(state)
    assert bw == pytest.approx(1e6 * (1.0 + coop), rel=2e-2)


def test_bandwidth_crossings_sit_at_half_power():
    state = _device_state()
    eta_peak, sample = conversion_efficiency(state)
    bw = bandwidth_3db(state)
    assert sample(bw / 2.0) == pytest.approx(eta_peak / 2.0, rel=1e-6)
    assert sample(-bw / 2.0) == pytest.approx(eta_peak / 2.0, rel=1e-6)


def test_pump_heating_model_linearity():
    base = MicrowaveModeParams(f_hz=F_M, kappa_i_hz=1.747e6, kappa_e_hz=6.37e6)
    cold = pump_heating_model(0.0, base, 3.262e12, 3.0e12)
    assert cold == base
    hot = pump_heating_model(1e-6, base, 3.262e12, 3.0e12)
    assert hot.kappa_i_hz == pytest.approx(1.747e6 + 3.262e6, rel=1e-12)
    assert hot.f_hz == pytest.approx(F_M - 3.0e6, rel=1e-12)
    assert hot.kappa_e_hz == base.kappa_e_hz
    hotter = pump_heating_model(2e-6, base, 3.262e12, 3.0e12)
    assert hotter.kappa_i_hz - base.kappa_i_hz == pytest.approx(
        2.0 * (hot.kappa_i_hz - base.kappa_i_hz), rel=1e-12
    )


def test_pump_heating_model_rejects_negative_coefficients():
    base = MicrowaveModeParams(f_hz=F_M, kappa_i_hz=1.747e6, kappa_e_hz=6.37e6)
    with pytest.raises(ValueError):
        pump_heating_model(1e-6, base, -1.0, 0.0)


def test_heated_state_average_power_is_plain_duty():
    state = _device_state()
    hot = heated_state(state, 30e-6, (150e-9, 1e6), 3.262e12, 3.0e12)
    # p_avg = 30 uW * 0.15 = 4.5 uW, no pulse-shape factor here
    assert hot.pump.power_avg_w == pytest.approx(4.5e-6, rel=1e-12)
    assert hot.microwave.kappa_i_hz == pytest.approx(1.747e6 + 3.262e12 * 4.5e-6, rel=1e-12)
    assert hot.microwave.f_hz == pytest.approx(F_M - 3.0e12 * 4.5e-6, rel=1e-12)


def test_heated_state_cw_uses_peak_power():
    state = _device_state()
    hot = heated_state(state, 2e-6, None, 3.262e12, 0.0)
    assert hot.pump.duty == 1.0
    assert hot.microwave.kappa_i_hz == pytest.approx(1.747e6 + 3.262e12 * 2e-6, rel=1e-12)


def test_efficiency_sweep_structure():
    state = _device_state()
    rows = efficiency_sweep(state, [0.0, 10e-6, 20e-6], [(150e-9, 0.02 / 150e-9)])
    assert len(rows) == 3
    assert rows[0].eta_peak == 0.0
    assert rows[0].n_pump == 0.0
    # without heating the efficiency grows monotonically at small C
    assert rows[0].eta_peak < rows[1].eta_peak < rows[2].eta_peak
    assert rows[1].duty == pytest.approx(0.02, rel=1e-12)
    assert rows[1].p_avg_w == pytest.approx(10e-6 * 0.02, rel=1e-12)


def test_efficiency_sweep_rejects_empty_grids():
    state = _device_state()
    with pytest.raises(ValueError):
        efficiency_sweep(state, [], [(150e-9, 1e6)])
    with pytest.raises(ValueError):
        efficiency_sweep(state, [1e-6], [])


def test_sweep_point_consistency():
    state = _device_state()
    point = sweep_point(state)
    eta_peak, _ = conversion_efficiency(state)
    assert point.eta_peak == pytest.approx(eta_peak, rel=1e-12)
    assert point.g_hz == pytest.approx(
        enhanced_coupling(945.0, point.n_pump), rel=1e-12
    )


def test_calibrate_heating_round_trip():
    # manufacture the measurements from known coefficients, then recover them
    state = _device_state()
    truth = (3.262e12, 3.0e12)
    sched_cold = (150e-9, 0.02 / 150e-9)
    sched_hot = (150e-9, 1e6)
    eta_cold = conversion_efficiency(heated_state(state, 44.2e-6, sched_cold, *truth))[0]
    eta_hot = conversion_efficiency(heated_state(state, 30e-6, sched_hot, *truth))[0]
    anchors = [(44.2e-6, sched_cold, eta_cold), (30e-6, sched_hot, eta_hot)]
    b_loss, b_shift = calibrate_heating(state, anchors)
    assert b_loss == pytest.approx(truth[0], rel=1e-6)
    assert b_shift == pytest.approx(truth[1], rel=1e-6)


def test_calibrate_heating_anchor_order_is_irrelevant():
    state = _device_state()
    anchors = [
        (44.2e-6, (150e-9, 0.02 / 150e-9), 0.0118),
        (30e-6, (150e-9, 1e6), 0.00170),
    ]
    forward = calibrate_heating(state, anchors)
    backward = calibrate_heating(state, list(reversed(anchors)))
    assert forward == backward


def test_calibrate_heating_validation():
    state = _device_state()
    with pytest.raises(ValueError):
        calibrate_heating(state, [(44.2e-6, None, 0.0118)])
    with pytest.raises(ValueError):
        calibrate_heating(state, [(44.2e-6, None, 0.0118), (30e-6, None, -0.1)])


def test_calibrate_heating_inconsistent_anchors():
    state = _device_state()
    # an efficiency above the unheated model cannot be reached with
    # non-negative heating coefficients
    anchors = [
        (44.2e-6, (150e-9, 0.02 / 150e-9), 0.5),
        (30e-6, (150e-9, 1e6), 0.00170),
    ]
    with pytest.raises(ModelError):
        calibrate_heating(state, anchors)


def test_calibrate_link_round_trip():
    # build the two measured power ratios from known link parameters
    eta_m_in, eta_m_out, eta_t = 0.9, 0.85, 2e-5
    opt_in, opt_out = Transmittance(0.5), Transmittance(0.6)
    f_o, f_m = F_MINUS, F_M
    meas_fwd = (f_o / f_m) * eta_m_in * opt_out.ratio * eta_t
    meas_rev = (f_m / f_o) * opt_in.ratio * eta_m_out * eta_t

    cal = calibrate_link(meas_fwd, meas_rev, opt_in, opt_out, f_o, f_m, eta_m_in=0.9)
    assert cal.eta_transducer == pytest.approx(eta_t, rel=1e-12)
    assert cal.eta_m_out == pytest.approx(eta_m_out, rel=1e-12)
    assert cal.eta_m_product == pytest.approx(eta_m_in * eta_m_out, rel=1e-12)

    # closing on a different unknown lands on the same solution
    cal2 = calibrate_link(meas_fwd, meas_rev, opt_in, opt_out, f_o, f_m, eta_transducer=eta_t)
    assert cal2.eta_m_in == pytest.approx(eta_m_in, rel=1e-12)
    assert cal2.eta_m_out == pytest.approx(eta_m_out, rel=1e-12)


def test_calibrate_link_requires_exactly_one_closure():
    opt = Transmittance(0.5)
    with pytest.raises(ValueError):
        calibrate_link(1e-3, 1e-9, opt, opt, F_MINUS, F_M)
    with pytest.raises(ValueError):
        calibrate_link(1e-3, 1e-9, opt, opt, F_MINUS, F_M, eta_m_in=0.9, eta_m_out=0.9)


def test_calibrate_link_rejects_unphysical_inference():
    # claiming a tiny input gain forces eta_t far above unity
    eta_m_in, eta_m_out, eta_t = 0.9, 0.85, 2e-5
    opt_in, opt_out = Transmittance(0.5), Transmittance(0.6)
    meas_fwd = (F_MINUS / F_M) * eta_m_in * opt_out.ratio * eta_t
    meas_rev = (F_M / F_MINUS) * opt_in.ratio * eta_m_out * eta_t
    with pytest.raises(ModelError):
        calibrate_link(meas_fwd, meas_rev, opt_in, opt_out, F_MINUS, F_M, eta_m_in=1e-9)


def test_state_mismatch_and_triple_resonance():
    state = _device_state()
    assert state.mismatch_hz == 0.0
    assert state.is_triple_resonant
    shifted = replace(
        state, microwave=replace(state.microwave, f_hz=F_M - 5e6)
    )
    assert shifted.mismatch_hz == pytest.approx(5e6, rel=1e-9)
    assert not shifted.is_triple_resonant


def test_pump_drive_validation():
    with pytest.raises(ValueError):
        PumpDrive(power_peak_w=1e-6)  # pulsed but no schedule
    with pytest.raises(ValueError):
        PumpDrive(power_peak_w=1e-6, pulse_width_s=1e-6, rep_rate_hz=2e6)  # duty 2
    cw = PumpDrive(power_peak_w=1e-6, cw=True)
    assert cw.duty == 1.0
    assert cw.power_avg_w == pytest.approx(1e-6, rel=1e-15)
