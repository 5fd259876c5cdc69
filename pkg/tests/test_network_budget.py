from __future__ import annotations

import json
import math

import pytest

from moqtlab.errors import ConfigError
from moqtlab.network_budget import (
    EntanglementScenario,
    bell_state_amplitudes,
    entanglement_rate,
    evaluate_scenario,
    link_fidelity,
    load_scenario,
    max_repetition_rate,
    pair_probability,
    pump_pulse_photons,
)
from moqtlab.units import Transmittance


def _scenario(**overrides) -> EntanglementScenario:
    base = dict(
        name="test",
        g_eo_hz=945.0,
        kappa_o_hz=80e6,
        kappa_m_hz=1e7,
        power_peak_w=40e-6,
        pulse_width_s=150e-9,
        rep_rate_hz=1e6,
        wavelength_m=1.53e-6,
        eta_optical=Transmittance(1e-4),
        loss_mw_db=3.0,
        p_measurement=0.02,
        p_false=1e-3,
        p_phase=0.01,
        p_multi=0.02,
    )
    base.update(overrides)
    return EntanglementScenario(**base)


def test_pump_pulse_photons_hand_value():
    # 40 uW for 150 ns at 1530 nm: 40e-6 * 150e-9 / 1.2983e-19 J = 4.6213e7
    n = pump_pulse_photons(40e-6, 150e-9, 1.53e-6)
    assert n == pytest.approx(4.6213e7, rel=1e-4)


def test_pump_pulse_photons_linear():
    base = pump_pulse_photons(40e-6, 150e-9, 1.53e-6)
    assert pump_pulse_photons(80e-6, 150e-9, 1.53e-6) == pytest.approx(2 * base, rel=1e-12)
    assert pump_pulse_photons(40e-6, 300e-9, 1.53e-6) == pytest.approx(2 * base, rel=1e-12)


def test_pair_probability_formula():
    n = pump_pulse_photons(40e-6, 150e-9, 1.53e-6)
    p = pair_probability(945.0, 80e6, n)
    assert p == pytest.approx(4.0 * (945.0 / 80e6) ** 2 * n, rel=1e-12)
    # the quoted operating point lands near 2.6%
    assert p == pytest.approx(0.0258, abs=0.0005)


def test_pair_probability_warns_outside_weak_pump():
    n = pump_pulse_photons(40e-6, 150e-9, 1.53e-6)
    with pytest.warns(UserWarning):
        pair_probability(945.0, 50e6, 3.0 * n)


def test_entanglement_rate_product():
    rate = entanglement_rate(Transmittance(2.64e-5), 0.0258, 1e6)
    assert rate == pytest.approx(2.64e-5 * 0.0258 * 1e6, rel=1e-12)


def test_max_repetition_rate():
    assert max_repetition_rate(1e7) == pytest.approx(1e6, rel=1e-12)


def test_link_fidelity_error_weights():
    # F = 1 - p_multi - 2 p_m - 1.5 p_loss - p_false - p_phase
    f = link_fidelity(0.02, 0.02, 0.4988, 1e-3, 0.01)
    assert f == pytest.approx(1.0 - 0.02 - 0.04 - 1.5 * 0.4988 - 1e-3 - 0.01, rel=1e-12)
    # heavy loss legitimately drives the raw value negative
    assert link_fidelity(0.1, 0.1, 0.9, 0.05, 0.05) < 0.0


def test_link_fidelity_rejects_bad_probabilities():
    with pytest.raises(ValueError):
        link_fidelity(-0.1, 0.02, 0.5, 1e-3, 0.01)
    with pytest.raises(ValueError):
        link_fidelity(0.02, 0.02, 1.5, 1e-3, 0.01)


def test_bell_state_amplitudes():
    state = bell_state_amplitudes(0.04)
    assert abs(state.amplitude_microwave) ** 2 + abs(state.amplitude_optical) ** 2 == pytest.approx(
        1.0, rel=1e-12
    )
    assert state.herald_probability == 0.04
    assert state.herald_amplitude == pytest.approx(0.2, rel=1e-12)
    # the relative phase rides on the optical arm
    rotated = bell_state_amplitudes(0.04, phase_rad=math.pi / 2)
    assert rotated.amplitude_optical == pytest.approx(
        state.amplitude_optical * 1j, rel=1e-12
    )
    with pytest.raises(ValueError):
        bell_state_amplitudes(1.5)


def test_evaluate_scenario_composition():
    scenario = _scenario()
    result = evaluate_scenario(scenario)
    assert result.n_pump == pytest.approx(pump_pulse_photons(40e-6, 150e-9, 1.53e-6), rel=1e-12)
    assert result.p_pair == pytest.approx(pair_probability(945.0, 80e6, result.n_pump), rel=1e-12)
    assert result.p_multi == 0.02  # the explicit override wins
    assert result.p_loss_mw == pytest.approx(1.0 - 10 ** (-0.3), rel=1e-12)
    assert result.r_ent_hz == pytest.approx(1e-4 * result.p_pair * 1e6, rel=1e-12)
    assert result.fidelity == pytest.approx(
        link_fidelity(0.02, 0.02, result.p_loss_mw, 1e-3, 0.01), rel=1e-12
    )


def test_evaluate_scenario_defaults_p_multi_to_p_pair():
    result = evaluate_scenario(_scenario(p_multi=None))
    assert result.p_multi == pytest.approx(result.p_pair, rel=1e-12)


def test_evaluate_scenario_warns_above_rep_ceiling():
    with pytest.warns(UserWarning, match="test"):
        evaluate_scenario(_scenario(rep_rate_hz=5e6))  # ceiling is kappa_m/10 = 1 MHz


def test_fidelity_clamp_is_convenience_only():
    result = evaluate_scenario(_scenario(loss_mw_db=30.0))
    assert result.fidelity < 0.0
    assert result.fidelity_clamped == 0.0
    healthy = evaluate_scenario(_scenario(loss_mw_db=0.1))
    assert healthy.fidelity_clamped == healthy.fidelity


def test_scenario_validation():
    with pytest.raises(ValueError):
        _scenario(g_eo_hz=-1.0)
    with pytest.raises(ValueError):
        _scenario(p_measurement=1.5)
    with pytest.raises(ValueError):
        _scenario(loss_mw_db=-0.5)


def _scenario_payload() -> dict:
    return {
        "name": "from_disk",
        "notes": "",
        "g_eo_hz": 945.0,
        "kappa_o_hz": 80e6,
        "kappa_m_hz": 1e7,
        "pump": {
            "power_peak_w": 40e-6,
            "pulse_width_s": 150e-9,
            "rep_rate_hz": 1e6,
            "wavelength_m": 1.53e-6,
        },
        "optical_path_db": {"facet": 10.0, "filter": 32.79, "detector": 3.0},
        "microwave_loss_db": 3.0,
        "errors": {
            "p_measurement": 0.02,
            "p_false": 1e-3,
            "p_phase": 0.01,
            "p_multi": 0.02,
        },
    }


def test_load_scenario_round_trip(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(_scenario_payload()), encoding="utf-8")
    scenario = load_scenario(path)
    assert scenario.name == "from_disk"
    # optical budget: 10 + 32.79 + 3 = 45.79 dB
    assert scenario.eta_optical.ratio == pytest.approx(10 ** (-4.579), rel=1e-9)
    assert scenario.loss_mw_db == 3.0


def test_load_scenario_rejects_unknown_key(tmp_path):
    payload = _scenario_payload()
    payload["pump"]["color"] = "red"
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(ConfigError, match="pump.color"):
        load_scenario(path)


def test_load_scenario_reports_missing_top_level_field(tmp_path):
    payload = _scenario_payload()
    del payload["kappa_m_hz"]
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        load_scenario(path)
    assert "kappa_m_hz" in str(info.value)


def test_load_scenario_reports_missing_section_field(tmp_path):
    payload = _scenario_payload()
    del payload["errors"]["p_phase"]
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        load_scenario(path)
    assert "p_phase" in str(info.value)


def test_load_scenario_p_multi_is_optional(tmp_path):
    payload = _scenario_payload()
    del payload["errors"]["p_multi"]
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    assert load_scenario(path).p_multi is None
