from __future__ import annotations

import json
import math
from importlib import resources

import pytest

from moqtlab.cli import main
from moqtlab.config import default_config_text, load_config
from moqtlab.errors import ConfigError
from moqtlab.serialize import csv_text, format_float, json_text, write_text
from moqtlab.synthetic import write_datasets


def _write_config(tmp_path, payload, name="user.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


# ---------------------------------------------------------------- config


def test_bundled_defaults():
    cfg = load_config(env={})
    assert cfg.g_eo_hz == 945.0
    assert cfg.microwave.f_hz == 3.71e9
    assert cfg.pump.power_peak_w == 4.42e-5
    assert cfg.pump.duty == pytest.approx(0.02, rel=1e-12)
    assert cfg.vernier.mu_hz == 1.75e9
    assert cfg.qubit.params.t1_s == 8e-6


def test_default_config_text_is_valid_json():
    raw = json.loads(default_config_text())
    assert raw["device"]["g_eo_hz"] == 945.0
    assert set(raw) == {"device", "pump", "qubit", "vernier"}


def test_transducer_state_matches_config():
    cfg = load_config(env={})
    state = cfg.transducer_state()
    assert state.g_eo_hz == cfg.g_eo_hz
    assert state.microwave.f_hz == cfg.microwave.f_hz
    assert state.is_triple_resonant


def test_partial_file_deep_merges_over_defaults(tmp_path):
    path = _write_config(tmp_path, {"device": {"g_eo_hz": 1234.5}})
    cfg = load_config(path, env={})
    assert cfg.g_eo_hz == 1234.5
    # untouched sections keep their bundled values
    assert cfg.microwave.f_hz == 3.71e9
    assert cfg.qubit.drive_cal == pytest.approx(695.3951554915645, rel=1e-12)


def test_explicit_path_beats_environment(tmp_path):
    by_arg = _write_config(tmp_path, {"device": {"g_eo_hz": 1000.0}}, "a.json")
    by_env = _write_config(tmp_path, {"device": {"g_eo_hz": 2000.0}}, "b.json")
    env = {"MOQT_LAB_CONFIG": str(by_env)}
    assert load_config(by_arg, env=env).g_eo_hz == 1000.0
    assert load_config(env=env).g_eo_hz == 2000.0


def test_environment_variable_is_read(tmp_path, monkeypatch):
    path = _write_config(tmp_path, {"device": {"g_eo_hz": 777.0}})
    monkeypatch.setenv("MOQT_LAB_CONFIG", str(path))
    assert load_config().g_eo_hz == 777.0


def test_unknown_keys_fail_with_dotted_path(tmp_path):
    path = _write_config(tmp_path, {"device": {"geometry": {"n_E": 2.0}}})
    with pytest.raises(ConfigError, match="device.geometry.n_E"):
        load_config(path, env={})
    path = _write_config(tmp_path, {"pmup": {}}, "top.json")
    with pytest.raises(ConfigError, match="pmup"):
        load_config(path, env={})


def test_override_assignment():
    cfg = load_config(overrides=["device.g_eo_hz=500"], env={})
    assert cfg.g_eo_hz == 500.0


def test_override_beats_file(tmp_path):
    path = _write_config(tmp_path, {"device": {"g_eo_hz": 1000.0}})
    cfg = load_config(path, overrides=["device.g_eo_hz=250"], env={})
    assert cfg.g_eo_hz == 250.0


@pytest.mark.parametrize("assignment", [
    "device.g_eo_hz",            # no equals sign
    "device..g_eo_hz=1",         # empty segment
    "device.g_eo_hz.sub=1",      # descends through a scalar
    "device.g_oe_hz=1",          # unknown key
    "device.g_eo_hz=oops",       # not a number
    "device.g_eo_hz=true",       # bool is not a number
])
def test_bad_overrides_are_rejected(assignment):
    with pytest.raises(ConfigError):
        load_config(overrides=[assignment], env={})


def test_unreadable_or_invalid_files(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "ghost.json", env={})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(bad, env={})
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError, match="JSON object"):
        load_config(arr, env={})


def test_null_pulse_width_means_cw(tmp_path):
    path = _write_config(tmp_path, {"pump": {"pulse_width_s": None, "rep_rate_hz": None}})
    cfg = load_config(path, env={})
    assert cfg.pump.cw
    assert cfg.pump.duty == 1.0


# ------------------------------------------------------------- serialize


def test_format_float_nine_significant_digits():
    assert format_float(1.0 / 3.0) == "0.333333333"
    assert format_float(945.0) == "945"
    assert format_float(1e-7) == "1e-07"
    assert format_float(-2.5) == "-2.5"
    assert format_float(float("inf")) == "inf"
    assert format_float(float("nan")) == "nan"


def test_json_text_quantizes_and_terminates():
    text = json_text({"x": 0.12345678912345, "flag": True, "n": 3, "seq": [1.0 / 3.0]})
    assert text.endswith("\n")
    loaded = json.loads(text)
    assert loaded["x"] == 0.123456789
    assert loaded["flag"] is True
    assert loaded["n"] == 3
    assert loaded["seq"] == [0.333333333]


def test_csv_text_layout():
    text = csv_text(["a", "b"], [(1.0 / 3.0, "tag"), (2.0, 5)])
    assert text == "a,b\n0.333333333,tag\n2,5\n"


def test_write_text_round_trip(tmp_path):
    target = tmp_path / "deep" / "nested" / "out.txt"
    write_text(target, "payload\n")
    assert target.read_text(encoding="utf-8") == "payload\n"
    write_text(target, "replaced\n")
    assert target.read_text(encoding="utf-8") == "replaced\n"
    # the temp file used for the atomic rename must not survive
    assert [p.name for p in target.parent.iterdir()] == ["out.txt"]


# ------------------------------------------------------------------ cli


def test_cli_transduce_artifacts(tmp_path):
    assert main(["transduce", "--output-dir", str(tmp_path), "--quiet"]) == 0
    lines = (tmp_path / "transduce_sweep.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "p_peak_w,duty,p_avg_w,n_pump,g_hz,cooperativity,eta_peak,bw_3db_hz"
    assert len(lines) == 26
    summary = json.loads((tmp_path / "transduce_summary.json").read_text(encoding="utf-8"))
    assert summary["eta_peak"] == pytest.approx(0.0118073923, rel=1e-6)
    assert summary["triple_resonant_cold"] is True


def test_cli_chevron_grid(tmp_path):
    rc = main(["chevron", "--widths", "0:2e-7:5", "--detunings", "0,1e6",
               "--output-dir", str(tmp_path), "--quiet"])
    assert rc == 0
    lines = (tmp_path / "chevron.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "width_s,detuning_hz,population"
    assert len(lines) == 1 + 5 * 2


def test_cli_fit_reports_to_stdout_and_file(tmp_path, capsys):
    data_dir = tmp_path / "data"
    write_datasets(data_dir)
    out = tmp_path / "out"
    rc = main(["fit", "t1", str(data_dir / "t1.csv"), "--output-dir", str(out), "--quiet"])
    assert rc == 0
    stdout = capsys.readouterr().out
    result = json.loads(stdout)
    assert result["converged"] is True
    assert result["params"]["t1"]["value"] == pytest.approx(8e-6, rel=0.05)
    assert (out / "fit_result.json").read_text(encoding="utf-8") == stdout


def test_cli_budget_bundled_scenarios(tmp_path):
    assert main(["budget", "--output-dir", str(tmp_path), "--quiet"]) == 0
    lines = (tmp_path / "budget.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "scenario,n_pump,p_pair,r_ent_hz,fidelity,fidelity_clamped"
    names = [line.split(",")[0] for line in lines[1:]]
    assert names == ["current", "low_loss_chip", "tapered_fiber"]
    fidelities = [float(line.split(",")[4]) for line in lines[1:]]
    assert fidelities == pytest.approx([0.18078085, 0.828881451, 0.894855831], rel=1e-6)


def test_cli_budget_explicit_scenario_file(tmp_path):
    bundle = resources.files("moqtlab").joinpath("data/scenarios/current.json")
    local = tmp_path / "current.json"
    local.write_text(bundle.read_text(encoding="utf-8"), encoding="utf-8")
    assert main(["budget", str(local), "--output-dir", str(tmp_path), "--quiet"]) == 0
    lines = (tmp_path / "budget.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2 and lines[1].startswith("current,")


def test_cli_vernier_report(tmp_path):
    assert main(["vernier", "--output-dir", str(tmp_path), "--quiet"]) == 0
    scan = (tmp_path / "vernier_scan.csv").read_text(encoding="utf-8").splitlines()
    assert scan[0] == "omega_minus_hz,omega_plus_hz,splitting_hz,vdc_required_v"
    report = json.loads((tmp_path / "vernier_report.json").read_text(encoding="utf-8"))
    assert report["period_ratio"] == pytest.approx(1.0, abs=1e-3)
    assert 0 < len(report["candidates"]) <= 5
    first = report["candidates"][0]
    rate = 6e6
    expected_v = (3.71e9 - first["splitting_hz"]) / rate
    assert first["v_dc_v"] == pytest.approx(expected_v, rel=1e-6)


def test_cli_g0_chain_and_solver(tmp_path):
    assert main(["g0", "--output-dir", str(tmp_path), "--quiet"]) == 0
    payload = json.loads((tmp_path / "g0.json").read_text(encoding="utf-8"))
    assert payload["g_eo_hz"] == pytest.approx(945.0, rel=1e-6)
    assert "solved" not in payload
    rc = main(["g0", "--solve-for", "capacitance_f", "--target-g0", "1890",
               "--output-dir", str(tmp_path), "--quiet"])
    assert rc == 0
    payload = json.loads((tmp_path / "g0.json").read_text(encoding="utf-8"))
    # g scales as 1/sqrt(C), so doubling it quarters the capacitance
    assert payload["solved"]["value"] == pytest.approx(2.5e-15, rel=1e-6)
    assert payload["g_eo_hz"] == pytest.approx(1890.0, rel=1e-9)


def test_cli_set_override_changes_output(tmp_path):
    rc = main(["g0", "--set", "device.geometry.capacitance_f=4e-14",
               "--output-dir", str(tmp_path), "--quiet"])
    assert rc == 0
    payload = json.loads((tmp_path / "g0.json").read_text(encoding="utf-8"))
    assert payload["g_eo_hz"] == pytest.approx(945.0 / math.sqrt(4.0), rel=1e-6)


def test_cli_progress_lines(tmp_path, capsys):
    main(["g0", "--output-dir", str(tmp_path)])
    assert "wrote" in capsys.readouterr().out
    main(["g0", "--output-dir", str(tmp_path), "--quiet"])
    assert capsys.readouterr().out == ""


def test_cli_repeat_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["vernier", "--output-dir", str(a), "--quiet"])
    main(["vernier", "--output-dir", str(b), "--quiet"])
    for name in ("vernier_scan.csv", "vernier_report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


@pytest.mark.parametrize("argv, code", [
    (["fit", "t1", "{tmp}/missing.csv"], 2),                      # unreadable dataset
    (["g0", "--set", "pmup.x=1"], 2),                             # unknown config key
    (["budget", "{tmp}/ghost.json"], 2),                          # unreadable scenario
    (["transduce", "--duty", "2.0"], 2),                          # duty out of range
    (["chevron", "--widths", "garbage"], 2),                      # unparseable axis
    (["g0", "--solve-for", "capacitance_f"], 2),                  # solver without target
    (["g0", "--target-g0", "1890"], 2),                           # target without solver
    (["vernier", "--window", "195.94278e12:195.99278e12"], 1),    # window too short
])
def test_cli_error_exit_codes(tmp_path, capsys, argv, code):
    argv = [a.format(tmp=tmp_path) for a in argv]
    assert main(argv + ["--output-dir", str(tmp_path), "--quiet"]) == code
    assert "error" in capsys.readouterr().err


def test_cli_bad_scenario_file_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x"}), encoding="utf-8")
    rc = main(["budget", str(bad), "--output-dir", str(tmp_path), "--quiet"])
    assert rc == 2
    assert "missing fields" in capsys.readouterr().err


def test_cli_requires_a_command(capsys):
    assert main([]) == 2
    capsys.readouterr()
