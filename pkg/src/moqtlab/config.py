"""Run configuration: one JSON document describing device, pump, qubit, rings.

Resolution order for the file: an explicit path, then the MOQT_LAB_CONFIG
environment variable, then the bundled default.  A user file may be partial;
it is deep-merged over the bundled default.  Unknown keys are rejected with
their dotted path so typos fail loudly instead of silently reverting a value
to its default.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .eo_coupling import DeviceGeometry
from .errors import ConfigError
from .qubit_dynamics import QubitParams
from .transduction import MicrowaveModeParams, OpticalModeParams, PumpDrive, TransducerState

_GEOMETRY_KEYS = {"n_e", "r33_m_per_v", "alpha", "gamma", "v_over_e_m", "capacitance_f", "f_opt_hz"}
_MODE_KEYS = {"f_hz", "kappa_i_hz", "kappa_e_hz"}
_SCHEMA = {
    "device": {
        "geometry": _GEOMETRY_KEYS,
        "optical_minus": _MODE_KEYS,
        "optical_plus": _MODE_KEYS,
        "microwave": _MODE_KEYS,
        "g_eo_hz": None,
        "heating": {"beta_loss_hz_per_w", "beta_shift_hz_per_w"},
    },
    "pump": {"power_peak_w", "detuning_hz", "wavelength_m", "pulse_width_s", "rep_rate_hz"},
    "qubit": {"f_q_hz", "kappa_q_hz", "t1_s", "t2_star_s", "g_q_ro_hz", "f_ro_hz",
              "drive_cal", "drive_f_hz", "omega_r_hz", "rabi_tau_s"},
    "vernier": {"fsr_a_hz", "fsr_b_hz", "anchor_a_hz", "anchor_b_hz", "mu_hz",
                "tune_rate_hz_per_v", "v_max_v"},
}


@dataclass(frozen=True)
class HeatingParams:
    """Pump-dissipation coefficients of the microwave mode, per watt average."""

    beta_loss_hz_per_w: float
    beta_shift_hz_per_w: float

    def __post_init__(self) -> None:
        if self.beta_loss_hz_per_w < 0.0 or self.beta_shift_hz_per_w < 0.0:
            raise ValueError("heating coefficients must be non-negative")


@dataclass(frozen=True)
class QubitConfig:
    params: QubitParams
    drive_cal: float
    drive_f_hz: float
    omega_r_hz: float
    rabi_tau_s: float


@dataclass(frozen=True)
class VernierConfig:
    fsr_a_hz: float
    fsr_b_hz: float
    anchor_a_hz: float
    anchor_b_hz: float
    mu_hz: float
    tune_rate_hz_per_v: float
    v_max_v: float

    def __post_init__(self) -> None:
        for name in ("fsr_a_hz", "fsr_b_hz", "anchor_a_hz", "anchor_b_hz",
                     "mu_hz", "tune_rate_hz_per_v", "v_max_v"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class RunConfig:
    geometry: DeviceGeometry
    optical_minus: OpticalModeParams
    optical_plus: OpticalModeParams
    microwave: MicrowaveModeParams
    g_eo_hz: float
    heating: HeatingParams
    pump: PumpDrive
    qubit: QubitConfig
    vernier: VernierConfig

    def transducer_state(self) -> TransducerState:
        return TransducerState(
            optical_minus=self.optical_minus,
            optical_plus=self.optical_plus,
            microwave=self.microwave,
            g_eo_hz=self.g_eo_hz,
            pump=self.pump,
        )


def default_config_text() -> str:
    return resources.files("moqtlab").joinpath("data/default_config.json").read_text(encoding="utf-8")


def _check_keys(raw: dict, schema, prefix: str = "") -> None:
    for key, value in raw.items():
        path = f"{prefix}{key}"
        if key not in schema:
            raise ConfigError(f"unknown config key: {path}")
        sub = schema[key] if isinstance(schema, dict) else None
        if isinstance(sub, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {path} must be an object")
            _check_keys(value, sub, path + ".")
        elif isinstance(sub, set):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {path} must be an object")
            for leaf in value:
                if leaf not in sub:
                    raise ConfigError(f"unknown config key: {path}.{leaf}")


def _deep_merge(base: dict, patch: dict) -> dict:
    merged = dict(base)
    for key, value in patch.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _apply_override(raw: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"override must look like section.key=value, got {assignment!r}")
    dotted, text = assignment.split("=", 1)
    parts = dotted.strip().split(".")
    if not all(parts):
        raise ConfigError(f"override has an empty key segment: {assignment!r}")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    node = raw
    for part in parts[:-1]:
        nxt = node.setdefault(part, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"override path {dotted} crosses a scalar value")
        node = nxt
    node[parts[-1]] = value


def _number(section: dict, section_name: str, key: str) -> float:
    if key not in section:
        raise ConfigError(f"missing config key: {section_name}.{key}")
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key {section_name}.{key} must be a number")
    return float(value)


def _optional_number(section: dict, section_name: str, key: str) -> float | None:
    if section.get(key) is None:
        return None
    return _number(section, section_name, key)


def load_config(path=None, overrides=(), env=None) -> RunConfig:
    """Resolve, merge, validate, and build the run configuration."""
    env = os.environ if env is None else env
    base = json.loads(default_config_text())
    chosen = path or env.get("MOQT_LAB_CONFIG") or None
    if chosen:
        file_path = Path(chosen)
        try:
            user = json.loads(file_path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {file_path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {file_path} is not valid JSON: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError(f"config file {file_path} must contain a JSON object")
        raw = _deep_merge(base, user)
    else:
        raw = base
    for assignment in overrides:
        _apply_override(raw, assignment)
    _check_keys(raw, _SCHEMA)
    return _build(raw)


def _build(raw: dict) -> RunConfig:
    device = raw.get("device", {})
    try:
        geometry = DeviceGeometry(
            n_e=_number(device.get("geometry", {}), "device.geometry", "n_e"),
            r33_m_per_v=_number(device["geometry"], "device.geometry", "r33_m_per_v"),
            alpha=_number(device["geometry"], "device.geometry", "alpha"),
            gamma=_number(device["geometry"], "device.geometry", "gamma"),
            v_over_e_m=_number(device["geometry"], "device.geometry", "v_over_e_m"),
            capacitance_f=_number(device["geometry"], "device.geometry", "capacitance_f"),
            f_opt_hz=_number(device["geometry"], "device.geometry", "f_opt_hz"),
        )
        modes = {}
        for mode_name, cls in (("optical_minus", OpticalModeParams),
                               ("optical_plus", OpticalModeParams),
                               ("microwave", MicrowaveModeParams)):
            section = device.get(mode_name, {})
            modes[mode_name] = cls(
                f_hz=_number(section, f"device.{mode_name}", "f_hz"),
                kappa_i_hz=_number(section, f"device.{mode_name}", "kappa_i_hz"),
                kappa_e_hz=_number(section, f"device.{mode_name}", "kappa_e_hz"),
            )
        heating = HeatingParams(
            beta_loss_hz_per_w=_number(device.get("heating", {}), "device.heating", "beta_loss_hz_per_w"),
            beta_shift_hz_per_w=_number(device["heating"], "device.heating", "beta_shift_hz_per_w"),
        )
        pump_raw = raw.get("pump", {})
        pump = PumpDrive(
            power_peak_w=_number(pump_raw, "pump", "power_peak_w"),
            detuning_hz=_number(pump_raw, "pump", "detuning_hz"),
            wavelength_m=_number(pump_raw, "pump", "wavelength_m"),
            pulse_width_s=_optional_number(pump_raw, "pump", "pulse_width_s"),
            rep_rate_hz=_optional_number(pump_raw, "pump", "rep_rate_hz"),
            cw=pump_raw.get("pulse_width_s") is None,
        )
        qubit_raw = raw.get("qubit", {})
        qubit = QubitConfig(
            params=QubitParams(
                f_q_hz=_number(qubit_raw, "qubit", "f_q_hz"),
                kappa_q_hz=_number(qubit_raw, "qubit", "kappa_q_hz"),
                t1_s=_number(qubit_raw, "qubit", "t1_s"),
                t2_star_s=_number(qubit_raw, "qubit", "t2_star_s"),
                g_q_ro_hz=_number(qubit_raw, "qubit", "g_q_ro_hz"),
                f_ro_hz=_number(qubit_raw, "qubit", "f_ro_hz"),
            ),
            drive_cal=_number(qubit_raw, "qubit", "drive_cal"),
            drive_f_hz=_number(qubit_raw, "qubit", "drive_f_hz"),
            omega_r_hz=_number(qubit_raw, "qubit", "omega_r_hz"),
            rabi_tau_s=_number(qubit_raw, "qubit", "rabi_tau_s"),
        )
        vernier_raw = raw.get("vernier", {})
        vernier = VernierConfig(
            fsr_a_hz=_number(vernier_raw, "vernier", "fsr_a_hz"),
            fsr_b_hz=_number(vernier_raw, "vernier", "fsr_b_hz"),
            anchor_a_hz=_number(vernier_raw, "vernier", "anchor_a_hz"),
            anchor_b_hz=_number(vernier_raw, "vernier", "anchor_b_hz"),
            mu_hz=_number(vernier_raw, "vernier", "mu_hz"),
            tune_rate_hz_per_v=_number(vernier_raw, "vernier", "tune_rate_hz_per_v"),
            v_max_v=_number(vernier_raw, "vernier", "v_max_v"),
        )
        return RunConfig(
            geometry=geometry,
            optical_minus=modes["optical_minus"],
            optical_plus=modes["optical_plus"],
            microwave=modes["microwave"],
            g_eo_hz=_number(device, "device", "g_eo_hz"),
            heating=heating,
            pump=pump,
            qubit=qubit,
            vernier=vernier,
        )
    except KeyError as exc:
        raise ConfigError(f"missing config section: {exc.args[0]}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
