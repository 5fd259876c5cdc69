"""Heralded microwave-optical entanglement: rates and error budgets.

A pulsed blue-detuned pump converts the transducer into a two-mode squeezer;
detecting one optical photon heralds a microwave-optical Bell pair.  This
module scores a deployment scenario (device coupling, pump pulse, optical
detection chain, microwave link loss) by its herald rate and the fidelity
left after the dominant error channels.

Scenario files are plain JSON; see data/scenarios/ for the bundled ones.
"""

from __future__ import annotations

import cmath
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .units import AngularFrequency, Power, Transmittance, db_to_loss_probability, photon_flux

_WEAK_PUMP_LIMIT = 0.1


@dataclass(frozen=True)
class EntanglementScenario:
    """One end-to-end link configuration to budget."""

    name: str
    g_eo_hz: float
    kappa_o_hz: float
    kappa_m_hz: float
    power_peak_w: float
    pulse_width_s: float
    rep_rate_hz: float
    wavelength_m: float
    eta_optical: Transmittance
    loss_mw_db: float
    p_measurement: float
    p_false: float
    p_phase: float
    p_multi: float | None = None
    notes: str = ""

    def __post_init__(self) -> None:
        for field_name in ("g_eo_hz", "kappa_o_hz", "kappa_m_hz", "power_peak_w",
                           "pulse_width_s", "rep_rate_hz", "wavelength_m"):
            if getattr(self, field_name) <= 0.0:
                raise ValueError(f"{field_name} must be positive")
        if self.loss_mw_db < 0.0:
            raise ValueError("loss_mw_db must be non-negative")
        for field_name in ("p_measurement", "p_false", "p_phase"):
            value = getattr(self, field_name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{field_name} must lie in [0, 1]")
        if self.p_multi is not None and not 0.0 <= self.p_multi <= 1.0:
            raise ValueError("p_multi must lie in [0, 1]")


@dataclass(frozen=True)
class BudgetResult:
    scenario: EntanglementScenario
    n_pump: float
    p_pair: float
    p_multi: float
    p_loss_mw: float
    r_ent_hz: float
    fidelity: float

    @property
    def fidelity_clamped(self) -> float:
        return max(self.fidelity, 0.0)


@dataclass(frozen=True)
class HeraldedBellState:
    """Post-herald Bell amplitudes and the herald probability that bought them."""

    amplitude_microwave: complex
    amplitude_optical: complex
    herald_probability: float

    @property
    def herald_amplitude(self) -> float:
        return math.sqrt(self.herald_probability)

    @property
    def norm(self) -> float:
        return abs(self.amplitude_microwave) ** 2 + abs(self.amplitude_optical) ** 2


def pump_pulse_photons(power_peak_w: float, pulse_width_s: float, wavelength_m: float) -> float:
    """Photons in one rectangular pump pulse."""
    omega = AngularFrequency.from_vacuum_wavelength(wavelength_m)
    return photon_flux(Power(power_peak_w), omega) * pulse_width_s


def pair_probability(g_eo_hz: float, kappa_o_hz: float, n_pump: float) -> float:
    """Probability of one pair per pulse, perturbative in the pump.

    p = 4 (g_eo / kappa_o)^2 N.  Beyond ~0.1 the two-mode squeezing is no
    longer weak and the single-pair picture degrades, hence the warning.
    """
    p = 4.0 * (g_eo_hz / kappa_o_hz) ** 2 * n_pump
    if p > _WEAK_PUMP_LIMIT:
        warnings.warn(
            f"pair probability {p:.3g} exceeds the weak-pumping regime (> {_WEAK_PUMP_LIMIT})",
            stacklevel=2,
        )
    return p


def entanglement_rate(eta_optical: Transmittance, p_pair: float, rep_rate_hz: float) -> float:
    """Heralded pair rate: detection efficiency times pair probability times reps."""
    return eta_optical.ratio * p_pair * rep_rate_hz


def max_repetition_rate(kappa_m_hz: float) -> float:
    """Microwave mode must ring down between pulses; budget a tenth of its linewidth."""
    return kappa_m_hz / 10.0


def link_fidelity(p_multi: float, p_measurement: float, p_loss_mw: float,
                  p_false: float, p_phase: float) -> float:
    """Bell fidelity after the leading error channels, linearized.

    Microwave loss enters at 3/2 weight: a lost photon both removes the pair
    and admits a thermal admixture.  The estimate is not clamped; a negative
    value means the linear budget has no fidelity left.
    """
    probs = {"p_multi": p_multi, "p_measurement": p_measurement, "p_loss_mw": p_loss_mw,
             "p_false": p_false, "p_phase": p_phase}
    for name, value in probs.items():
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be a probability in [0, 1], got {value}")
    return 1.0 - p_multi - 2.0 * p_measurement - 1.5 * p_loss_mw - p_false - p_phase


def bell_state_amplitudes(p_pair: float, phase_rad: float = 0.0) -> HeraldedBellState:
    """Ideal post-herald state; the relative phase tracks pump and path phases."""
    if not 0.0 <= p_pair <= 1.0:
        raise ValueError("p_pair must lie in [0, 1]")
    root_half = 1.0 / math.sqrt(2.0)
    return HeraldedBellState(
        amplitude_microwave=complex(root_half),
        amplitude_optical=cmath.exp(1j * phase_rad) * root_half,
        herald_probability=p_pair,
    )


def evaluate_scenario(scenario: EntanglementScenario) -> BudgetResult:
    """Full budget for one scenario: pulse photons, pair odds, rate, fidelity."""
    n_pump = pump_pulse_photons(scenario.power_peak_w, scenario.pulse_width_s, scenario.wavelength_m)
    p_pair = pair_probability(scenario.g_eo_hz, scenario.kappa_o_hz, n_pump)
    ceiling = max_repetition_rate(scenario.kappa_m_hz)
    if scenario.rep_rate_hz > ceiling:
        warnings.warn(
            f"repetition rate {scenario.rep_rate_hz:.3g} Hz exceeds the ring-down "
            f"ceiling {ceiling:.3g} Hz for scenario {scenario.name!r}",
            stacklevel=2,
        )
    p_loss_mw = db_to_loss_probability(scenario.loss_mw_db)
    p_multi = scenario.p_multi if scenario.p_multi is not None else p_pair
    return BudgetResult(
        scenario=scenario,
        n_pump=n_pump,
        p_pair=p_pair,
        p_multi=p_multi,
        p_loss_mw=p_loss_mw,
        r_ent_hz=entanglement_rate(scenario.eta_optical, p_pair, scenario.rep_rate_hz),
        fidelity=link_fidelity(p_multi, scenario.p_measurement, p_loss_mw,
                               scenario.p_false, scenario.p_phase),
    )


_PUMP_KEYS = {"power_peak_w", "pulse_width_s", "rep_rate_hz", "wavelength_m"}
_PATH_KEYS = {"facet", "filter", "detector"}
_ERROR_KEYS = {"p_measurement", "p_false", "p_phase", "p_multi"}
_TOP_KEYS = {"name", "notes", "g_eo_hz", "kappa_o_hz", "kappa_m_hz",
             "pump", "optical_path_db", "microwave_loss_db", "errors"}


def load_scenario(path) -> EntanglementScenario:
    """Read a scenario JSON file; unknown or invalid fields raise ConfigError."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"scenario file {path} must contain a JSON object")

    def reject_unknown(mapping: dict, allowed: set, context: str) -> None:
        for key in mapping:
            if key not in allowed:
                raise ConfigError(f"unknown scenario field: {context}{key}")

    reject_unknown(raw, _TOP_KEYS, "")
    missing = {"name", "g_eo_hz", "kappa_o_hz", "kappa_m_hz", "pump",
               "optical_path_db", "microwave_loss_db", "errors"} - raw.keys()
    if missing:
        raise ConfigError(f"scenario file {path} is missing fields: {', '.join(sorted(missing))}")
    pump = raw["pump"]
    path_db = raw["optical_path_db"]
    errors = raw["errors"]
    for section, keys, label in ((pump, _PUMP_KEYS, "pump."),
                                 (path_db, _PATH_KEYS, "optical_path_db."),
                                 (errors, _ERROR_KEYS, "errors.")):
        if not isinstance(section, dict):
            raise ConfigError(f"scenario field {label[:-1]} must be an object")
        reject_unknown(section, keys, label)
    missing_pump = _PUMP_KEYS - pump.keys()
    if missing_pump:
        raise ConfigError(f"pump section is missing fields: {', '.join(sorted(missing_pump))}")
    missing_path = _PATH_KEYS - path_db.keys()
    if missing_path:
        raise ConfigError(f"optical_path_db section is missing fields: {', '.join(sorted(missing_path))}")
    for key in ("p_measurement", "p_false", "p_phase"):
        if key not in errors:
            raise ConfigError(f"errors section is missing field: {key}")

    for stage, value in path_db.items():
        if not isinstance(value, (int, float)) or value < 0.0:
            raise ConfigError(f"optical_path_db.{stage} must be a non-negative dB figure")
    total_db = float(sum(path_db.values()))
    try:
        return EntanglementScenario(
            name=str(raw["name"]),
            g_eo_hz=float(raw["g_eo_hz"]),
            kappa_o_hz=float(raw["kappa_o_hz"]),
            kappa_m_hz=float(raw["kappa_m_hz"]),
            power_peak_w=float(pump["power_peak_w"]),
            pulse_width_s=float(pump["pulse_width_s"]),
            rep_rate_hz=float(pump["rep_rate_hz"]),
            wavelength_m=float(pump["wavelength_m"]),
            eta_optical=Transmittance.from_db_loss(total_db),
            loss_mw_db=float(raw["microwave_loss_db"]),
            p_measurement=float(errors["p_measurement"]),
            p_false=float(errors["p_false"]),
            p_phase=float(errors["p_phase"]),
            p_multi=float(errors["p_multi"]) if "p_multi" in errors else None,
            notes=str(raw.get("notes", "")),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"scenario file {path}: {exc}") from None
