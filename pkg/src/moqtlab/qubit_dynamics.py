"""Closed-form driven two-level-system models behind the qubit measurements.

Spectroscopy Lorentzian, power and time Rabi oscillations with decay, the
detuned (chevron) Rabi law, the dispersive shift, the drive-power-to-Rabi
conversion, and pulse-schedule power averaging.  These are the forward models
the fitting module inverts and the synthetic generator samples.

Rabi conventions here follow the pi-pulse parameterization: population
sin^2(pi x / (2 X_pi)) peaks at X_pi and repeats every 2 X_pi, so the
oscillation rate is 1/(2 T_pi).  The raw oscillating-signal form (sin rather
than sin^2, readout units) is kept alongside as *_signal accessors.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .units import HBAR, TWO_PI


@dataclass(frozen=True)
class QubitParams:
    """Transmon parameters: frequency, linewidth, lifetimes, readout coupling."""

    f_q_hz: float
    kappa_q_hz: float
    t1_s: float
    t2_star_s: float
    g_q_ro_hz: float
    f_ro_hz: float

    def __post_init__(self) -> None:
        if self.f_q_hz <= 0.0 or self.f_ro_hz <= 0.0:
            raise ValueError("qubit and readout frequencies must be positive")
        if self.kappa_q_hz <= 0.0:
            raise ValueError(f"qubit linewidth must be positive, got {self.kappa_q_hz}")
        if self.t1_s <= 0.0 or self.t2_star_s <= 0.0:
            raise ValueError("T1 and T2* must be positive")
        if self.g_q_ro_hz < 0.0:
            raise ValueError(f"readout coupling must be non-negative, got {self.g_q_ro_hz}")
        if not self.dispersive_ok:
            warnings.warn(
                "parameters leave the dispersive regime (need kappa_q << g_q_ro << |Delta_ro|)",
                stacklevel=2,
            )

    @property
    def delta_ro_hz(self) -> float:
        """Readout-qubit detuning f_ro - f_q."""
        return self.f_ro_hz - self.f_q_hz

    @property
    def dispersive_ok(self) -> bool:
        return self.g_q_ro_hz >= 10.0 * self.kappa_q_hz and abs(self.delta_ro_hz) >= 10.0 * self.g_q_ro_hz


@dataclass(frozen=True)
class RabiFitModel:
    """Rabi curve parameters: amplitude, offset, pi-pulse scale, decay, detuning.

    Exactly one of t_pi_s (time Rabi) or v_pi_v (power Rabi) applies per use;
    tau_s is the decay constant (None for no decay) and detuning_hz enters
    the time-Rabi contrast and rate.
    """

    amplitude: float
    offset: float
    t_pi_s: float | None = None
    v_pi_v: float | None = None
    tau_s: float | None = None
    detuning_hz: float = 0.0

    def __post_init__(self) -> None:
        if self.t_pi_s is not None and self.t_pi_s <= 0.0:
            raise ValueError(f"T_pi must be positive, got {self.t_pi_s}")
        if self.v_pi_v is not None and self.v_pi_v <= 0.0:
            raise ValueError(f"V_pi must be positive, got {self.v_pi_v}")
        if self.tau_s is not None and self.tau_s <= 0.0:
            raise ValueError(f"decay constant must be positive, got {self.tau_s}")


@dataclass(frozen=True)
class PulseSchedule:
    """Rectangular pulse train; shape_factor absorbs the pulse-area correction."""

    pulse_width_s: float
    rep_rate_hz: float
    shape_factor: float = 1.0 / 0.94

    def __post_init__(self) -> None:
        if self.pulse_width_s <= 0.0 or self.rep_rate_hz <= 0.0:
            raise ValueError("pulse width and repetition rate must be positive")
        if self.shape_factor <= 0.0:
            raise ValueError(f"shape factor must be positive, got {self.shape_factor}")
        if self.duty > 1.0:
            raise ValueError(f"duty cycle {self.duty} exceeds 1")

    @property
    def duty(self) -> float:
        return self.pulse_width_s * self.rep_rate_hz


def lorentzian_response(f_hz, q: QubitParams, amplitude: float, offset: float):
    """Spectroscopy line offset + A * (k/2)^2 / ((f - f_q)^2 + (k/2)^2)."""
    half = q.kappa_q_hz / 2.0
    detuning = np.asarray(f_hz, dtype=float) - q.f_q_hz
    value = offset + amplitude * half**2 / (detuning**2 + half**2)
    return float(value) if np.isscalar(f_hz) else value


def detuned_rabi(omega_r_hz: float, detuning_hz: float) -> float:
    """Generalized Rabi rate sqrt(Omega^2 + delta^2)."""
    return math.hypot(omega_r_hz, detuning_hz)


def rabi_rate_from_power(p_avg_w: float, q: QubitParams, f_dr_hz: float, cal: float) -> float:
    """Rabi rate from average drive power through the readout resonator [Hz].

    Linear in the drive amplitude: Omega = cal * (2 g / |Delta_ro|) *
    sqrt(P / (hbar omega_dr)).  The calibration constant absorbs the
    attenuation and amplitude conventions of the drive line and is fixed
    against a measured (power, Rabi rate) point.
    """
    if q.delta_ro_hz == 0.0:
        raise ValueError("readout detuning must be non-zero")
    if f_dr_hz <= 0.0:
        raise ValueError(f"drive frequency must be positive, got {f_dr_hz}")
    if p_avg_w < 0.0:
        raise ValueError(f"power must be non-negative, got {p_avg_w}")
    if cal < 0.0:
        raise ValueError(f"calibration constant must be non-negative, got {cal}")
    flux = p_avg_w / (HBAR * TWO_PI * f_dr_hz)
    return cal * (2.0 * q.g_q_ro_hz / abs(q.delta_ro_hz)) * math.sqrt(flux)


def drive_calibration(p_avg_w: float, q: QubitParams, f_dr_hz: float, omega_r_hz: float) -> float:
    """Calibration constant making rabi_rate_from_power hit a measured rate."""
    base = rabi_rate_from_power(p_avg_w, q, f_dr_hz, 1.0)
    if base == 0.0:
        raise ValueError("zero drive power cannot calibrate the Rabi rate")
    return omega_r_hz / base


def time_rabi_population(t_s, model: RabiFitModel):
    """Excited population offset + A (O/O')^2 e^(-t/tau) sin^2(pi O' t).

    O = 1/(2 T_pi) is the resonant rate, O' the detuned rate; the contrast
    factor (O/O')^2 kills the fringes far off resonance.  Peaks at T_pi on
    resonance without decay.
    """
    if model.t_pi_s is None:
        raise ValueError("time Rabi needs t_pi_s")
    t = np.asarray(t_s, dtype=float)
    omega = 1.0 / (2.0 * model.t_pi_s)
    omega_prime = detuned_rabi(omega, model.detuning_hz)
    contrast = (omega / omega_prime) ** 2
    envelope = np.exp(-t / model.tau_s) if model.tau_s is not None else 1.0
    value = model.offset + model.amplitude * contrast * envelope * np.sin(math.pi * omega_prime * t) ** 2
    return float(value) if np.isscalar(t_s) else value


def power_rabi_population(v_volts, model: RabiFitModel):
    """Excited population offset + A sin^2(pi V / (2 V_pi)); peaks at V_pi."""
    if model.v_pi_v is None:
        raise ValueError("power Rabi needs v_pi_v")
    v = np.asarray(v_volts, dtype=float)
    value = model.offset + model.amplitude * np.sin(math.pi * v / (2.0 * model.v_pi_v)) ** 2
    return float(value) if np.isscalar(v_volts) else value


def time_rabi_signal(t_s, model: RabiFitModel):
    """Raw oscillating readout signal offset + A e^(-t/tau) sin(2 pi t / (2 T_pi))."""
    if model.t_pi_s is None:
        raise ValueError("time Rabi needs t_pi_s")
    t = np.asarray(t_s, dtype=float)
    envelope = np.exp(-t / model.tau_s) if model.tau_s is not None else 1.0
    value = model.offset + model.amplitude * envelope * np.sin(math.pi * t / model.t_pi_s)
    return float(value) if np.isscalar(t_s) else value


def power_rabi_signal(v_volts, model: RabiFitModel):
    """Raw oscillating readout signal offset + A sin(2 pi V / (2 V_pi))."""
    if model.v_pi_v is None:
        raise ValueError("power Rabi needs v_pi_v")
    v = np.asarray(v_volts, dtype=float)
    value = model.offset + model.amplitude * np.sin(math.pi * v / model.v_pi_v)
    return float(value) if np.isscalar(v_volts) else value


def chevron_map(widths_s, detunings_hz, omega_r_hz: float, tau_s: float | None) -> np.ndarray:
    """Population grid over (detuning rows, pulse-width columns).

    Each row is a detuned time-Rabi trace: rate sqrt(Omega^2 + delta^2),
    contrast (Omega/Omega')^2, optional exponential decay.  Normalized
    amplitude (A = 1, offset 0).
    """
    widths = np.asarray(widths_s, dtype=float)
    detunings = np.asarray(detunings_hz, dtype=float)
    if widths.size == 0 or detunings.size == 0:
        raise ValueError("width and detuning grids must be non-empty")
    if omega_r_hz <= 0.0:
        raise ValueError(f"Rabi rate must be positive, got {omega_r_hz}")
    omega_prime = np.hypot(omega_r_hz, detunings)[:, None]
    contrast = (omega_r_hz / omega_prime) ** 2
    envelope = np.exp(-widths[None, :] / tau_s) if tau_s is not None else 1.0
    return contrast * envelope * np.sin(math.pi * omega_prime * widths[None, :]) ** 2


def dispersive_shift(g_q_ro_hz: float, delta_ro_hz: float) -> float:
    """Dispersive readout shift chi = g^2 / Delta (antisymmetric in Delta)."""
    if delta_ro_hz == 0.0:
        raise ValueError("readout detuning must be non-zero")
    return g_q_ro_hz**2 / delta_ro_hz


def average_power(p_pk_w: float, schedule: PulseSchedule) -> float:
    """Average drive power p_pk * width * rep_rate * shape_factor."""
    if p_pk_w < 0.0:
        raise ValueError(f"peak power must be non-negative, got {p_pk_w}")
    return p_pk_w * schedule.duty * schedule.shape_factor


def decay_models(t_s, q: QubitParams):
    """(T1 excited population, Ramsey fringe envelope) at time t."""
    t = np.asarray(t_s, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("time must be non-negative")
    t1 = np.exp(-t / q.t1_s)
    ramsey = np.exp(-t / q.t2_star_s)
    if np.isscalar(t_s):
        return float(t1), float(ramsey)
    return t1, ramsey
