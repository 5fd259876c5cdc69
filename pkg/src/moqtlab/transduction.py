"""Steady-state input-output model of the pump-enhanced beam-splitter interaction.

A red-detuned pump parked on the lower optical supermode turns the
electro-optic interaction into a beam splitter between the upper supermode
and the microwave mode, with coupling g = sqrt(n_pump) * g_eo.  Everything
downstream is a 2x2 linear response problem: the scattering matrix between
the optical and microwave ports at a given probe detuning, its peak
|S_om|^2 (the photon-number conversion efficiency), the 3 dB bandwidth, and
the roll-off that appears once absorbed pump power heats the superconductor.

All public signatures take ordinary Hz (the *_hz convention); conversion to
angular rates happens inside, where the physics needs it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ModelError
from .units import TWO_PI, AngularFrequency, Power, Transmittance, photon_flux


def _check_rates(name: str, kappa_i_hz: float, kappa_e_hz: float) -> None:
    if kappa_i_hz < 0.0 or kappa_e_hz < 0.0:
        raise ValueError(f"{name}: loss rates must be non-negative, got ({kappa_i_hz}, {kappa_e_hz})")
    if kappa_i_hz + kappa_e_hz <= 0.0:
        raise ValueError(f"{name}: total linewidth must be positive")


@dataclass(frozen=True)
class OpticalModeParams:
    """One optical supermode: frequency, intrinsic and external linewidth (Hz)."""

    f_hz: float
    kappa_i_hz: float
    kappa_e_hz: float

    def __post_init__(self) -> None:
        if self.f_hz <= 0.0:
            raise ValueError(f"mode frequency must be positive, got {self.f_hz}")
        _check_rates("optical mode", self.kappa_i_hz, self.kappa_e_hz)

    @property
    def kappa_hz(self) -> float:
        return self.kappa_i_hz + self.kappa_e_hz


@dataclass(frozen=True)
class MicrowaveModeParams:
    """LC microwave mode: frequency, intrinsic and external linewidth (Hz)."""

    f_hz: float
    kappa_i_hz: float
    kappa_e_hz: float

    def __post_init__(self) -> None:
        if self.f_hz <= 0.0:
            raise ValueError(f"mode frequency must be positive, got {self.f_hz}")
        _check_rates("microwave mode", self.kappa_i_hz, self.kappa_e_hz)

    @property
    def kappa_hz(self) -> float:
        return self.kappa_i_hz + self.kappa_e_hz


@dataclass(frozen=True)
class PumpDrive:
    """Optical pump: peak power, detuning from the lower supermode, schedule.

    ``detuning_hz`` is the laser offset from the pumped (lower) supermode.
    Pulsed drives carry a rectangular pulse_width / rep_rate schedule; a CW
    drive ignores both and has duty 1.
    """

    power_peak_w: float
    detuning_hz: float = 0.0
    wavelength_m: float = 1.53e-6
    pulse_width_s: float | None = None
    rep_rate_hz: float | None = None
    cw: bool = False

    def __post_init__(self) -> None:
        if self.power_peak_w < 0.0:
            raise ValueError(f"pump power must be non-negative, got {self.power_peak_w}")
        if self.wavelength_m <= 0.0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength_m}")
        if not self.cw:
            if self.pulse_width_s is None or self.rep_rate_hz is None:
                raise ValueError("pulsed drive needs both pulse_width_s and rep_rate_hz (or cw=True)")
            if self.pulse_width_s <= 0.0 or self.rep_rate_hz <= 0.0:
                raise ValueError("pulse width and repetition rate must be positive")
            if self.duty > 1.0:
                raise ValueError(f"duty cycle {self.duty} exceeds 1")

    @property
    def duty(self) -> float:
        if self.cw:
            return 1.0
        return self.pulse_width_s * self.rep_rate_hz

    @property
    def power_avg_w(self) -> float:
        """Duty-cycle average of the rectangular pulse train."""
        return self.power_peak_w * self.duty


@dataclass(frozen=True)
class TransducerState:
    """Full converter: optical supermode pair, microwave mode, g_eo, pump."""

    optical_minus: OpticalModeParams
    optical_plus: OpticalModeParams
    microwave: MicrowaveModeParams
    g_eo_hz: float
    pump: PumpDrive

    def __post_init__(self) -> None:
        if self.g_eo_hz < 0.0:
            raise ValueError(f"vacuum coupling must be non-negative, got {self.g_eo_hz}")
        if self.optical_plus.f_hz < self.optical_minus.f_hz:
            raise ValueError("plus supermode must lie above the minus supermode")

    @property
    def mismatch_hz(self) -> float:
        """Triple-resonance error (f_plus - f_minus) - f_m."""
        return self.optical_plus.f_hz - self.optical_minus.f_hz - self.microwave.f_hz

    @property
    def is_triple_resonant(self) -> bool:
        return abs(self.mismatch_hz) <= self.microwave.kappa_hz / 10.0


def pump_photon_number(pump: PumpDrive, mode: OpticalModeParams) -> float:
    """Intracavity pump photons in the pumped mode at the pump's peak power.

    n = kappa_e / (Delta^2 + (kappa/2)^2) * P / (hbar * omega_L), all rates
    angular; Lorentzian in the pump detuning, maximal on resonance.
    """
    if pump.power_peak_w == 0.0:
        return 0.0
    omega_laser = AngularFrequency.from_vacuum_wavelength(pump.wavelength_m)
    flux = photon_flux(Power(watts=pump.power_peak_w), omega_laser)
    kappa_e = TWO_PI * mode.kappa_e_hz
    kappa = TWO_PI * mode.kappa_hz
    delta = TWO_PI * pump.detuning_hz
    return kappa_e / (delta**2 + (kappa / 2.0) ** 2) * flux


def enhanced_coupling(g_eo_hz: float, n_pump: float) -> float:
    """Pump-enhanced beam-splitter coupling g = sqrt(n) * g_eo [Hz]."""
    if n_pump < 0.0:
        raise ValueError(f"photon number must be non-negative, got {n_pump}")
    return math.sqrt(n_pump) * g_eo_hz


def cooperativity(g_eo_hz: float, n_pump: float, kappa_plus_hz: float, kappa_m_hz: float) -> float:
    """C = 4 g_eo^2 n / (kappa_plus * kappa_m); any consistent rate unit."""
    if kappa_plus_hz <= 0.0 or kappa_m_hz <= 0.0:
        raise ValueError("linewidths must be positive")
    return 4.0 * g_eo_hz**2 * n_pump / (kappa_plus_hz * kappa_m_hz)


def ideal_peak_efficiency(ext_ratio_optical: float, ext_ratio_microwave: float, coop: float) -> float:
    """Matched-point efficiency (ke_o/k_o)(ke_m/k_m) * 4C/(1+C)^2.

    Exact value of |S_om|^2 at zero probe detuning for a triple-resonant,
    resonantly pumped converter; the scattering matrix reduces to this
    algebraically, which the test suite exploits as a cross-check.
    """
    for name, ratio in (("optical", ext_ratio_optical), ("microwave", ext_ratio_microwave)):
        if not 0.0 <= ratio <= 1.0:
            raise ValueError(f"{name} extraction ratio must lie in [0, 1], got {ratio}")
    if coop < 0.0:
        raise ValueError(f"cooperativity must be non-negative, got {coop}")
    return ext_ratio_optical * ext_ratio_microwave * 4.0 * coop / (1.0 + coop) ** 2


def scattering_matrix(state: TransducerState, probe_detuning_hz: float) -> np.ndarray:
    """2x2 scattering matrix between the upper optical and microwave ports.

    The probe detuning is measured from the microwave resonance; the
    up-converted sideband lands on the upper supermode offset by the pump
    detuning minus the triple-resonance mismatch.  With the angular
    susceptibility denominators D = i*delta + kappa/2,

        S_oo = kappa_e,o * D_m / (D_o D_m + g^2) - 1
        S_mm = kappa_e,m * D_o / (D_o D_m + g^2) - 1
        S_om = S_mo = -i sqrt(kappa_e,o kappa_e,m) g / (D_o D_m + g^2)

    |S_om|^2 is the photon-number conversion efficiency.
    """
    plus, mw = state.optical_plus, state.microwave
    g = TWO_PI * enhanced_coupling(state.g_eo_hz, pump_photon_number(state.pump, state.optical_minus))
    delta_m = TWO_PI * probe_detuning_hz
    delta_o = TWO_PI * (probe_detuning_hz + state.pump.detuning_hz - state.mismatch_hz)
    d_o = 1j * delta_o + TWO_PI * plus.kappa_hz / 2.0
    d_m = 1j * delta_m + TWO_PI * mw.kappa_hz / 2.0
    det = d_o * d_m + g * g
    ke_o = TWO_PI * plus.kappa_e_hz
    ke_m = TWO_PI * mw.kappa_e_hz
    s_om = -1j * math.sqrt(ke_o * ke_m) * g / det
    return np.array(
        [
            [ke_o * d_m / det - 1.0, s_om],
            [s_om, ke_m * d_o / det - 1.0],
        ]
    )


def conversion_efficiency(state: TransducerState):
    """Peak efficiency |S_om(0)|^2 and an eta(detuning) sampler.

    Returns (eta_peak, sampler); the sampler accepts a probe detuning in Hz
    and is what the bandwidth search walks.
    """

    def sample(probe_detuning_hz: float) -> float:
        s_om = scattering_matrix(state, probe_detuning_hz)[0, 1]
        return float(abs(s_om) ** 2)

    return sample(0.0), sample


def bandwidth_3db(state: TransducerState) -> float:
    """Full width (Hz) over which |S_om|^2 stays above half its zero-detuning value.

    Each side is bracketed by doubling steps outward from zero, then bisected.
    """
    eta_peak, eta = conversion_efficiency(state)
    if eta_peak <= 0.0:
        raise ModelError("conversion efficiency is zero; bandwidth undefined")
    half = eta_peak / 2.0

    def crossing(direction: float) -> float:
        step = state.microwave.kappa_hz / 4.0
        inner, outer = 0.0, direction * step
        for _ in range(200):
            if eta(outer) < half:
                break
            inner, outer = outer, outer * 2.0
        else:
            raise ModelError("no half-power crossing found; response does not decay")
        for _ in range(100):
            mid = 0.5 * (inner + outer)
            if eta(mid) >= half:
                inner = mid
            else:
                outer = mid
        return 0.5 * (inner + outer)

    return crossing(+1.0) - crossing(-1.0)


def pump_heating_model(
    p_avg_w: float,
    base: MicrowaveModeParams,
    beta_loss_hz_per_w: float,
    beta_shift_hz_per_w: float,
) -> MicrowaveModeParams:
    """Microwave mode under absorbed-pump heating, linear in average power.

    Quasiparticle generation adds internal loss and red-shifts the resonance:
    kappa_i -> kappa_i + beta_loss * p_avg, f -> f - beta_shift * p_avg.
    """
    if beta_loss_hz_per_w < 0.0 or beta_shift_hz_per_w < 0.0:
        raise ValueError("heating coefficients must be non-negative")
    if p_avg_w < 0.0:
        raise ValueError(f"average power must be non-negative, got {p_avg_w}")
    return MicrowaveModeParams(
        f_hz=base.f_hz - beta_shift_hz_per_w * p_avg_w,
        kappa_i_hz=base.kappa_i_hz + beta_loss_hz_per_w * p_avg_w,
        kappa_e_hz=base.kappa_e_hz,
    )


def heated_state(
    state: TransducerState,
    power_peak_w: float,
    schedule: tuple[float, float] | None,
    beta_loss_hz_per_w: float,
    beta_shift_hz_per_w: float,
) -> TransducerState:
    """State at one operating point: new pump power/schedule, heated microwave mode.

    ``schedule`` is (pulse_width_s, rep_rate_hz), or None for CW.
    """
    if schedule is None:
        pump = replace(state.pump, power_peak_w=power_peak_w, pulse_width_s=None, rep_rate_hz=None, cw=True)
    else:
        width, rep = schedule
        pump = replace(state.pump, power_peak_w=power_peak_w, pulse_width_s=width, rep_rate_hz=rep, cw=False)
    mw = pump_heating_model(pump.power_avg_w, state.microwave, beta_loss_hz_per_w, beta_shift_hz_per_w)
    return replace(state, pump=pump, microwave=mw)


@dataclass(frozen=True)
class SweepPoint:
    """One row of the efficiency sweep (the CSV column set)."""

    p_peak_w: float
    duty: float
    p_avg_w: float
    n_pump: float
    g_hz: float
    cooperativity: float
    eta_peak: float
    bw_3db_hz: float


def sweep_point(
    state: TransducerState,
    beta_loss_hz_per_w: float = 0.0,
    beta_shift_hz_per_w: float = 0.0,
) -> SweepPoint:
    """Evaluate one operating point of ``state`` including its own heating."""
    hot = heated_state(
        state,
        state.pump.power_peak_w,
        None if state.pump.cw else (state.pump.pulse_width_s, state.pump.rep_rate_hz),
        beta_loss_hz_per_w,
        beta_shift_hz_per_w,
    )
    n_pump = pump_photon_number(hot.pump, hot.optical_minus)
    g_hz = enhanced_coupling(hot.g_eo_hz, n_pump)
    coop = cooperativity(hot.g_eo_hz, n_pump, hot.optical_plus.kappa_hz, hot.microwave.kappa_hz)
    eta_peak, _ = conversion_efficiency(hot)
    bw = bandwidth_3db(hot) if eta_peak > 0.0 else 0.0
    return SweepPoint(
        p_peak_w=hot.pump.power_peak_w,
        duty=hot.pump.duty,
        p_avg_w=hot.pump.power_avg_w,
        n_pump=n_pump,
        g_hz=g_hz,
        cooperativity=coop,
        eta_peak=eta_peak,
        bw_3db_hz=bw,
    )


def efficiency_sweep(
    state: TransducerState,
    powers_w: list[float],
    schedules: list[tuple[float, float] | None],
    beta_loss_hz_per_w: float = 0.0,
    beta_shift_hz_per_w: float = 0.0,
) -> list[SweepPoint]:
    """Efficiency table over (peak power, pulse schedule) operating points.

    Heating follows the average power of each point, so the table reproduces
    both the linear low-power regime and the duty-cycle-dependent roll-off.
    Zero-power rows are emitted with zero efficiency and zero bandwidth.
    """
    if not powers_w or not schedules:
        raise ValueError("power and schedule lists must be non-empty")
    rows = []
    for schedule in schedules:
        for p_pk in powers_w:
            if p_pk == 0.0:
                duty = 1.0 if schedule is None else schedule[0] * schedule[1]
                rows.append(SweepPoint(0.0, duty, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0))
                continue
            cold = heated_state(state, p_pk, schedule, 0.0, 0.0)
            rows.append(sweep_point(cold, beta_loss_hz_per_w, beta_shift_hz_per_w))
    return rows


def calibrate_heating(
    state: TransducerState,
    anchors: list[tuple[float, tuple[float, float] | None, float]],
) -> tuple[float, float]:
    """Heating coefficients (beta_loss, beta_shift) fitted to two anchor points.

    Each anchor is (peak power W, schedule, measured peak efficiency).  Peak
    efficiency decreases monotonically in both coefficients (loss broadens the
    microwave mode, shift detunes it), so the square system is solved by
    nested bisection: the inner loop picks beta_loss to reproduce the weakly
    heated anchor at a trial beta_shift, the outer loop bisects beta_shift on
    the strongly heated anchor.  More robust than Newton here, whose first
    step overshoots the badly scaled shift direction into a flat region.
    """
    if len(anchors) != 2:
        raise ValueError(f"exactly two anchor points are required, got {len(anchors)}")
    for _, _, target in anchors:
        if target <= 0.0:
            raise ValueError("anchor efficiencies must be positive")

    def p_avg_of(anchor):
        p_pk, schedule, _ = anchor
        return p_pk if schedule is None else p_pk * schedule[0] * schedule[1]

    # the hotter point constrains the shift; bisect it in the outer loop
    weak, strong = sorted(anchors, key=p_avg_of)

    def eta_at(anchor, b_loss: float, b_shift: float) -> float:
        p_pk, schedule, _ = anchor
        hot = heated_state(state, p_pk, schedule, b_loss, b_shift)
        return conversion_efficiency(hot)[0]

    def loss_matching_weak(b_shift: float) -> float | None:
        """beta_loss reproducing the weak anchor, or None if out of reach."""
        target = weak[2]
        if eta_at(weak, 0.0, b_shift) < target:
            return None
        hi = 1e12
        while eta_at(weak, hi, b_shift) > target:
            hi *= 2.0
            if hi > 1e30:
                raise ModelError("anchor efficiency too small to calibrate against")
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if eta_at(weak, mid, b_shift) > target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-14 * hi:
                break
        return 0.5 * (lo + hi)

    def strong_excess(b_shift: float) -> float | None:
        b_loss = loss_matching_weak(b_shift)
        if b_loss is None:
            return None
        return eta_at(strong, b_loss, b_shift) - strong[2]

    first = strong_excess(0.0)
    if first is None or first < 0.0:
        raise ModelError("anchors are inconsistent with non-negative heating coefficients")
    lo, hi = 0.0, 1e12
    while True:
        excess = strong_excess(hi)
        if excess is None or excess <= 0.0:
            break
        lo = hi
        hi *= 2.0
        if hi > 1e30:
            raise ModelError("anchors are inconsistent with non-negative heating coefficients")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        excess = strong_excess(mid)
        if excess is not None and excess > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    b_shift = lo
    b_loss = loss_matching_weak(b_shift)
    if b_loss is None:
        raise ModelError("heating calibration did not converge")
    for anchor in (weak, strong):
        if abs(eta_at(anchor, b_loss, b_shift) - anchor[2]) > 1e-9 * anchor[2]:
            raise ModelError("heating calibration did not converge")
    return float(b_loss), float(b_shift)


@dataclass(frozen=True)
class LinkCalibration:
    """Result of the bidirectional loss calibration."""

    eta_m_in: float
    eta_m_out: float
    eta_m_product: float
    eta_transducer: float


def calibrate_link(
    meas_fwd: float,
    meas_rev: float,
    eta_opt_in: Transmittance,
    eta_opt_out: Transmittance,
    f_o_hz: float,
    f_m_hz: float,
    *,
    eta_m_in: float | None = None,
    eta_m_out: float | None = None,
    eta_transducer: float | None = None,
) -> LinkCalibration:
    """Microwave link gains and on-chip efficiency from bidirectional measurements.

    The two measured power-ratio efficiencies factor (with the photon-energy
    ratio made explicit) as

        meas_fwd = (f_o/f_m) * eta_m_in  * eta_opt_out * eta_t
        meas_rev = (f_m/f_o) * eta_opt_in * eta_m_out  * eta_t

    using the fact that the on-chip photon-number efficiency eta_t is the
    same in both directions.  Dividing out the optical gains (measured at
    room temperature) leaves two products, A = eta_m_in * eta_t and
    B = eta_m_out * eta_t: the system is underdetermined by exactly one
    degree of freedom, so one of eta_m_in / eta_m_out / eta_transducer must
    be supplied to close it.  Any inferred transmittance outside (0, 1] is
    rejected with the offending quantity named.
    """
    if meas_fwd <= 0.0 or meas_rev <= 0.0:
        raise ValueError("measured efficiencies must be positive")
    if f_o_hz <= 0.0 or f_m_hz <= 0.0:
        raise ValueError("mode frequencies must be positive")
    if eta_opt_in.ratio == 0.0 or eta_opt_out.ratio == 0.0:
        raise ValueError("optical link gains must be non-zero")
    closures = {"eta_m_in": eta_m_in, "eta_m_out": eta_m_out, "eta_transducer": eta_transducer}
    given = {k: v for k, v in closures.items() if v is not None}
    if len(given) != 1:
        raise ValueError(
            "the two-equation system is underdetermined; supply exactly one of "
            "eta_m_in, eta_m_out, eta_transducer"
        )
    (name, value), = given.items()
    if not 0.0 < value <= 1.0:
        raise ValueError(f"{name} must lie in (0, 1], got {value}")

    a = meas_fwd * (f_m_hz / f_o_hz) / eta_opt_out.ratio  # eta_m_in * eta_t
    b = meas_rev * (f_o_hz / f_m_hz) / eta_opt_in.ratio  # eta_m_out * eta_t

    if name == "eta_m_in":
        eta_t = a / value
        inferred = {"eta_transducer": eta_t, "eta_m_out": b / eta_t, "eta_m_in": value}
    elif name == "eta_m_out":
        eta_t = b / value
        inferred = {"eta_transducer": eta_t, "eta_m_in": a / eta_t, "eta_m_out": value}
    else:
        eta_t = value
        inferred = {"eta_transducer": eta_t, "eta_m_in": a / eta_t, "eta_m_out": b / eta_t}

    for quantity, val in inferred.items():
        if not 0.0 < val <= 1.0:
            raise ModelError(f"inferred {quantity} = {val:.6g} is not a physical transmittance")
    return LinkCalibration(
        eta_m_in=inferred["eta_m_in"],
        eta_m_out=inferred["eta_m_out"],
        eta_m_product=inferred["eta_m_in"] * inferred["eta_m_out"],
        eta_transducer=inferred["eta_transducer"],
    )
