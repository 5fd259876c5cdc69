"""Single-photon electro-optic coupling rate from scalar device parameters.

The vacuum coupling between a microwave LC mode and an optical ring is split
into two factors: a classical electro-optic susceptibility

    G [Hz/V] = n_e^2 r33 f_opt alpha Gamma / (2 |V/E|)

(the optical frequency pulled per volt on the electrodes), and the zero-point
voltage of the LC mode,

    V_zpf = sqrt(hbar omega_m / (2 C)),

so that g_eo = G * V_zpf.  All rates here follow the "per 2 pi" convention:
G is in ordinary Hz per volt and g_eo in ordinary Hz.

``alpha`` is the overlap/participation reduction of the modulating field in
the waveguide core (1 for perfect overlap) and ``Gamma`` the mode confinement
factor; ``v_over_e`` is the electrode voltage required per unit electric field
in the film, in V per (V/m), i.e. an effective gap in meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ModelError
from .units import HBAR, TWO_PI, AngularFrequency


@dataclass(frozen=True)
class DeviceGeometry:
    """Scalar electro-optic device description.

    Attributes
    ----------
    n_e:
        Extraordinary refractive index of the film.
    r33_m_per_v:
        Pockels coefficient [m/V].
    alpha:
        Field-overlap reduction factor, in [0, 1].
    gamma:
        Optical confinement factor (> 0; may exceed 1 for slotted designs).
    v_over_e_m:
        Electrode voltage per unit film field [V/(V/m) = m].
    capacitance_f:
        Total capacitance of the microwave mode [F].
    f_opt_hz:
        Optical resonance frequency [Hz].
    """

    n_e: float
    r33_m_per_v: float
    alpha: float
    gamma: float
    v_over_e_m: float
    capacitance_f: float
    f_opt_hz: float

    def __post_init__(self) -> None:
        for name in ("n_e", "r33_m_per_v", "gamma", "v_over_e_m", "capacitance_f", "f_opt_hz"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be finite and positive, got {value}")
        alpha = float(self.alpha)
        if not math.isfinite(alpha) or not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")


@dataclass(frozen=True)
class GratingSpec:
    """Grating coupler description: pitch, incidence angle, guided-mode index."""

    pitch_m: float
    angle_rad: float
    n_eff: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.pitch_m) or self.pitch_m <= 0.0:
            raise ValueError(f"pitch must be finite and positive, got {self.pitch_m}")
        if not math.isfinite(self.n_eff) or self.n_eff <= 0.0:
            raise ValueError(f"n_eff must be finite and positive, got {self.n_eff}")
        if not math.isfinite(self.angle_rad):
            raise ValueError("incidence angle must be finite")


def eo_susceptibility(geometry: DeviceGeometry) -> float:
    """Electro-optic frequency pull G of the optical mode, in Hz per volt."""
    return (
        geometry.n_e**2
        * geometry.r33_m_per_v
        * geometry.f_opt_hz
        * geometry.alpha
        * geometry.gamma
        / (2.0 * geometry.v_over_e_m)
    )


def zero_point_voltage(capacitance_f: float, omega_m: AngularFrequency) -> float:
    """Vacuum voltage fluctuation sqrt(hbar omega_m / 2C) of the LC mode [V]."""
    if not math.isfinite(capacitance_f) or capacitance_f <= 0.0:
        raise ValueError(f"capacitance must be finite and positive, got {capacitance_f}")
    return math.sqrt(HBAR * omega_m.rad_per_s / (2.0 * capacitance_f))


def single_photon_coupling(susceptibility_hz_per_v: float, v_zpf: float) -> float:
    """Vacuum electro-optic coupling rate g_eo = G * V_zpf [Hz]."""
    if not math.isfinite(susceptibility_hz_per_v) or susceptibility_hz_per_v < 0.0:
        raise ValueError(f"susceptibility must be finite and non-negative, got {susceptibility_hz_per_v}")
    if not math.isfinite(v_zpf) or v_zpf < 0.0:
        raise ValueError(f"zero-point voltage must be finite and non-negative, got {v_zpf}")
    return susceptibility_hz_per_v * v_zpf


def coupling_chain(geometry: DeviceGeometry, f_m_hz: float) -> tuple[float, float, float]:
    """Evaluate the full chain (G [Hz/V], V_zpf [V], g_eo [Hz]) for a device."""
    suscept = eo_susceptibility(geometry)
    v_zpf = zero_point_voltage(geometry.capacitance_f, AngularFrequency.from_hz(f_m_hz))
    return suscept, v_zpf, single_photon_coupling(suscept, v_zpf)


def plateau_vs_cladded(g_plateau_hz: float, g_cladded_hz: float) -> float:
    """Coupling-rate ratio between a plateau (direct-contact) and a cladded design."""
    if g_cladded_hz <= 0.0:
        raise ValueError(f"cladded coupling must be positive, got {g_cladded_hz}")
    if g_plateau_hz < 0.0:
        raise ValueError(f"plateau coupling must be non-negative, got {g_plateau_hz}")
    return g_plateau_hz / g_cladded_hz


def grating_phase_match(spec: GratingSpec, wavelength_m: float) -> float:
    """Residual of the grating phase-matching condition at ``wavelength_m`` [1/m].

    residual = k_guided - (k_in sin(theta) + 2 pi / pitch), with
    k_guided = 2 pi n_eff / lambda and k_in = 2 pi / lambda the free-space
    wavevector of the incident beam.  Zero at the operating wavelength; for
    fixed n_eff the residual is monotone in lambda.
    """
    if not math.isfinite(wavelength_m) or wavelength_m <= 0.0:
        raise ValueError(f"wavelength must be finite and positive, got {wavelength_m}")
    k_guided = TWO_PI * spec.n_eff / wavelength_m
    k_in_plane = (TWO_PI / wavelength_m) * math.sin(spec.angle_rad)
    k_grating = TWO_PI / spec.pitch_m
    return k_guided - (k_in_plane + k_grating)


def phase_matched_wavelength(
    spec: GratingSpec,
    wavelength_lo_m: float = 1.2e-6,
    wavelength_hi_m: float = 2.0e-6,
) -> float:
    """Wavelength in [lo, hi] where the grating residual crosses zero.

    Bisection on the (monotone) residual; raises ModelError when the residual
    does not change sign over the window.
    """
    lo, hi = float(wavelength_lo_m), float(wavelength_hi_m)
    if not 0.0 < lo < hi:
        raise ValueError(f"need 0 < lo < hi, got ({lo}, {hi})")
    f_lo = grating_phase_match(spec, lo)
    f_hi = grating_phase_match(spec, hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise ModelError(
            f"no phase-matched wavelength in [{lo:.4g}, {hi:.4g}] m "
            f"(residuals {f_lo:.4g} and {f_hi:.4g} do not bracket zero)"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = grating_phase_match(spec, mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


# Physical search windows for the geometry inversion, one per solvable field.
_PARAM_BOUNDS = {
    "n_e": (1.0, 10.0),
    "r33_m_per_v": (1e-14, 1e-9),
    "alpha": (1e-12, 1.0),
    "gamma": (1e-3, 10.0),
    "v_over_e_m": (1e-9, 1.0),
    "capacitance_f": (1e-18, 1e-6),
}


def solve_geometry_parameter(
    geometry: DeviceGeometry,
    param: str,
    target_g0_hz: float,
    f_m_hz: float,
) -> float:
    """Value of one geometry field that makes the coupling chain hit ``target_g0_hz``.

    g_eo is monotone in every individual field (power laws throughout), so a
    log-domain bisection over the physical window suffices.  Raises ModelError
    when the target is unreachable inside that window.
    """
    if param not in _PARAM_BOUNDS:
        raise ValueError(f"cannot solve for {param!r}; choose one of {sorted(_PARAM_BOUNDS)}")
    if not math.isfinite(target_g0_hz) or target_g0_hz <= 0.0:
        raise ValueError(f"target coupling must be finite and positive, got {target_g0_hz}")

    lo, hi = _PARAM_BOUNDS[param]

    def g_at(value: float) -> float:
        return coupling_chain(replace(geometry, **{param: value}), f_m_hz)[2]

    g_lo, g_hi = g_at(lo), g_at(hi)
    increasing = g_hi > g_lo
    g_min, g_max = min(g_lo, g_hi), max(g_lo, g_hi)
    if not g_min <= target_g0_hz <= g_max:
        raise ModelError(
            f"target g_eo = {target_g0_hz:.6g} Hz outside the achievable range "
            f"[{g_min:.6g}, {g_max:.6g}] Hz for parameter {param!r}"
        )

    log_lo, log_hi = math.log(lo), math.log(hi)
    for _ in range(200):
        log_mid = 0.5 * (log_lo + log_hi)
        g_mid = g_at(math.exp(log_mid))
        if (g_mid < target_g0_hz) == increasing:
            log_lo = log_mid
        else:
            log_hi = log_mid
    return math.exp(0.5 * (log_lo + log_hi))
