"""Unit types and conversions shared by every other module.

Conventions used throughout the package:

* Quantities quoted "per 2 pi" (ordinary frequency) travel in fields and
  arguments suffixed ``_hz``.  Angular rates (rad/s) appear only inside
  formula bodies, converted at a single point via :data:`TWO_PI` or the
  :class:`AngularFrequency` type.  Mixing the two conventions is the classic
  factor-of-2pi bug in transducer budgets; keeping the conversion in one
  place is the whole point of this module.
* Powers are watts, loss budgets are dB, probabilities are dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

HBAR = 1.054571817e-34  # reduced Planck constant [J s]
PLANCK = 6.62607015e-34  # Planck constant [J s]
C_VACUUM = 299792458.0  # speed of light in vacuum [m/s]
TWO_PI = 2.0 * math.pi


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class AngularFrequency:
    """Angular frequency of a physical mode, stored in rad/s (> 0)."""

    rad_per_s: float

    def __post_init__(self) -> None:
        value = _require_finite("angular frequency", self.rad_per_s)
        if value <= 0.0:
            raise ValueError(f"angular frequency must be positive, got {value}")
        object.__setattr__(self, "rad_per_s", value)

    @classmethod
    def from_hz(cls, freq_hz: float) -> "AngularFrequency":
        return cls(TWO_PI * float(freq_hz))

    @classmethod
    def from_vacuum_wavelength(cls, wavelength_m: float) -> "AngularFrequency":
        wavelength_m = _require_finite("wavelength", wavelength_m)
        if wavelength_m <= 0.0:
            raise ValueError(f"wavelength must be positive, got {wavelength_m}")
        return cls(TWO_PI * C_VACUUM / wavelength_m)

    @property
    def hz(self) -> float:
        return self.rad_per_s / TWO_PI


@dataclass(frozen=True)
class Power:
    """Optical or microwave power in watts (>= 0)."""

    watts: float

    def __post_init__(self) -> None:
        value = _require_finite("power", self.watts)
        if value < 0.0:
            raise ValueError(f"power must be non-negative, got {value}")
        object.__setattr__(self, "watts", value)

    @classmethod
    def from_dbm(cls, dbm: float) -> "Power":
        dbm = _require_finite("power in dBm", dbm)
        return cls(10.0 ** ((dbm - 30.0) / 10.0))

    @property
    def dbm(self) -> float:
        if self.watts == 0.0:
            return -math.inf
        return 10.0 * math.log10(self.watts) + 30.0


@dataclass(frozen=True)
class Transmittance:
    """Power transmittance of a lossy element, dimensionless in [0, 1]."""

    ratio: float

    def __post_init__(self) -> None:
        value = _require_finite("transmittance", self.ratio)
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"transmittance must lie in [0, 1], got {value}")
        object.__setattr__(self, "ratio", value)

    @classmethod
    def from_db_loss(cls, loss_db: float) -> "Transmittance":
        loss_db = _require_finite("loss", loss_db)
        if loss_db < 0.0:
            raise ValueError(f"loss in dB must be non-negative, got {loss_db}")
        return cls(10.0 ** (-loss_db / 10.0))

    @property
    def db_loss(self) -> float:
        if self.ratio == 0.0:
            return math.inf
        return -10.0 * math.log10(self.ratio)


def dbm_to_watts(dbm: float) -> Power:
    """Convert an instrument power reading in dBm to watts."""
    return Power.from_dbm(dbm)


def db_to_loss_probability(loss_db: float) -> float:
    """Probability that a photon is lost in an element with ``loss_db`` of loss.

    1 - 10^(-loss_db/10); e.g. a 3 dB element swallows about half the photons.
    """
    return 1.0 - Transmittance.from_db_loss(loss_db).ratio


def photon_flux(power: Power, omega: AngularFrequency) -> float:
    """Photon flux [1/s] carried by ``power`` at carrier frequency ``omega``.

    flux = P / (hbar * omega); linear in power by construction.
    """
    return power.watts / (HBAR * omega.rad_per_s)
