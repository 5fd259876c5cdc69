"""Coupled-ring supermodes and vernier alignment.

Two rings with slightly different free spectral ranges realign only every
fsr_a * fsr_b / |fsr_a - fsr_b|.  Near an alignment the bare modes hybridize
into supermodes split by at least 2 mu, and a DC bias tunes that splitting
onto the microwave resonance (triple resonance).

Frequencies are ordinary Hz throughout; nothing here is angular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelError


@dataclass(frozen=True)
class RingComb:
    """Resonance comb of one ring: anchor + m * fsr for m in [0, count)."""

    fsr_hz: float
    anchor_hz: float
    count: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.fsr_hz) or self.fsr_hz <= 0.0:
            raise ValueError(f"free spectral range must be positive, got {self.fsr_hz}")
        if self.count < 1:
            raise ValueError(f"count must be at least 1, got {self.count}")

    def frequencies(self) -> np.ndarray:
        return self.anchor_hz + self.fsr_hz * np.arange(self.count, dtype=float)

    @classmethod
    def spanning(cls, anchor_hz: float, fsr_hz: float, f_lo_hz: float, f_hi_hz: float) -> "RingComb":
        """Comb on the same grid, rebased to cover [f_lo, f_hi]."""
        if f_hi_hz <= f_lo_hz:
            raise ValueError(f"need f_lo < f_hi, got ({f_lo_hz}, {f_hi_hz})")
        m_lo = math.ceil((f_lo_hz - anchor_hz) / fsr_hz)
        m_hi = math.floor((f_hi_hz - anchor_hz) / fsr_hz)
        if m_hi < m_lo:
            raise ModelError(f"window [{f_lo_hz:.6g}, {f_hi_hz:.6g}] Hz contains no comb line")
        return cls(fsr_hz=fsr_hz, anchor_hz=anchor_hz + m_lo * fsr_hz, count=m_hi - m_lo + 1)


@dataclass(frozen=True)
class HybridPair:
    """One anti-crossing: supermode pair, splitting, and ring-A weight.

    ``participation`` is the weight of ring A in the upper (plus) supermode:
    1/2 at degeneracy, -> 1 when ring A sits far above ring B.  The lower
    supermode carries the complementary weight.
    """

    omega_minus_hz: float
    omega_plus_hz: float
    splitting_hz: float
    participation: float

    def __post_init__(self) -> None:
        if self.omega_plus_hz < self.omega_minus_hz:
            raise ValueError("plus supermode must lie at or above the minus supermode")
        if not 0.0 <= self.participation <= 1.0:
            raise ValueError(f"participation must lie in [0, 1], got {self.participation}")


def hybridize(f_a_hz: float, f_b_hz: float, mu_hz: float) -> HybridPair:
    """Supermodes of two modes coupled at rate mu (2x2 eigenproblem).

    Eigenvalues are the mean frequency +/- sqrt(mu^2 + (delta/2)^2) with
    delta = f_a - f_b, so the splitting is 2 sqrt(mu^2 + delta^2/4): even in
    delta and minimized at 2 mu on degeneracy.
    """
    if mu_hz < 0.0:
        raise ValueError(f"coupling rate must be non-negative, got {mu_hz}")
    delta = f_a_hz - f_b_hz
    mean = 0.5 * (f_a_hz + f_b_hz)
    half = math.hypot(mu_hz, 0.5 * delta)
    if half == 0.0:
        weight_a = 0.5
    else:
        weight_a = 0.5 * (1.0 + 0.5 * delta / half)
    return HybridPair(
        omega_minus_hz=mean - half,
        omega_plus_hz=mean + half,
        splitting_hz=2.0 * half,
        participation=weight_a,
    )


def vernier_period(fsr_a_hz: float, fsr_b_hz: float) -> float:
    """Comb realignment period fsr_a * fsr_b / |fsr_a - fsr_b|."""
    if fsr_a_hz <= 0.0 or fsr_b_hz <= 0.0:
        raise ValueError(f"free spectral ranges must be positive, got ({fsr_a_hz}, {fsr_b_hz})")
    if fsr_a_hz == fsr_b_hz:
        raise ValueError("equal free spectral ranges never realign (infinite vernier period)")
    return fsr_a_hz * fsr_b_hz / abs(fsr_a_hz - fsr_b_hz)


def vernier_period_wavelength(fsr_a_hz: float, fsr_b_hz: float, wavelength_m: float) -> float:
    """Vernier period expressed as a wavelength span around ``wavelength_m``."""
    if wavelength_m <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength_m}")
    from .units import C_VACUUM

    return vernier_period(fsr_a_hz, fsr_b_hz) * wavelength_m**2 / C_VACUUM


def spectrum_scan(
    comb_a: RingComb,
    comb_b: RingComb,
    mu_hz: float,
    window_lo_hz: float,
    window_hi_hz: float,
) -> list[HybridPair]:
    """Hybridized pair for every ring-A line in the window, sorted by omega_minus.

    Each A line is paired with its nearest B line; on an exact tie the
    lower-frequency B line wins, so the output is deterministic.  Splittings
    sweep through a 2 mu minimum once per vernier period.
    """
    if window_hi_hz <= window_lo_hz:
        return []
    lines_a = comb_a.frequencies()
    lines_a = lines_a[(lines_a >= window_lo_hz) & (lines_a <= window_hi_hz)]
    lines_b = comb_b.frequencies()
    pairs = []
    for f_a in lines_a:
        position = (f_a - comb_b.anchor_hz) / comb_b.fsr_hz
        m_low = math.floor(position)
        # frac == 0.5 pairs downward (deterministic tie-break)
        m = m_low if position - m_low <= 0.5 else m_low + 1
        m = min(max(m, 0), comb_b.count - 1)
        pairs.append(hybridize(f_a, lines_b[m], mu_hz))
    pairs.sort(key=lambda p: p.omega_minus_hz)
    return pairs


def scan_period(pairs: list[HybridPair]) -> float:
    """Vernier period extracted from a splitting scan.

    Alignment points are the local minima of the splitting; their positions
    are quantized to the ring FSR, so the period is taken as the slope of a
    straight-line fit of minimum frequency against ordinal number, which
    averages the quantization away.
    """
    if len(pairs) < 3:
        raise ModelError("need at least three scan points to locate splitting minima")
    f = np.array([p.omega_minus_hz for p in pairs])
    s = np.array([p.splitting_hz for p in pairs])
    interior = (s[1:-1] <= s[:-2]) & (s[1:-1] <= s[2:])
    idx = np.flatnonzero(interior) + 1
    if idx.size == 0:
        raise ModelError("no splitting minima inside the scan window")
    # collapse runs of adjacent indices (flat-bottomed minima) to one point
    keep = np.concatenate(([True], np.diff(idx) > 1))
    idx = idx[keep]
    # an alignment on the window boundary still counts, but only if its
    # splitting is comparable to the interior minima; a mid-slope edge
    # point must not masquerade as an extra period
    ceiling = 1.2 * float(np.max(s[idx]))
    for edge in (0, s.size - 1):
        if edge not in idx and s[edge] <= ceiling:
            idx = np.sort(np.append(idx, edge))
    if idx.size < 2:
        raise ModelError(
            f"found {idx.size} alignment point(s); widen the scan to cover at least two vernier periods"
        )
    positions = _refined_minima(f, s, idx)
    # alignment ordinals from the spacings themselves, robust to one
    # missed minimum inside the window
    spacings = np.diff(positions)
    period0 = float(np.median(spacings))
    ordinals = np.concatenate(([0.0], np.cumsum(np.round(spacings / period0))))
    slope = np.polyfit(ordinals, positions, 1)[0]
    return float(slope)


def _refined_minima(f: np.ndarray, s: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Sub-lattice alignment positions by parabolic refinement.

    The squared splitting is exactly quadratic in the scan position near an
    alignment (s^2 = 4 mu^2 + dfsr^2 (m - m0)^2), so the vertex of the
    parabola through a minimum of s^2 and its neighbors removes the
    mode-grid quantization entirely, not just to leading order.
    """
    positions = []
    q = s * s
    for i in idx:
        if 0 < i < s.size - 1:
            denom = q[i - 1] - 2.0 * q[i] + q[i + 1]
            shift = 0.5 * (q[i - 1] - q[i + 1]) / denom if denom > 0.0 else 0.0
            shift = min(max(shift, -0.5), 0.5)
            half_step = (f[i + 1] - f[i - 1]) / 2.0
            positions.append(f[i] + shift * half_step)
        else:
            positions.append(f[i])
    return np.array(positions)


def find_triple_resonance(
    pairs: list[HybridPair],
    f_m_hz: float,
    tune_rate_hz_per_v: float,
    v_max: float,
) -> list[tuple[HybridPair, float]]:
    """Pairs whose splitting can be biased onto the microwave frequency.

    The bias model is linear: splitting(V) = splitting(0) + tune_rate * V.
    Returns (pair, required bias) for every pair reachable within |V| <=
    v_max, sorted by |V| so the cheapest candidate comes first.
    """
    if tune_rate_hz_per_v == 0.0:
        raise ValueError("tuning rate must be non-zero")
    if v_max < 0.0:
        raise ValueError(f"bias limit must be non-negative, got {v_max}")
    candidates = []
    for pair in pairs:
        v_dc = (f_m_hz - pair.splitting_hz) / tune_rate_hz_per_v
        if abs(v_dc) <= v_max:
            candidates.append((pair, v_dc))
    candidates.sort(key=lambda item: (abs(item[1]), item[0].omega_minus_hz))
    return candidates


def required_bias(pair: HybridPair, f_m_hz: float, tune_rate_hz_per_v: float) -> float:
    """Bias moving one pair's splitting onto f_m under the linear model."""
    if tune_rate_hz_per_v == 0.0:
        raise ValueError("tuning rate must be non-zero")
    return (f_m_hz - pair.splitting_hz) / tune_rate_hz_per_v
