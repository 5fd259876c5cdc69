"""Nonlinear least squares for the measurement models.

A damped Gauss-Newton engine (Levenberg-Marquardt schedule: damping x10 on a
rejected step, /10 on an accepted one) plus one fitter per measurement:
spectroscopy Lorentzian, time and power Rabi, T1 decay, and Ramsey fringes.
Every built-in model carries an analytic Jacobian; oscillation frequencies
are initialized from the dominant line of a dense discrete spectrum of the
detrended data, so the fitters need no starting guess from the caller.

Fits are deterministic: identical data and initialization produce identical
results, and a fit that runs out of iterations is reported with
converged=False rather than raised.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DatasetFormatError, ModelError

_MAX_ITER = 200
_DAMPING_INIT = 1e-3
_DAMPING_MAX = 1e12
_GRAD_TOL = 1e-10
_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class Dataset:
    """One measured trace: x, y, optional per-point uncertainty."""

    x: np.ndarray
    y: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.ndim != 1 or self.y.ndim != 1 or self.x.size != self.y.size:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if self.x.size < 2:
            raise ValueError("a dataset needs at least two points")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ValueError("dataset values must be finite")
        if np.any(np.diff(self.x) <= 0.0):
            raise ValueError("x must be strictly increasing")
        if self.sigma is not None:
            sig = np.asarray(self.sigma, dtype=float)
            object.__setattr__(self, "sigma", sig)
            if sig.shape != self.x.shape:
                raise ValueError("sigma must match x in length")
            if not np.all(np.isfinite(sig)) or np.any(sig <= 0.0):
                raise ValueError("sigma values must be finite and positive")

    def __len__(self) -> int:
        return int(self.x.size)

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        """Parse `x,y[,sigma]` CSV; '#' lines are comments; errors carry line numbers."""
        columns: list[list[float]] = []
        n_cols = 0
        with open(path, encoding="utf-8") as handle:
            header_seen = False
            for lineno, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = [p.strip() for p in line.split(",")]
                if not header_seen:
                    if parts == ["x", "y"]:
                        n_cols = 2
                    elif parts == ["x", "y", "sigma"]:
                        n_cols = 3
                    else:
                        raise DatasetFormatError(
                            f"expected header 'x,y' or 'x,y,sigma', got {line!r}", line=lineno
                        )
                    header_seen = True
                    columns = [[] for _ in range(n_cols)]
                    continue
                if len(parts) != n_cols:
                    raise DatasetFormatError(
                        f"expected {n_cols} columns, got {len(parts)}", line=lineno
                    )
                try:
                    values = [float(p) for p in parts]
                except ValueError:
                    raise DatasetFormatError(f"non-numeric value in {line!r}", line=lineno) from None
                for col, val in zip(columns, values):
                    col.append(val)
        if not header_seen:
            raise DatasetFormatError("empty dataset: no header line")
        if not columns[0]:
            raise DatasetFormatError("no data rows after the header")
        sigma = np.array(columns[2]) if n_cols == 3 else None
        try:
            return cls(x=np.array(columns[0]), y=np.array(columns[1]), sigma=sigma)
        except ValueError as exc:
            raise DatasetFormatError(str(exc)) from None


@dataclass(frozen=True)
class ModelSpec:
    """A parametric curve: vectorized evaluate(x, params) and its Jacobian."""

    name: str
    param_names: tuple[str, ...]
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None


@dataclass(frozen=True)
class FitResult:
    model: str
    params: dict[str, float]
    sigmas: dict[str, float]
    residual: float
    converged: bool
    iterations: int
    notes: tuple[str, ...] = field(default=())

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "params": {
                name: {"value": self.params[name], "sigma": self.sigmas[name]}
                for name in self.params
            },
            "residual": self.residual,
            "converged": self.converged,
            "iterations": self.iterations,
            "notes": list(self.notes),
        }


def _finite_difference_jacobian(evaluate, x: np.ndarray, params: np.ndarray) -> np.ndarray:
    jac = np.empty((x.size, params.size))
    for j in range(params.size):
        h = max(abs(params[j]), 1.0) * 1e-7
        upper, lower = params.copy(), params.copy()
        upper[j] += h
        lower[j] -= h
        jac[:, j] = (evaluate(x, upper) - evaluate(x, lower)) / (2.0 * h)
    return jac


def least_squares(model: ModelSpec, data: Dataset, init) -> FitResult:
    """Local weighted least-squares minimizer, Levenberg-Marquardt damping.

    Non-convergence after the iteration cap returns the best parameters with
    converged=False; a singular normal matrix falls back to a least-squares
    step, never a crash.
    """
    params = np.asarray(init, dtype=float)
    n_params = len(model.param_names)
    if params.shape != (n_params,):
        raise ValueError(f"{model.name} expects {n_params} initial parameters, got {params.shape}")
    if not np.all(np.isfinite(params)):
        raise ValueError("initial parameters must be finite")
    if len(data) < n_params + 1:
        raise ValueError(f"{model.name} needs at least {n_params + 1} points, got {len(data)}")

    weight = 1.0 / data.sigma if data.sigma is not None else np.ones_like(data.x)

    def residual_of(p: np.ndarray) -> tuple[np.ndarray, float]:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            model_y = model.evaluate(data.x, p)
        r = (data.y - model_y) * weight
        if not np.all(np.isfinite(r)):
            return r, math.inf
        return r, float(r @ r)

    def jacobian_of(p: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if model.jacobian is not None:
                jac = model.jacobian(data.x, p)
            else:
                jac = _finite_difference_jacobian(model.evaluate, data.x, p)
        return jac * weight[:, None]

    r, ssr = residual_of(params)
    if not math.isfinite(ssr):
        raise ValueError("model is not finite at the initial parameters")
    # machine floor: an exact fit leaves rounding-noise residuals whose
    # gradient never reaches the analytic tolerance
    ssr_floor = (1e-12 * max(float(np.linalg.norm(data.y * weight)), 1.0)) ** 2
    damping = _DAMPING_INIT
    converged = False
    iterations = 0
    for iterations in range(1, _MAX_ITER + 1):
        if ssr <= ssr_floor:
            converged = True
            break
        jac = jacobian_of(params)
        grad = jac.T @ r
        if not np.all(np.isfinite(grad)):
            break
        if float(np.max(np.abs(grad))) < _GRAD_TOL:
            converged = True
            break
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        diag[diag <= 0.0] = 1.0
        accepted = False
        while damping <= _DAMPING_MAX:
            try:
                step = np.linalg.solve(jtj + damping * np.diag(diag), grad)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(jtj + damping * np.diag(diag), grad, rcond=None)[0]
            trial = params + step
            r_trial, ssr_trial = residual_of(trial)
            if ssr_trial < ssr:
                params, r = trial, r_trial
                if abs(ssr - ssr_trial) < _RESIDUAL_TOL * max(ssr, 1e-300) or ssr_trial <= ssr_floor:
                    converged = True
                ssr = ssr_trial
                damping = max(damping / 10.0, 1e-12)
                accepted = True
                break
            damping *= 10.0
        if not accepted or converged:
            break

    jac = jacobian_of(params)
    cov = _covariance(jac, ssr, len(data), n_params, data.sigma is not None)
    sigmas = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return FitResult(
        model=model.name,
        params=dict(zip(model.param_names, (float(v) for v in params))),
        sigmas=dict(zip(model.param_names, (float(s) for s in sigmas))),
        residual=math.sqrt(ssr),
        converged=converged,
        iterations=iterations,
    )


def _covariance(jac_w: np.ndarray, ssr: float, n: int, p: int, sigma_given: bool) -> np.ndarray:
    jtj = jac_w.T @ jac_w
    try:
        cov = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(jtj)
    if not sigma_given:
        # unit-weight variance from the residuals
        cov = cov * (ssr / max(n - p, 1))
    return cov


# ---------------------------------------------------------------------------
# built-in models


def _lorentzian_eval(x, p):
    f0, kappa, amplitude, offset = p
    half = kappa / 2.0
    d = x - f0
    return offset + amplitude * half**2 / (d**2 + half**2)


def _lorentzian_jac(x, p):
    f0, kappa, amplitude, _ = p
    half = kappa / 2.0
    d = x - f0
    denom = d**2 + half**2
    jac = np.empty((x.size, 4))
    jac[:, 0] = amplitude * half**2 * 2.0 * d / denom**2
    jac[:, 1] = amplitude * half * d**2 / denom**2
    jac[:, 2] = half**2 / denom
    jac[:, 3] = 1.0
    return jac


def _time_rabi_eval(t, p):
    amplitude, tau, t_pi, offset = p
    theta = math.pi * t / (2.0 * t_pi)
    return offset + amplitude * np.exp(-t / tau) * np.sin(theta) ** 2


def _time_rabi_jac(t, p):
    amplitude, tau, t_pi, _ = p
    theta = math.pi * t / (2.0 * t_pi)
    env = np.exp(-t / tau)
    s2 = np.sin(theta) ** 2
    jac = np.empty((t.size, 4))
    jac[:, 0] = env * s2
    jac[:, 1] = amplitude * env * s2 * t / tau**2
    jac[:, 2] = -amplitude * env * np.sin(2.0 * theta) * math.pi * t / (2.0 * t_pi**2)
    jac[:, 3] = 1.0
    return jac


def _power_rabi_eval(v, p):
    amplitude, v_pi, offset = p
    theta = math.pi * v / (2.0 * v_pi)
    return offset + amplitude * np.sin(theta) ** 2


def _power_rabi_jac(v, p):
    amplitude, v_pi, _ = p
    theta = math.pi * v / (2.0 * v_pi)
    jac = np.empty((v.size, 3))
    jac[:, 0] = np.sin(theta) ** 2
    jac[:, 1] = -amplitude * np.sin(2.0 * theta) * math.pi * v / (2.0 * v_pi**2)
    jac[:, 2] = 1.0
    return jac


def _t1_eval(t, p):
    amplitude, t1, offset = p
    return offset + amplitude * np.exp(-t / t1)


def _t1_jac(t, p):
    amplitude, t1, _ = p
    env = np.exp(-t / t1)
    jac = np.empty((t.size, 3))
    jac[:, 0] = env
    jac[:, 1] = amplitude * env * t / t1**2
    jac[:, 2] = 1.0
    return jac


def _ramsey_eval(t, p):
    amplitude, t2, freq, phase, offset = p
    return offset + amplitude * np.exp(-t / t2) * np.cos(2.0 * math.pi * freq * t + phase)


def _ramsey_jac(t, p):
    amplitude, t2, freq, phase, _ = p
    env = np.exp(-t / t2)
    arg = 2.0 * math.pi * freq * t + phase
    c, s = np.cos(arg), np.sin(arg)
    jac = np.empty((t.size, 5))
    jac[:, 0] = env * c
    jac[:, 1] = amplitude * env * c * t / t2**2
    jac[:, 2] = -amplitude * env * s * 2.0 * math.pi * t
    jac[:, 3] = -amplitude * env * s
    jac[:, 4] = 1.0
    return jac


LORENTZIAN = ModelSpec("lorentzian", ("f0", "kappa", "amplitude", "offset"), _lorentzian_eval, _lorentzian_jac)
TIME_RABI = ModelSpec("time_rabi", ("amplitude", "tau", "t_pi", "offset"), _time_rabi_eval, _time_rabi_jac)
POWER_RABI = ModelSpec("power_rabi", ("amplitude", "v_pi", "offset"), _power_rabi_eval, _power_rabi_jac)
T1 = ModelSpec("t1", ("amplitude", "t1", "offset"), _t1_eval, _t1_jac)
RAMSEY = ModelSpec("ramsey", ("amplitude", "t2_star", "freq", "phase", "offset"), _ramsey_eval, _ramsey_jac)

MODELS: dict[str, ModelSpec] = {
    m.name: m for m in (LORENTZIAN, TIME_RABI, POWER_RABI, T1, RAMSEY)
}


# ---------------------------------------------------------------------------
# initialization helpers


def dominant_frequency(x: np.ndarray, y: np.ndarray, oversample: int = 16) -> float:
    """Frequency of the strongest spectral line of linearly detrended data.

    Dense-grid discrete spectrum (>= ``oversample`` points per natural bin)
    with parabolic peak refinement.  Raises ModelError when no line stands
    out (flat or pure-decay data), which the Rabi fitters surface as their
    no-oscillation error.
    """
    span = x[-1] - x[0]
    trend = np.polyval(np.polyfit(x, y, 1), x)
    resid = y - trend
    f_lo = 0.25 / span
    f_hi = 0.5 * (x.size - 1) / span
    grid = np.linspace(f_lo, f_hi, oversample * x.size)
    power = np.abs(np.exp(-2j * math.pi * np.outer(grid, x)) @ resid) ** 2
    k = int(np.argmax(power))
    if k == 0 or k == grid.size - 1:
        raise ModelError("no oscillatory component detected (spectral peak at the grid edge)")
    if power[k] < 4.0 * float(np.mean(power)):
        raise ModelError("no oscillatory component detected")
    p0, p1, p2 = power[k - 1], power[k], power[k + 1]
    denom = p0 - 2.0 * p1 + p2
    shift = 0.5 * (p0 - p2) / denom if denom != 0.0 else 0.0
    return float(grid[k] + shift * (grid[1] - grid[0]))


def _edge_baseline(y: np.ndarray) -> float:
    edge = max(2, y.size // 10)
    return float(np.median(np.concatenate([y[:edge], y[-edge:]])))


def _half_crossing(x, y, peak_idx: int, level: float, direction: int) -> float | None:
    above = y[peak_idx] > level
    i = peak_idx
    while 0 <= i + direction < y.size:
        j = i + direction
        if (y[j] > level) != above:
            frac = (level - y[i]) / (y[j] - y[i])
            return float(x[i] + frac * (x[j] - x[i]))
        i = j
    return None


# ---------------------------------------------------------------------------
# model-specific fitters


def fit_lorentzian(data: Dataset) -> FitResult:
    """Center, linewidth, amplitude, offset of a spectroscopy peak or dip.

    Initialization: edge-median baseline, extremum location, half-maximum
    crossings for the width.  Monotone or flat data has no interior
    extremum and is rejected.
    """
    x, y = data.x, data.y
    baseline = _edge_baseline(y)
    i_max, i_min = int(np.argmax(y)), int(np.argmin(y))
    up, down = y[i_max] - baseline, baseline - y[i_min]
    peak_idx, amp0 = (i_max, up) if up >= down else (i_min, -down)
    if peak_idx in (0, x.size - 1) or amp0 == 0.0:
        raise ModelError("no interior peak or dip; cannot fit a resonance line")
    level = baseline + amp0 / 2.0
    left = _half_crossing(x, y, peak_idx, level, -1)
    right = _half_crossing(x, y, peak_idx, level, +1)
    if left is not None and right is not None:
        kappa0 = right - left
    elif left is not None or right is not None:
        present = left if left is not None else right
        kappa0 = 2.0 * abs(present - x[peak_idx])
    else:
        kappa0 = (x[-1] - x[0]) / 6.0
    result = least_squares(LORENTZIAN, data, [x[peak_idx], kappa0, amp0, baseline])
    params = dict(result.params)
    params["kappa"] = abs(params["kappa"])
    if (x[-1] - x[0]) < 3.0 * params["kappa"]:
        warnings.warn("data span is below three linewidths; width estimate is weakly constrained", stacklevel=2)
    return FitResult(result.model, params, result.sigmas, result.residual, result.converged, result.iterations)


def fit_time_rabi(data: Dataset) -> FitResult:
    """Amplitude, decay, pi time, offset of a decaying Rabi oscillation."""
    x, y = data.x, data.y
    f_osc = dominant_frequency(x, y)
    t_pi0 = 1.0 / (2.0 * f_osc)
    span = x[-1] - x[0]
    if span < 2.0 / f_osc:
        warnings.warn("fewer than two oscillation periods covered; period estimate is weakly constrained", stacklevel=2)
    offset0 = float(np.percentile(y, 10))
    amp0 = float(np.percentile(y, 90)) - offset0
    tau0 = _envelope_decay_guess(x, y)
    return least_squares(TIME_RABI, data, [amp0, tau0, t_pi0, offset0])


def _envelope_decay_guess(x: np.ndarray, y: np.ndarray) -> float:
    """Decay guess from the oscillation amplitude of the first vs last third."""
    third = max(x.size // 3, 2)
    early = float(np.ptp(y[:third]))
    late = float(np.ptp(y[-third:]))
    span = x[-1] - x[0]
    if late > 0.0 and early > late:
        dt = float(np.mean(x[-third:]) - np.mean(x[:third]))
        guess = dt / math.log(early / late)
        return min(max(guess, span / 20.0), 10.0 * span)
    return span


def fit_power_rabi(data: Dataset) -> FitResult:
    """Amplitude, pi-pulse voltage, offset of a power-Rabi fringe.

    A window that sits many periods away from zero volts leaves an n-fold
    ambiguity: phase slips of the sin^2 comb produce near-degenerate local
    minima spaced ~2 V_pi^2 / V_center apart.  The fit multi-starts across
    that comb and reports the smallest positive V_pi among the best fits.
    """
    x, y = data.x, data.y
    f_v = dominant_frequency(x, y)
    v_pi0 = 1.0 / (2.0 * f_v)
    offset0 = float(np.percentile(y, 10))
    amp0 = float(np.percentile(y, 90)) - offset0

    v_center = float(np.median(np.abs(x)))
    candidates = [v_pi0]
    notes: tuple[str, ...] = ()
    if v_center > 2.0 * v_pi0:
        tooth = 2.0 * v_pi0**2 / v_center
        candidates = [v_pi0 + k * tooth for k in range(-3, 4) if v_pi0 + k * tooth > 0.0]
        notes = (
            "window excludes zero volts: v_pi has an n-fold phase ambiguity; "
            "smallest positive value consistent with the data is reported",
        )

    fits = []
    for v_pi_try in candidates:
        result = least_squares(POWER_RABI, data, [amp0, v_pi_try, offset0])
        if result.params["v_pi"] > 0.0:
            fits.append(result)
    if not fits:
        raise ModelError("no positive pi-pulse amplitude found")
    best_residual = min(f.residual for f in fits)
    near_best = [f for f in fits if f.residual <= best_residual * (1.0 + 1e-9)]
    result = min(near_best, key=lambda f: f.params["v_pi"])
    if (x[-1] - x[0]) < result.params["v_pi"]:
        warnings.warn("voltage span is below one half period; v_pi is weakly constrained", stacklevel=2)
    return FitResult(
        result.model, result.params, result.sigmas, result.residual,
        result.converged, result.iterations, notes,
    )


def fit_decay(data: Dataset, kind: str) -> FitResult:
    """Exponential decay ("t1") or decaying fringe ("ramsey") parameters.

    A fitted decay constant that is not positive, or a vanishing amplitude
    (nothing decays), is flagged non-physical in the notes with
    converged=False.
    """
    x, y = data.x, data.y
    if kind == "t1":
        offset0 = float(y[-1])
        amp0 = float(y[0]) - offset0
        t0 = _log_linear_decay_guess(x, y, offset0, amp0)
        result = least_squares(T1, data, [amp0, t0, offset0])
        constant_name = "t1"
    elif kind == "ramsey":
        freq0 = dominant_frequency(x, y)
        offset0 = float(np.mean(y))
        amp0 = float(np.ptp(y)) / 2.0
        centered = y - offset0
        c = float(centered @ np.cos(2.0 * math.pi * freq0 * x))
        s = float(centered @ np.sin(2.0 * math.pi * freq0 * x))
        phase0 = math.atan2(-s, c)
        t0 = _envelope_decay_guess(x, y)
        result = least_squares(RAMSEY, data, [amp0, t0, freq0, phase0, offset0])
        constant_name = "t2_star"
    else:
        raise ValueError(f"unknown decay kind {kind!r}; expected 't1' or 'ramsey'")

    constant = result.params[constant_name]
    scale = max(float(np.ptp(y)), abs(result.params["offset"]), 1e-300)
    notes = result.notes
    converged = result.converged
    if constant <= 0.0:
        notes = notes + (f"non-physical: fitted {constant_name} is not positive",)
        converged = False
    elif abs(result.params["amplitude"]) < 1e-9 * scale:
        notes = notes + ("non-physical: no decaying component detected",)
        converged = False
    if (x[-1] - x[0]) < 2.0 * abs(constant):
        warnings.warn("data span is below two decay constants; estimate is weakly constrained", stacklevel=2)
    return FitResult(
        result.model, result.params, result.sigmas, result.residual,
        converged, result.iterations, notes,
    )


def _log_linear_decay_guess(x, y, offset0: float, amp0: float) -> float:
    span = x[-1] - x[0]
    if amp0 == 0.0:
        return span / 3.0
    z = (y - offset0) / amp0
    mask = z > 1e-3
    if int(np.count_nonzero(mask)) < 3:
        return span / 3.0
    slope = np.polyfit(x[mask], np.log(z[mask]), 1)[0]
    if slope >= 0.0:
        return span / 3.0
    return float(min(max(-1.0 / slope, span / 50.0), 50.0 * span))


# CLI fit commands dispatch through this table.
FITTERS: dict[str, Callable[[Dataset], FitResult]] = {
    "lorentzian": fit_lorentzian,
    "time_rabi": fit_time_rabi,
    "power_rabi": fit_power_rabi,
    "t1": lambda data: fit_decay(data, "t1"),
    "ramsey": lambda data: fit_decay(data, "ramsey"),
}
