"""Seeded synthetic traces for the fitters and the bundled example datasets.

Each generator draws Gaussian noise from a fixed default seed, so the
bundled CSVs under ``data/datasets/`` are exactly reproducible with

    python -m moqtlab.synthetic --output-dir src/moqtlab/data/datasets

The truth parameters live here, in the generated file headers, and nowhere
else.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from .fitting import LORENTZIAN, POWER_RABI, RAMSEY, T1, TIME_RABI, Dataset


def lorentzian_trace(
    f0_hz: float = 3.703e9,
    kappa_hz: float = 645e3,
    amplitude: float = -0.82,
    offset: float = 0.94,
    n: int = 241,
    span_linewidths: float = 8.0,
    noise: float = 0.016,
    seed: int = 7342,
) -> tuple[Dataset, dict]:
    x = np.linspace(f0_hz - span_linewidths * kappa_hz / 2.0, f0_hz + span_linewidths * kappa_hz / 2.0, n)
    truth = {"f0": f0_hz, "kappa": kappa_hz, "amplitude": amplitude, "offset": offset}
    return _noisy(LORENTZIAN, x, truth, noise, seed)


def time_rabi_trace(
    rabi_rate_hz: float = 2.27e6,
    tau_s: float = 800e-9,
    amplitude: float = 0.93,
    offset: float = 0.015,
    n: int = 201,
    span_s: float = 2.0e-6,
    noise: float = 0.01,
    seed: int = 1123,
) -> tuple[Dataset, dict]:
    x = np.linspace(0.0, span_s, n)
    truth = {"amplitude": amplitude, "tau": tau_s, "t_pi": 1.0 / (2.0 * rabi_rate_hz), "offset": offset}
    return _noisy(TIME_RABI, x, truth, noise, seed)


def power_rabi_trace(
    v_pi_v: float = 20.28e-9,
    v_lo_v: float = 856e-9,
    v_hi_v: float = 958e-9,
    amplitude: float = 0.9,
    offset: float = 0.04,
    n: int = 103,
    noise: float = 0.005,
    seed: int = 4177,
) -> tuple[Dataset, dict]:
    x = np.linspace(v_lo_v, v_hi_v, n)
    truth = {"amplitude": amplitude, "v_pi": v_pi_v, "offset": offset}
    return _noisy(POWER_RABI, x, truth, noise, seed)


def t1_trace(
    t1_s: float = 8e-6,
    amplitude: float = 0.95,
    offset: float = 0.02,
    n: int = 161,
    span_s: float = 40e-6,
    noise: float = 0.01,
    seed: int = 905,
) -> tuple[Dataset, dict]:
    x = np.linspace(0.0, span_s, n)
    truth = {"amplitude": amplitude, "t1": t1_s, "offset": offset}
    return _noisy(T1, x, truth, noise, seed)


def ramsey_trace(
    t2_star_s: float = 800e-9,
    fringe_hz: float = 2.5e6,
    phase_rad: float = 0.3,
    amplitude: float = 0.45,
    offset: float = 0.5,
    n: int = 241,
    span_s: float = 2.4e-6,
    noise: float = 0.01,
    seed: int = 2027,
) -> tuple[Dataset, dict]:
    x = np.linspace(0.0, span_s, n)
    truth = {
        "amplitude": amplitude, "t2_star": t2_star_s, "freq": fringe_hz,
        "phase": phase_rad, "offset": offset,
    }
    return _noisy(RAMSEY, x, truth, noise, seed)


def _noisy(model, x: np.ndarray, truth: dict, noise: float, seed: int) -> tuple[Dataset, dict]:
    params = np.array([truth[name] for name in model.param_names])
    rng = np.random.default_rng(seed)
    y = model.evaluate(x, params) + rng.normal(0.0, noise, x.size)
    sigma = np.full(x.size, noise)
    truth = dict(truth)
    truth["noise"] = noise
    truth["seed"] = seed
    return Dataset(x=x, y=y, sigma=sigma), truth


GENERATORS = {
    "qubit_spectroscopy": lorentzian_trace,
    "time_rabi": time_rabi_trace,
    "power_rabi": power_rabi_trace,
    "t1": t1_trace,
    "ramsey": ramsey_trace,
}

_MODEL_OF = {
    "qubit_spectroscopy": "lorentzian",
    "time_rabi": "time_rabi",
    "power_rabi": "power_rabi",
    "t1": "t1",
    "ramsey": "ramsey",
}


def write_datasets(output_dir, seed: int | None = None) -> list[Path]:
    """Write every bundled dataset CSV into output_dir; returns the paths."""
    from .serialize import format_float, write_text

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, generator in GENERATORS.items():
        data, truth = generator(**({"seed": seed} if seed is not None else {}))
        lines = [
            f"# synthetic {name} trace (model: {_MODEL_OF[name]})",
            "# truth: " + ", ".join(f"{k}={format_float(v)}" for k, v in truth.items()),
            "# regenerate: python -m moqtlab.synthetic",
            "x,y,sigma",
        ]
        for xi, yi, si in zip(data.x, data.y, data.sigma):
            lines.append(f"{format_float(xi)},{format_float(yi)},{format_float(si)}")
        path = out / f"{name}.csv"
        write_text(path, "\n".join(lines) + "\n")
        written.append(path)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m moqtlab.synthetic", description=__doc__)
    parser.add_argument("--output-dir", default="src/moqtlab/data/datasets")
    parser.add_argument("--seed", type=int, default=None, help="override every generator's default seed")
    args = parser.parse_args(argv)
    for path in write_datasets(args.output_dir, seed=args.seed):
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
