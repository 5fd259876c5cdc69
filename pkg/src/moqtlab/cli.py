"""Command line front end.

Six subcommands cover the routine workflows: ``transduce`` (efficiency and
bandwidth versus pump power), ``chevron`` (detuned Rabi map), ``fit``
(measurement traces to parameters), ``budget`` (entanglement scenarios),
``vernier`` (ring-pair spectrum scan and bias candidates), and ``g0``
(electro-optic coupling chain, optionally solving a geometry parameter).

Outputs are deterministic: repeated runs with identical inputs produce
byte-identical files.  Exit codes: 0 on success (a fit that fails to
converge still reports and exits 0), 1 for model or value errors, 2 for
configuration or input-format errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from .config import load_config
from .eo_coupling import coupling_chain, solve_geometry_parameter
from .errors import ConfigError, DatasetFormatError, ModelError
from .fitting import FITTERS, Dataset
from .network_budget import evaluate_scenario, load_scenario
from .qubit_dynamics import chevron_map
from .serialize import csv_text, json_text, write_text
from .transduction import efficiency_sweep, sweep_point
from .units import C_VACUUM
from .vernier import (
    RingComb,
    find_triple_resonance,
    required_bias,
    scan_period,
    spectrum_scan,
    vernier_period,
    vernier_period_wavelength,
)

_BUNDLED_SCENARIOS = ("current", "low_loss_chip", "tapered_fiber")


def _add_global_options(parser: argparse.ArgumentParser, trailing: bool) -> None:
    # trailing copies use SUPPRESS so a flag after the subcommand overrides
    # one before it instead of resetting it to the default
    hide = argparse.SUPPRESS
    parser.add_argument("--config", default=hide if trailing else None, metavar="PATH",
                        help="config JSON; falls back to $MOQT_LAB_CONFIG, then the bundled default")
    parser.add_argument("--output-dir", default=hide if trailing else ".", metavar="DIR",
                        help="directory for output artifacts (default: current directory)")
    parser.add_argument("--seed", type=int, default=hide if trailing else None,
                        help="seed for stochastic operations; every bundled command is deterministic")
    parser.add_argument("--quiet", action="store_true", default=hide if trailing else False,
                        help="suppress 'wrote <path>' progress lines")
    parser.add_argument("--set", dest="overrides", action="append", metavar="SECTION.KEY=VALUE",
                        default=hide if trailing else [],
                        help="override one config value (repeatable)")


def _parse_axis(text: str, name: str) -> list[float]:
    """Either 'start:stop:count' (inclusive, linear) or a comma list."""
    try:
        if ":" in text:
            start_s, stop_s, count_s = text.split(":")
            count = int(count_s)
            if count < 1:
                raise ValueError
            return [float(v) for v in np.linspace(float(start_s), float(stop_s), count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse {name} {text!r}; expected start:stop:count or v1,v2,...") from None


def _emit(args, name: str, text: str) -> Path:
    path = Path(args.output_dir) / name
    write_text(path, text)
    if not args.quiet:
        print(f"wrote {path}")
    return path


def _load(args):
    return load_config(args.config, args.overrides)


def _cmd_transduce(args) -> int:
    cfg = _load(args)
    state = cfg.transducer_state()
    powers = _parse_axis(args.power_sweep, "--power-sweep") if args.power_sweep else \
        [float(v) for v in np.linspace(0.0, 60e-6, 25)]
    duties = [float(v) for v in args.duty.split(",")] if args.duty else [cfg.pump.duty]
    schedules = []
    for duty in duties:
        if not 0.0 < duty <= 1.0:
            raise ConfigError(f"duty cycle must lie in (0, 1], got {duty}")
        if duty == 1.0:
            schedules.append(None)
        elif cfg.pump.cw:
            raise ConfigError("a duty below 1 needs a pulsed pump; set pump.pulse_width_s")
        else:
            schedules.append((cfg.pump.pulse_width_s, duty / cfg.pump.pulse_width_s))
    rows = efficiency_sweep(state, powers, schedules,
                            cfg.heating.beta_loss_hz_per_w, cfg.heating.beta_shift_hz_per_w)
    header = ["p_peak_w", "duty", "p_avg_w", "n_pump", "g_hz", "cooperativity", "eta_peak", "bw_3db_hz"]
    _emit(args, "transduce_sweep.csv", csv_text(
        header,
        ((r.p_peak_w, r.duty, r.p_avg_w, r.n_pump, r.g_hz, r.cooperativity, r.eta_peak, r.bw_3db_hz)
         for r in rows),
    ))
    headline = sweep_point(state, cfg.heating.beta_loss_hz_per_w, cfg.heating.beta_shift_hz_per_w)
    _emit(args, "transduce_summary.json", json_text({
        "p_peak_w": headline.p_peak_w,
        "duty": headline.duty,
        "p_avg_w": headline.p_avg_w,
        "n_pump": headline.n_pump,
        "g_hz": headline.g_hz,
        "cooperativity": headline.cooperativity,
        "eta_peak": headline.eta_peak,
        "bw_3db_hz": headline.bw_3db_hz,
        "mismatch_cold_hz": state.mismatch_hz,
        "triple_resonant_cold": state.is_triple_resonant,
    }))
    return 0


def _cmd_chevron(args) -> int:
    cfg = _load(args)
    widths = _parse_axis(args.widths, "--widths")
    detunings = _parse_axis(args.detunings, "--detunings")
    widths_arr = np.asarray(widths)
    populations = chevron_map(widths_arr, np.asarray(detunings),
                              cfg.qubit.omega_r_hz, cfg.qubit.rabi_tau_s)
    rows = []
    for i, detuning in enumerate(detunings):
        for j, width in enumerate(widths):
            rows.append((width, detuning, float(populations[i, j])))
    _emit(args, "chevron.csv", csv_text(["width_s", "detuning_hz", "population"], rows))
    return 0


def _cmd_fit(args) -> int:
    data = Dataset.from_csv(args.dataset)
    result = FITTERS[args.model](data)
    text = json_text(result.to_json_dict())
    sys.stdout.write(text)
    _emit(args, "fit_result.json", text)
    return 0


def _cmd_budget(args) -> int:
    if args.scenarios:
        paths = [Path(p) for p in args.scenarios]
        results = [evaluate_scenario(load_scenario(p)) for p in paths]
    else:
        results = []
        for name in _BUNDLED_SCENARIOS:
            bundle = resources.files("moqtlab").joinpath(f"data/scenarios/{name}.json")
            with resources.as_file(bundle) as path:
                results.append(evaluate_scenario(load_scenario(path)))
    header = ["scenario", "n_pump", "p_pair", "r_ent_hz", "fidelity", "fidelity_clamped"]
    _emit(args, "budget.csv", csv_text(
        header,
        ((r.scenario.name, r.n_pump, r.p_pair, r.r_ent_hz, r.fidelity, r.fidelity_clamped)
         for r in results),
    ))
    return 0


def _cmd_vernier(args) -> int:
    cfg = _load(args)
    rings = cfg.vernier
    expected = vernier_period(rings.fsr_a_hz, rings.fsr_b_hz)
    if args.window:
        try:
            lo_s, hi_s = args.window.split(":")
            lo, hi = float(lo_s), float(hi_s)
        except ValueError:
            raise ConfigError(f"cannot parse --window {args.window!r}; expected lo:hi in Hz") from None
    else:
        lo, hi = rings.anchor_a_hz, rings.anchor_a_hz + 3.2 * expected
    comb_a = RingComb.spanning(rings.anchor_a_hz, rings.fsr_a_hz, lo, hi)
    comb_b = RingComb.spanning(rings.anchor_b_hz, rings.fsr_b_hz, lo, hi)
    pairs = spectrum_scan(comb_a, comb_b, rings.mu_hz, lo, hi)
    f_m = cfg.microwave.f_hz
    _emit(args, "vernier_scan.csv", csv_text(
        ["omega_minus_hz", "omega_plus_hz", "splitting_hz", "vdc_required_v"],
        ((p.omega_minus_hz, p.omega_plus_hz, p.splitting_hz,
          required_bias(p, f_m, rings.tune_rate_hz_per_v)) for p in pairs),
    ))
    measured = scan_period(pairs)
    candidates = find_triple_resonance(pairs, f_m, rings.tune_rate_hz_per_v, rings.v_max_v)
    _emit(args, "vernier_report.json", json_text({
        "expected_period_hz": expected,
        "measured_period_hz": measured,
        "period_ratio": measured / expected,
        "expected_period_wavelength_m": vernier_period_wavelength(
            rings.fsr_a_hz, rings.fsr_b_hz, C_VACUUM / rings.anchor_a_hz),
        "candidates": [
            {"omega_minus_hz": p.omega_minus_hz, "omega_plus_hz": p.omega_plus_hz,
             "splitting_hz": p.splitting_hz, "v_dc_v": v_dc}
            for p, v_dc in candidates[:5]
        ],
    }))
    return 0


def _cmd_g0(args) -> int:
    cfg = _load(args)
    geometry = cfg.geometry
    f_m = cfg.microwave.f_hz
    solved = None
    if args.solve_for is not None:
        if args.target_g0 is None:
            raise ConfigError("--solve-for needs --target-g0")
        value = solve_geometry_parameter(geometry, args.solve_for, args.target_g0, f_m)
        geometry = replace(geometry, **{args.solve_for: value})
        solved = {"parameter": args.solve_for, "value": value, "target_g0_hz": args.target_g0}
    elif args.target_g0 is not None:
        raise ConfigError("--target-g0 needs --solve-for")
    susceptibility, v_zpf, g_eo = coupling_chain(geometry, f_m)
    payload = {
        "susceptibility_hz_per_v": susceptibility,
        "v_zpf_v": v_zpf,
        "g_eo_hz": g_eo,
        "f_m_hz": f_m,
    }
    if solved is not None:
        payload["solved"] = solved
    _emit(args, "g0.json", json_text(payload))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moqtlab",
        description="Microwave-optical transducer modeling toolkit.",
    )
    _add_global_options(parser, trailing=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("transduce", help="efficiency and bandwidth versus pump power")
    p.add_argument("--power-sweep", metavar="AXIS",
                   help="peak powers in W, start:stop:count or comma list (default 0:6e-5:25)")
    p.add_argument("--duty", metavar="D1,D2,...",
                   help="duty cycles to sweep (default: the configured pump duty)")
    _add_global_options(p, trailing=True)
    p.set_defaults(func=_cmd_transduce)

    p = sub.add_parser("chevron", help="Rabi population map over pulse width and detuning")
    p.add_argument("--widths", default="0:2e-6:201", metavar="AXIS", help="pulse widths in s")
    p.add_argument("--detunings", default="0,1e6,2e6,4e6", metavar="AXIS", help="drive detunings in Hz")
    _add_global_options(p, trailing=True)
    p.set_defaults(func=_cmd_chevron)

    p = sub.add_parser("fit", help="fit a measurement trace")
    p.add_argument("model", choices=sorted(FITTERS))
    p.add_argument("dataset", help="CSV with header x,y or x,y,sigma; '#' lines are comments")
    _add_global_options(p, trailing=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("budget", help="entanglement rate and fidelity budgets")
    p.add_argument("scenarios", nargs="*", metavar="SCENARIO.json",
                   help="scenario files (default: the bundled scenarios)")
    _add_global_options(p, trailing=True)
    p.set_defaults(func=_cmd_budget)

    p = sub.add_parser("vernier", help="ring-pair spectrum scan and bias candidates")
    p.add_argument("--window", metavar="LO:HI", help="optical scan window in Hz")
    _add_global_options(p, trailing=True)
    p.set_defaults(func=_cmd_vernier)

    p = sub.add_parser("g0", help="electro-optic coupling chain; optionally solve a parameter")
    p.add_argument("--solve-for", metavar="PARAM",
                   help="geometry parameter to solve for (e.g. capacitance_f)")
    p.add_argument("--target-g0", type=float, metavar="HZ", help="wanted single-photon coupling")
    _add_global_options(p, trailing=True)
    p.set_defaults(func=_cmd_g0)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except (ConfigError, DatasetFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
