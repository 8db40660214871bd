"""``limiter-lab`` command line.

Exit status is 0 on success, 1 for invalid input (bad flags, config, data)
and 2 when a file cannot be read or written. ``LIMITER_LAB_OUTPUT_DIR``
replaces the default output directory; an explicit ``--output-dir`` or a
config ``output_dir`` still wins over it.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, harness, isolation, keyrate, presets, reproduce
from .errors import LimiterLabError, ValidationError
from .io import fmt, load_json, read_calibration_csv, save_json, write_csv
from .opl import Direction, PrismSpec, fit_calibration
from .pulse import ANCHOR_WIDTH_S, PulseTrain

OUTPUT_ENV = "LIMITER_LAB_OUTPUT_DIR"
EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

SCENARIOS = tuple(k.value for k in harness.ScenarioKind)


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _output_dir(flag, config: dict | None = None, default: str = ".") -> Path:
    if flag:
        return Path(flag)
    if config and config.get("output_dir"):
        return Path(config["output_dir"])
    return Path(os.environ.get(OUTPUT_ENV) or default)


def _load_config(path) -> dict:
    if not path:
        return {}
    data = load_json(path)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return data


# --------------------------------------------------------------------------
# calibrate


def _fit_report(tables, models) -> list[tuple]:
    rows = []
    for direction, table in tables.items():
        model = models[direction]
        for x, y in zip(table.inputs_W, table.outputs_W):
            fit = model(x)
            rows.append((direction.value, x, y, fit, y - fit))
    return rows


def cmd_calibrate(args) -> int:
    tables = read_calibration_csv(args.csv)
    models = {d: fit_calibration(t) for d, t in tables.items()}
    stem = Path(args.csv).stem
    out_dir = _output_dir(args.output_dir)
    model_path = Path(args.model_out) if args.model_out else out_dir / f"{stem}-model.json"
    data = {d.value: m.to_dict() for d, m in models.items()}
    if args.length_mm is not None:
        data["length_mm"] = args.length_mm
    save_json(model_path, data)
    report_path = model_path.with_name(model_path.stem + "-residuals.csv")
    write_csv(report_path, ("direction", "input_w", "measured_w", "fitted_w", "residual_w"),
              _fit_report(tables, models))
    for d, m in models.items():
        print(f"{d.value}: gain={fmt(m.linear_gain)} clamp={fmt(m.clamp_offset)}+{fmt(m.clamp_slope)}*P "
              f"knee={fmt(m.knee_W)} W rms={fmt(m.residual_rms_W)} max={fmt(m.residual_max_W)}")
    print(f"wrote {model_path} and {report_path}")
    return EXIT_OK


# --------------------------------------------------------------------------
# run


def _spec_from_model_file(path, length_mm) -> PrismSpec:
    data = load_json(path)
    if "length_mm" not in data:
        if length_mm is None:
            raise ValidationError(f"{path}: model has no length_mm; pass --length-mm")
        data = dict(data, length_mm=length_mm)
    missing = [d.value for d in Direction if d.value not in data]
    if missing:
        raise ValidationError(f"{path}: model lacks {', '.join(missing)} curve")
    return PrismSpec.from_dict(data)


def resolve_spec(config: dict, scenario: str) -> PrismSpec:
    """Build selected by a config: a model file, a preset name, or a length.

    A bare length picks the calibration family for c.w. scenarios and the
    pulsed-sample family for pulse injection.
    """
    length = config.get("length_mm")
    if config.get("model"):
        return _spec_from_model_file(config["model"], length)
    if config.get("preset"):
        return presets.get_preset(config["preset"])
    if length is None:
        raise ValidationError("choose a build with preset, model or length_mm")
    name = f"{float(length):g}mm"
    if scenario == harness.ScenarioKind.PULSE_INJECTION.value:
        return presets.get_preset(f"pulse-{name}")
    return presets.get_preset(f"{name}-{config.get('group', 'a')}")


def _train(entry: dict) -> PulseTrain:
    try:
        rate = float(entry["rep_rate_hz"])
        width = float(entry["width_s"])
    except KeyError as exc:
        raise ValidationError(f"pulse train needs {exc.args[0]}") from None
    wavelength = float(entry.get("wavelength_nm", 1550.0))
    if ("average_w" in entry) == ("peak_w" in entry):
        raise ValidationError("pulse train needs exactly one of average_w, peak_w")
    if "average_w" in entry:
        return PulseTrain.from_average(rate, width, float(entry["average_w"]), wavelength)
    return PulseTrain(rate, width, float(entry["peak_w"]), wavelength)


def _scenario(kind: str, params: dict, trains: list):
    try:
        if kind == "cw-cycle":
            return harness.CwCycle(**params)
        if kind == "long-exposure":
            return harness.LongExposure(**params)
        if not trains:
            raise ValidationError("pulse scenario needs at least one train")
        return harness.PulseInjection(trains=[_train(t) for t in trains], **params)
    except TypeError as exc:
        raise ValidationError(f"bad {kind} parameter: {exc}") from None


def _merged_run_config(args) -> dict:
    config = _load_config(args.config)
    for key in ("scenario", "preset", "model", "length_mm", "group", "output_dir"):
        value = getattr(args, key)
        if value is not None:
            config[key] = value
    if args.preset and not args.model:
        config.pop("model", None)
    params = dict(config.get("params", {}))
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"--set expects key=value, got {item!r}")
        params[key.strip()] = float(value)
    config["params"] = params
    trains = list(config.get("trains", []))
    if args.train:
        trains = [dict(zip(("rep_rate_hz", "width_s", "average_w"), t)) for t in args.train]
    config["trains"] = trains
    return config


def cmd_run(args) -> int:
    config = _merged_run_config(args)
    kind = config.get("scenario")
    if kind not in SCENARIOS:
        raise UsageError(f"unknown scenario {kind!r}; choose from {', '.join(SCENARIOS)}")
    spec = resolve_spec(config, kind)
    scenario = _scenario(kind, config["params"], config["trains"])
    out_dir = _output_dir(None, config)
    target = out_dir / reproduce.scenario_filename(scenario.kind, spec.length_mm)
    if kind == "cw-cycle":
        records = harness.run_cw_cycle(spec, scenario)
        reproduce.write_cycle(target, records)
        final = records[-1]
        print(f"{len(records)} rounds; final {fmt(final.eve_strong_in_W)} W -> "
              f"{fmt(final.eve_strong_out_W)} W, regime {final.regime_after.name}")
    elif kind == "long-exposure":
        series = harness.run_long_exposure(spec, scenario)
        reproduce.write_series(target, series)
        if len(series):
            print(f"{len(series)} samples; output at {fmt(series.t_s[-1])} s = {fmt(series.output_W[-1])} W")
    else:
        result = harness.run_pulse_injection(spec, scenario)
        reproduce.write_pulse_summary(target, scenario.trains, result.responses)
        for i, (train, resp, series) in enumerate(zip(scenario.trains, result.responses, result.series)):
            reproduce.write_waveform(out_dir / reproduce.scenario_filename(
                scenario.kind, spec.length_mm, f"-train{i}"), series)
            print(f"train {i}: {fmt(train.rep_rate_Hz)} Hz avg {fmt(train.average_W)} W -> "
                  f"peak {fmt(resp.peak_out_W)} W (ratio {fmt(resp.ratio)})")
    print(f"wrote {target}")
    return EXIT_OK


# --------------------------------------------------------------------------
# keyrate


def cmd_keyrate(args) -> int:
    config = _load_config(args.config)
    protocol = args.protocol or config.get("protocol", "bb84")
    gs = args.g or config.get("g") or list(keyrate.ATTACK_PRESETS)
    overrides = dict(config.get("params", {}))
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"--set expects key=value, got {item!r}")
        overrides[key.strip()] = value
    max_km = args.max_distance if args.max_distance is not None else config.get("max_distance_km")
    step = args.step if args.step is not None else config.get("step_km")
    if protocol == "bb84":
        params = keyrate.with_overrides(keyrate.Bb84Params(), overrides)
        default = reproduce.BB84_DISTANCES_KM
        build = reproduce.bb84_figure_curves
    elif protocol == "mdi":
        params = keyrate.with_overrides(keyrate.MdiParams(), overrides)
        default = reproduce.MDI_DISTANCES_KM
        build = reproduce.mdi_figure_curves
    else:
        raise UsageError(f"unknown protocol {protocol!r}; choose bb84 or mdi")
    max_km = float(default[-1]) if max_km is None else float(max_km)
    step = float(default[1] - default[0]) if step is None else float(step)
    if not step > 0 or max_km < 0:
        raise ValidationError("need step > 0 and max distance >= 0")
    distances = np.arange(0.0, max_km + step / 2, step)
    curves = build(params, distances, [float(g) for g in gs])
    target = _output_dir(args.output_dir, config) / f"keyrate-{protocol}.csv"
    reproduce.write_curves(target, curves)
    for curve in curves:
        positive = curve.distances_km[curve.rates > 0]
        reach = f"{fmt(positive[-1])} km" if positive.size else "none"
        print(f"{curve.label.value:9s} g={fmt(curve.g):5s} reach {reach}")
    print(f"wrote {target}")
    return EXIT_OK


# --------------------------------------------------------------------------
# budget


def cmd_budget(args) -> int:
    config = _load_config(args.config)
    rate = float(args.rate if args.rate is not None else config.get("clock_rate_hz", 1e9))
    rounding = args.paper_rounding or bool(config.get("paper_rounding", False))
    target_mu = float(config.get("mu_out_target", isolation.MU_OUT_TARGET))
    if args.chi is not None or "chi_photons" in config:
        chi = args.chi if args.chi is not None else config["chi_photons"]
        budget = isolation.LeakageBudget(rate, float(chi), target_mu)
    else:
        peak = args.peak if args.peak is not None else config.get("peak_w")
        peak = isolation.WORST_CASE_PEAK_W.get(rate) if peak is None else float(peak)
        if peak is None:
            raise ValidationError(f"no worst-case peak for {rate:g} Hz; pass --peak or --chi")
        width = args.width if args.width is not None else config.get("width_s")
        if width is None and rate not in ANCHOR_WIDTH_S:
            raise ValidationError(f"no reference width for {rate:g} Hz; pass --width")
        budget = isolation.LeakageBudget.from_peak(rate, peak, width, target_mu)
    gamma = isolation.required_gamma(budget, rounding)
    catalog = isolation.TABLE1_CATALOG
    if args.catalog or config.get("catalog"):
        source = args.catalog or config["catalog"]
        catalog = isolation.Catalog.from_dict(load_json(source) if isinstance(source, str) else source)
    stacks = isolation.search_stacks(catalog, gamma)
    print(f"clock {isolation.clock_label(rate)}: chi={fmt(budget.chi_photons)} "
          f"({fmt(budget.chi_db)} dB), required gamma={fmt(gamma)} dB")
    limit = args.limit if args.limit is not None else len(stacks)
    print(isolation.render_table([(rate, gamma, s) for s in stacks[:limit]]), end="")
    if not stacks:
        print("no catalog stack meets the requirement")
    return EXIT_OK


# --------------------------------------------------------------------------
# reproduce-paper


def cmd_reproduce(args) -> int:
    out_dir = _output_dir(args.output_dir, default="paper-output")
    for path in reproduce.reproduce_paper(out_dir):
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="limiter-lab", description="Optical power limiter attack simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("calibrate", help="fit steady-state curves to a calibration CSV")
    p.add_argument("csv", help="direction,input_w,output_w file")
    p.add_argument("--length-mm", type=float, help="record the prism length in the model file")
    p.add_argument("--model-out", help="model JSON path (default <output-dir>/<csv stem>-model.json)")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("run", help="replay one attack scenario")
    p.add_argument("scenario", nargs="?", help=" | ".join(SCENARIOS))
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--preset", help=f"build name ({', '.join(presets.preset_names())})")
    p.add_argument("--model", help="model JSON written by calibrate, or a full build JSON")
    p.add_argument("--length-mm", type=float)
    p.add_argument("--group", choices=presets.GROUPS, help="sample group of the calibration family")
    p.add_argument("--train", nargs=3, type=float, action="append",
                   metavar=("REP_RATE_HZ", "WIDTH_S", "AVERAGE_W"), help="pulse train (repeatable)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="scenario parameter override")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("keyrate", help="key rate versus distance under photon-number inflation")
    p.add_argument("--protocol", choices=("bb84", "mdi"))
    p.add_argument("--config")
    p.add_argument("--g", type=float, action="append", help="inflation factor (repeatable)")
    p.add_argument("--max-distance", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="protocol parameter override")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_keyrate)

    p = sub.add_parser("budget", help="required isolation and passing component stacks")
    p.add_argument("--rate", type=float, help="clock rate in Hz")
    p.add_argument("--config")
    p.add_argument("--peak", type=float, help="transmitted peak power in W")
    p.add_argument("--width", type=float, help="pulse width in s")
    p.add_argument("--chi", type=float, help="leaked photons per pulse, overriding --peak")
    p.add_argument("--paper-rounding", action="store_true", help="use the rounded leakage exponents")
    p.add_argument("--catalog", help="JSON component catalog")
    p.add_argument("--limit", type=int, help="print at most this many stacks")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("reproduce-paper", help="write every figure data file and the isolation table")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except LimiterLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
