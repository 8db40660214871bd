"""Writers for scenario results and the full set of figure data files."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from . import harness, isolation, keyrate, presets
from .io import write_csv
from .opl import Direction
from .pulse import ANCHOR_AVERAGES_W, ANCHOR_WIDTH_S, PulseTrain

CYCLE_HEADER = harness.CycleRecord.FIELDS
SERIES_HEADER = ("t_s", "output_w", "temperature_c")
WAVEFORM_HEADER = ("t_s", "power_w")
PULSE_SUMMARY_HEADER = ("rep_rate_hz", "width_s", "peak_in_w", "average_w",
                        "peak_out_w", "cw_equivalent_w", "ratio")
CURVE_HEADER = ("distance_km", "rate", "label", "g")

BB84_DISTANCES_KM = np.arange(0.0, 151.0, 1.0)
MDI_DISTANCES_KM = np.arange(0.0, 252.0, 2.0)


def scenario_filename(kind: harness.ScenarioKind, length_mm: float, suffix: str = "") -> str:
    return f"{kind.value}-{length_mm:g}mm{suffix}.csv"


def write_cycle(path, records) -> Path:
    return write_csv(path, CYCLE_HEADER, (r.row() for r in records))


def write_series(path, series: harness.TimeSeries) -> Path:
    rows = zip(series.t_s.tolist(), series.output_W.tolist(), series.temperature_C.tolist())
    return write_csv(path, SERIES_HEADER, rows)


def write_waveform(path, series: harness.TimeSeries) -> Path:
    return write_csv(path, WAVEFORM_HEADER, zip(series.t_s.tolist(), series.output_W.tolist()))


def write_pulse_summary(path, trains, responses) -> Path:
    rows = ((t.rep_rate_Hz, t.width_s, t.peak_W, t.average_W, r.peak_out_W,
             r.cw_equivalent_out_W, r.ratio) for t, r in zip(trains, responses))
    return write_csv(path, PULSE_SUMMARY_HEADER, rows)


def write_curves(path, curves) -> Path:
    rows = [row for curve in curves for row in curve.rows()]
    return write_csv(path, CURVE_HEADER, rows)


def bb84_figure_curves(params=None, distances=BB84_DISTANCES_KM, gs=keyrate.ATTACK_PRESETS):
    params = params or keyrate.Bb84Params()
    out = []
    for i, g in enumerate(gs):
        curves = keyrate.bb84_curves(params, distances, g)
        if i == 0:
            out.append(curves[keyrate.Label.NO_ATTACK])
        out += [curves[keyrate.Label.R_I], curves[keyrate.Label.R_C]]
    return out


def mdi_figure_curves(params=None, distances=MDI_DISTANCES_KM, gs=keyrate.ATTACK_PRESETS):
    params = params or keyrate.MdiParams()
    out = []
    for i, g in enumerate(gs):
        curves = keyrate.mdi_curves(params, distances, g)
        if i == 0:
            out.append(curves[keyrate.Label.NO_ATTACK])
        out += [curves[keyrate.Label.R_I], curves[keyrate.Label.R_C]]
    return out


def _calibration_rows(direction):
    grid = np.round(np.arange(0.0, 0.2001, 0.002), 6)
    for spec in presets.calibration_builds():
        out = spec.model(direction)(grid)
        yield from ((spec.length_mm, float(x), float(y)) for x, y in zip(grid, out))


def _slow_pulse_rows():
    for peak in (0.2, 0.4):
        train = PulseTrain(0.5, 1.0, peak)
        for spec in presets.calibration_builds():
            res = harness.run_pulse_injection(spec, harness.PulseInjection([train]))
            series, resp = res.series[0], res.responses[0]
            for t, p in zip(series.t_s.tolist(), series.output_W.tolist()):
                yield peak, spec.length_mm, t, p, resp.cw_equivalent_out_W


def _fast_pulse_rows(rate):
    for spec in presets.pulse_builds():
        trains = [PulseTrain.from_average(rate, ANCHOR_WIDTH_S[rate], a) for a in ANCHOR_AVERAGES_W]
        res = harness.run_pulse_injection(spec, harness.PulseInjection(trains, waveform_periods=0))
        for t, r in zip(trains, res.responses):
            yield spec.length_mm, t.average_W, t.peak_W, r.peak_out_W, r.cw_equivalent_out_W, r.ratio


def reproduce_paper(output_dir) -> list[Path]:
    """Write every figure data file and the isolation table into ``output_dir``."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    cal_header = ("length_mm", "input_w", "output_w")
    written.append(write_csv(out / "fig2.csv", cal_header, _calibration_rows(Direction.FORWARD)))
    written.append(write_csv(out / "fig3.csv", cal_header, _calibration_rows(Direction.BACKWARD)))
    written.append(write_series(out / "fig4.csv", harness.run_long_exposure(presets.get_preset("101.6mm"))))
    for group in presets.GROUPS:
        rows = []
        for length in presets.LENGTHS_MM:
            spec = presets.get_preset(f"{length:g}mm-{group}")
            rows += [(length,) + r.row() for r in harness.run_cw_cycle(spec)]
        written.append(write_csv(out / f"fig5-{group}.csv", ("length_mm",) + CYCLE_HEADER, rows))
    written.append(write_csv(out / "fig6.csv", ("peak_in_w", "length_mm", "t_s", "output_w", "cw_line_w"),
                             _slow_pulse_rows()))
    written.append(write_curves(out / "fig7.csv", bb84_figure_curves()))
    written.append(write_curves(out / "fig8.csv", mdi_figure_curves()))
    pulse_header = ("length_mm", "average_w", "peak_in_w", "peak_out_w", "cw_equivalent_w", "ratio")
    written.append(write_csv(out / "pulse40.csv", pulse_header, _fast_pulse_rows(40e6)))
    written.append(write_csv(out / "pulse1g.csv", pulse_header, _fast_pulse_rows(1e9)))
    table = out / "table1.txt"
    table.write_text(isolation.table1(paper_rounding=True))
    written.append(table)
    return written


REPRODUCE_FILES = ("fig2.csv", "fig3.csv", "fig4.csv", "fig5-a.csv", "fig5-b.csv", "fig5-c.csv",
                   "fig6.csv", "fig7.csv", "fig8.csv", "pulse40.csv", "pulse1g.csv", "table1.txt")
