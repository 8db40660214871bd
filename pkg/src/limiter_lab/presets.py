"""Built-in OPL builds.

Three families share the same prism lengths (25.4, 50.8 and 101.6 mm):

* ``"<L>mm"``: the calibration builds. Forward clamp values at 200 mW are
  1.2 mW, 551 uW and 114 uW; backward small-signal gains come from the 3 mW
  backward probe readings (0.13, 0.057 and 0.002 mW).
* ``"<L>mm-a|b|c"``: the three replicate groups of the c.w. cycling test.
  They reuse the calibration curves and differ only in leak multipliers and
  onset thresholds, taken from the before/after readings of each sample.
  ``"<L>mm"`` is an alias of group ``a``.
* ``"pulse-<L>mm"``: the samples used in the pulsed tests, whose c.w.
  references are higher (2.094 mW at 10 mW and 3.78 mW at 30 mW for 25.4 mm).
"""
from __future__ import annotations

from dataclasses import replace
from importlib import resources

from .errors import ValidationError
from .opl import (
    CalibrationTable,
    Direction,
    LeakMultipliers,
    LeakThresholds,
    PrismSpec,
    SteadyStateModel,
)

LENGTHS_MM = (25.4, 50.8, 101.6)

_FORWARD = {
    25.4: SteadyStateModel.from_anchors(0.15, 0.04, 1.5e-3, 0.2, 1.2e-3),
    50.8: SteadyStateModel.from_anchors(0.08, 0.04, 0.70e-3, 0.2, 0.551e-3),
    101.6: SteadyStateModel.from_anchors(0.03, 0.04, 0.15e-3, 0.2, 0.114e-3),
}

_BACKWARD = {
    25.4: SteadyStateModel.from_anchors(0.13 / 3, 0.04, 1.25e-3, 0.2, 1.0e-3),
    50.8: SteadyStateModel.from_anchors(0.057 / 3, 0.04, 0.5625e-3, 0.2, 0.45e-3),
    101.6: SteadyStateModel.from_anchors(0.002 / 3, 0.04, 0.05e-3, 0.2, 0.04e-3),
}

_PULSE_FORWARD = {
    25.4: SteadyStateModel.from_anchors(0.2094, 0.03, 3.78e-3, 0.2, 3.78e-3 - 0.002 * 0.17),
    50.8: SteadyStateModel.from_anchors(0.08, 0.06, 1.6e-3, 0.2, 1.6e-3 - 0.001 * 0.14),
    101.6: SteadyStateModel.from_anchors(0.015, 0.06, 0.4e-3, 0.2, 0.4e-3 - 0.0005 * 0.14),
}

_DAMAGED_OUTPUT_W = {25.4: 5e-8, 50.8: 3e-8, 101.6: 2e-8}

# (group, length) -> (multipliers, thresholds); ratios are after/before readings
_GROUPS = {
    ("a", 25.4): (LeakMultipliers(backward=0.61 / 0.13, forward=2.672 / 1.5464), LeakThresholds()),
    ("a", 50.8): (LeakMultipliers(forward=0.98 / 0.76), LeakThresholds()),
    ("a", 101.6): (LeakMultipliers(), LeakThresholds()),
    ("b", 25.4): (LeakMultipliers(forward=1.366 / 1.06), LeakThresholds()),
    ("b", 50.8): (LeakMultipliers(forward=0.677 / 0.56), LeakThresholds()),
    ("b", 101.6): (LeakMultipliers(), LeakThresholds()),
    ("c", 25.4): (LeakMultipliers(forward=2.315 / 1.9), LeakThresholds()),
    ("c", 50.8): (LeakMultipliers(backward=0.063 / 0.057, forward=0.853 / 0.784),
                  LeakThresholds(backward_leak=0.388)),
    ("c", 101.6): (LeakMultipliers(backward=0.012 / 0.002), LeakThresholds(backward_leak=0.6)),
}

GROUPS = ("a", "b", "c")

# input grid of the bundled calibration tables, in watts
CALIBRATION_GRID_W = tuple(v * 1e-3 for v in
                           (0, 2, 5, 10, 15, 20, 30, 40, 60, 80, 100, 120, 140, 160, 180, 200))


def _fmt_len(length_mm: float) -> str:
    return f"{length_mm:g}mm"


def _build(length_mm: float, group: str, pulse: bool = False) -> PrismSpec:
    mult, thresholds = _GROUPS[(group, length_mm)]
    forward = _PULSE_FORWARD[length_mm] if pulse else _FORWARD[length_mm]
    name = f"pulse-{_fmt_len(length_mm)}" if pulse else f"{_fmt_len(length_mm)}-{group}"
    return PrismSpec(
        length_mm=length_mm,
        forward=forward,
        backward=_BACKWARD[length_mm],
        leak_thresholds_W=thresholds,
        leak_multipliers=mult,
        damaged_output_W=_DAMAGED_OUTPUT_W[length_mm],
        name=name,
    )


def _registry() -> dict:
    reg = {}
    for length in LENGTHS_MM:
        for group in GROUPS:
            spec = _build(length, group)
            reg[spec.name] = spec
        reg[_fmt_len(length)] = replace(reg[f"{_fmt_len(length)}-a"], name=_fmt_len(length))
        pulse = _build(length, "a", pulse=True)
        reg[pulse.name] = pulse
    return reg


PRESETS = _registry()


def preset_names() -> list[str]:
    return sorted(PRESETS)


def get_preset(name) -> PrismSpec:
    """Look up a build by name; a bare length such as ``25.4`` is accepted."""
    key = str(name).strip()
    if key not in PRESETS:
        try:
            key = _fmt_len(float(key))
        except ValueError:
            pass
    try:
        return PRESETS[key]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; known: {', '.join(preset_names())}") from None


def calibration_builds() -> list[PrismSpec]:
    return [PRESETS[_fmt_len(length)] for length in LENGTHS_MM]


def pulse_builds() -> list[PrismSpec]:
    return [PRESETS[f"pulse-{_fmt_len(length)}"] for length in LENGTHS_MM]


def synthetic_table(spec: PrismSpec, direction, digits: int = 4,
                    grid=CALIBRATION_GRID_W) -> CalibrationTable:
    """Sample a build's steady curve on the calibration grid, rounded like a
    digitized measurement."""
    direction = Direction.parse(direction)
    model = spec.model(direction)
    outs = [float(f"{model(p):.{digits}g}") for p in grid]
    return CalibrationTable(direction, grid, outs)


def bundled_calibration_path(length_mm: float):
    """Path of the bundled calibration CSV for one prism length."""
    return resources.files("limiter_lab") / "data" / f"calibration-{_fmt_len(length_mm)}.csv"
