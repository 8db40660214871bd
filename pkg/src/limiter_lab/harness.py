"""Attack scenarios replayed against an OPL build.

Every run starts from a fresh device state that it owns, and every run is
deterministic.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import opl
from .errors import ValidationError
from .opl import Direction, OplState, PrismSpec, Regime
from .pulse import PulseResponse, PulseTrain, is_slow, transmitted_peak, waveform


class ScenarioKind(enum.Enum):
    CW_CYCLE = "cw-cycle"
    LONG_EXPOSURE = "long-exposure"
    PULSE_INJECTION = "pulse"


@dataclass(frozen=True)
class CwCycle:
    """Strong/weak/backward test rounds with the strong power stepped up each round.

    The last round is clamped to ``stop_W`` so the sweep ends exactly there.
    """

    start_W: float = 0.223
    step_W: float = 0.2
    stop_W: float = 5.0
    eve_weak_W: float = 0.223
    alice_weak_W: float = 0.003
    strong_s: float = 120.0
    weak_s: float = 15.0
    thermal_dt_s: float | None = None

    kind = ScenarioKind.CW_CYCLE

    def __post_init__(self):
        if not self.step_W > 0:
            raise ValidationError("step_W must be positive")
        if self.start_W > self.stop_W:
            raise ValidationError("start_W must not exceed stop_W")
        if min(self.start_W, self.eve_weak_W, self.alice_weak_W) < 0:
            raise ValidationError("powers must be non-negative")

    def strong_powers(self) -> list[float]:
        eps = 1e-9 * self.step_W
        n = int(np.floor((self.stop_W - self.start_W) / self.step_W + 1e-9))
        powers = [self.start_W + k * self.step_W for k in range(n + 1)]
        if powers[-1] < self.stop_W - eps:
            powers.append(self.stop_W)
        return powers


@dataclass(frozen=True)
class LongExposure:
    power_W: float = 0.2
    duration_s: float = 1200.0
    sample_dt_s: float = 0.01
    thermal_dt_s: float | None = None

    kind = ScenarioKind.LONG_EXPOSURE

    def __post_init__(self):
        if not self.sample_dt_s > 0:
            raise ValidationError("sample_dt_s must be positive")
        if self.duration_s < 0 or self.power_W < 0:
            raise ValidationError("duration_s and power_W must be non-negative")


@dataclass(frozen=True)
class PulseInjection:
    trains: tuple = ()
    sample_dt_s: float = 0.1
    duration_s: float = 600.0
    waveform_periods: int = 4

    kind = ScenarioKind.PULSE_INJECTION

    def __post_init__(self):
        object.__setattr__(self, "trains", tuple(self.trains))
        if not self.sample_dt_s > 0:
            raise ValidationError("sample_dt_s must be positive")
        if self.duration_s < 0:
            raise ValidationError("duration_s must be non-negative")


@dataclass(frozen=True)
class CycleRecord:
    k: int
    eve_strong_in_W: float
    eve_strong_out_W: float
    eve_weak_out_W: float
    alice_weak_out_W: float
    max_temperature_C: float
    regime_after: Regime

    FIELDS = ("k", "eve_strong_in_w", "eve_strong_out_w", "eve_weak_out_w",
              "alice_weak_out_w", "max_temperature_c", "regime_after")

    def row(self) -> tuple:
        return (self.k, self.eve_strong_in_W, self.eve_strong_out_W, self.eve_weak_out_W,
                self.alice_weak_out_W, self.max_temperature_C, self.regime_after.name.lower())


@dataclass(frozen=True)
class TimeSeries:
    t_s: np.ndarray
    output_W: np.ndarray
    temperature_C: np.ndarray | None = None

    def __len__(self):
        return len(self.t_s)


@dataclass(frozen=True)
class PulseInjectionResult:
    series: list = field(default_factory=list)
    responses: list = field(default_factory=list)


def _hold(spec, state, power, duration, direction, dt):
    state = opl.advance_thermal(spec, state, power, duration, dt)
    state = opl.update_regime(spec, state, power)
    return state, opl.steady_state_output(spec, state, power, direction)


def run_cw_cycle(spec: PrismSpec, scenario: CwCycle | None = None) -> list[CycleRecord]:
    scenario = scenario or CwCycle()
    dt = scenario.thermal_dt_s
    state = OplState.fresh()
    records = []
    for k, power in enumerate(scenario.strong_powers()):
        state, strong_out = _hold(spec, state, power, scenario.strong_s, Direction.FORWARD, dt)
        hottest = state.temperature_C
        state, weak_out = _hold(spec, state, scenario.eve_weak_W, scenario.weak_s, Direction.FORWARD, dt)
        state, alice_out = _hold(spec, state, scenario.alice_weak_W, scenario.weak_s, Direction.BACKWARD, dt)
        records.append(CycleRecord(k, power, strong_out, weak_out, alice_out, hottest, state.regime))
    return records


def run_long_exposure(spec: PrismSpec, scenario: LongExposure | None = None) -> TimeSeries:
    scenario = scenario or LongExposure()
    if scenario.duration_s == 0:
        return TimeSeries(np.empty(0), np.empty(0), np.empty(0))
    n = int(round(scenario.duration_s / scenario.sample_dt_s))
    t = np.arange(n + 1) * scenario.sample_dt_s
    state = opl.update_regime(spec, OplState.fresh(), scenario.power_W)
    out = opl.transient_output(spec, state, scenario.power_W, t)
    temp = opl.euler_temperature(spec, state, scenario.power_W, t, scenario.thermal_dt_s)
    return TimeSeries(t, np.atleast_1d(out), np.atleast_1d(temp))


def _slow_series(spec, state, train, sample_dt, duration) -> TimeSeries:
    n = int(round(duration / sample_dt))
    t = np.arange(n) * sample_dt
    phase = np.mod(np.round(t, 9), train.period_s)
    on = phase < train.width_s - 1e-12
    trans = opl.transient_output(spec, state, train.peak_W, phase)
    out = np.where(on, trans, 0.0)
    return TimeSeries(t, out)


def run_pulse_injection(spec: PrismSpec, scenario: PulseInjection) -> PulseInjectionResult:
    """Transmitted peaks and sampled outputs for each train.

    Slow trains are sampled like a power meter (every ``sample_dt_s`` over
    ``duration_s``); fast trains yield a few periods of the rectangular
    output waveform.
    """
    result = PulseInjectionResult()
    state = OplState.fresh()
    for train in scenario.trains:
        if not isinstance(train, PulseTrain):
            raise ValidationError(f"expected PulseTrain, got {type(train).__name__}")
        response = transmitted_peak(spec, state, train)
        if is_slow(spec, train):
            series = _slow_series(spec, state, train, scenario.sample_dt_s, scenario.duration_s)
        else:
            t, p = waveform(train, response.peak_out_W, scenario.waveform_periods)
            series = TimeSeries(t, p)
        result.responses.append(response)
        result.series.append(series)
    return result


def on_samples(series: TimeSeries, train: PulseTrain) -> np.ndarray:
    """Samples taken while a slow train is in its on phase."""
    phase = np.mod(np.round(series.t_s, 9), train.period_s)
    return series.output_W[phase < train.width_s - 1e-12]


__all__ = [
    "ScenarioKind", "CwCycle", "LongExposure", "PulseInjection", "CycleRecord", "TimeSeries",
    "PulseInjectionResult", "PulseResponse", "run_cw_cycle", "run_long_exposure",
    "run_pulse_injection", "on_samples",
]
