"""Phenomenological model of the thermo-optical optical power limiter (OPL).

The device is described by a two-piece steady-state transfer curve per
direction (linear small-signal region, then a near-flat clamp), a single
exponential activation transient, a lumped first-order thermal model, and an
irreversible degradation state machine driven by the largest power seen.

All powers are in watts, times in seconds, temperatures in degrees Celsius.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import FitError, ValidationError

DEFAULT_ACTIVATION_TAU_S = 0.2
DEFAULT_AMBIENT_C = 20.0
# explicit thermal integration step, as a fraction of the activation time
THERMAL_DT_FRACTION = 1.0 / 50.0


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"

    @classmethod
    def parse(cls, value: "Direction | str") -> "Direction":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(f"unknown direction {value!r}") from None


class Regime(enum.IntEnum):
    """Degradation regimes, ordered; transitions only ever go up."""

    PRISTINE = 0
    BACKWARD_LEAKY = 1
    FORWARD_LEAKY = 2
    DAMAGED = 3


@dataclass(frozen=True)
class SteadyStateModel:
    """Continuous two-piece transfer curve.

    Below the knee the output is ``linear_gain * P``; above it the output
    follows the clamp line ``clamp_offset + clamp_slope * P``. Beyond the
    largest calibrated input the curve is held flat rather than extrapolated.
    """

    linear_gain: float
    clamp_offset: float
    clamp_slope: float
    max_input_W: float = math.inf
    residual_rms_W: float = 0.0
    residual_max_W: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.linear_gain <= 1.0:
            raise ValidationError(f"linear_gain must be in [0, 1], got {self.linear_gain}")
        if self.max_input_W <= 0:
            raise ValidationError("max_input_W must be positive")

    @property
    def knee_W(self) -> float:
        denom = self.linear_gain - self.clamp_slope
        if denom <= 0:
            return math.inf
        return self.clamp_offset / denom

    def __call__(self, input_W):
        x = np.minimum(np.asarray(input_W, dtype=float), self.max_input_W)
        y = np.where(
            x <= self.knee_W,
            self.linear_gain * x,
            self.clamp_offset + self.clamp_slope * x,
        )
        y = np.clip(y, 0.0, None)
        return float(y) if y.ndim == 0 else y

    def to_dict(self) -> dict:
        return {
            "linear_gain": self.linear_gain,
            "clamp_offset": self.clamp_offset,
            "clamp_slope": self.clamp_slope,
            "max_input_W": None if math.isinf(self.max_input_W) else self.max_input_W,
            "residual_rms_W": self.residual_rms_W,
            "residual_max_W": self.residual_max_W,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SteadyStateModel":
        max_in = data.get("max_input_W")
        return cls(
            linear_gain=float(data["linear_gain"]),
            clamp_offset=float(data["clamp_offset"]),
            clamp_slope=float(data["clamp_slope"]),
            max_input_W=math.inf if max_in is None else float(max_in),
            residual_rms_W=float(data.get("residual_rms_W", 0.0)),
            residual_max_W=float(data.get("residual_max_W", 0.0)),
        )

    @classmethod
    def from_anchors(cls, linear_gain, p_low, out_low, p_high, out_high, max_input_W=0.2):
        """Build a curve whose clamp line passes through two (input, output) anchors."""
        slope = (out_high - out_low) / (p_high - p_low)
        offset = out_low - slope * p_low
        return cls(linear_gain, offset, slope, max_input_W)


@dataclass(frozen=True)
class CalibrationTable:
    direction: Direction
    inputs_W: tuple
    outputs_W: tuple

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction.parse(self.direction))
        x = tuple(float(v) for v in self.inputs_W)
        y = tuple(float(v) for v in self.outputs_W)
        if len(x) != len(y):
            raise ValidationError("inputs and outputs differ in length")
        if any(v < 0 for v in x + y):
            raise ValidationError("calibration powers must be non-negative")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise ValidationError("calibration inputs must be strictly increasing")
        object.__setattr__(self, "inputs_W", x)
        object.__setattr__(self, "outputs_W", y)

    def __len__(self):
        return len(self.inputs_W)


@dataclass(frozen=True)
class LeakThresholds:
    backward_leak: float = 1.0
    forward_leak: float = 2.0
    destruction: float = 4.0

    def __post_init__(self):
        if not 0 <= self.backward_leak < self.forward_leak < self.destruction:
            raise ValidationError("leak thresholds must satisfy 0 <= backward < forward < destruction")


@dataclass(frozen=True)
class LeakMultipliers:
    backward: float = 1.0
    forward: float = 1.0

    def __post_init__(self):
        if self.backward < 1 or self.forward < 1:
            raise ValidationError("leak multipliers must be >= 1")


@dataclass(frozen=True)
class PrismSpec:
    """Parameters of one OPL build (one acrylic prism sample)."""

    length_mm: float
    forward: SteadyStateModel
    backward: SteadyStateModel
    activation_tau_s: float = DEFAULT_ACTIVATION_TAU_S
    thermal_rise_coeff: float = 0.3  # K / (W s)
    thermal_decay_coeff: float = 0.006  # 1 / s
    leak_thresholds_W: LeakThresholds = field(default_factory=LeakThresholds)
    leak_multipliers: LeakMultipliers = field(default_factory=LeakMultipliers)
    damaged_output_W: float = 3e-8
    name: str = ""

    def __post_init__(self):
        if self.length_mm <= 0:
            raise ValidationError("length_mm must be positive")
        if self.activation_tau_s <= 0:
            raise ValidationError("activation_tau_s must be positive")
        if self.thermal_rise_coeff < 0 or self.thermal_decay_coeff < 0:
            raise ValidationError("thermal coefficients must be non-negative")
        if self.damaged_output_W < 0:
            raise ValidationError("damaged_output_W must be non-negative")

    @property
    def clamp_ceiling_forward_W(self) -> float:
        return self.forward(0.2)

    @property
    def clamp_ceiling_backward_W(self) -> float:
        return self.backward(0.2)

    @property
    def linear_gain_low_power(self) -> float:
        return self.forward.linear_gain

    def model(self, direction) -> SteadyStateModel:
        return self.forward if Direction.parse(direction) is Direction.FORWARD else self.backward

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "length_mm": self.length_mm,
            "forward": self.forward.to_dict(),
            "backward": self.backward.to_dict(),
            "activation_tau_s": self.activation_tau_s,
            "thermal_rise_coeff": self.thermal_rise_coeff,
            "thermal_decay_coeff": self.thermal_decay_coeff,
            "leak_thresholds_W": vars(self.leak_thresholds_W).copy(),
            "leak_multipliers": vars(self.leak_multipliers).copy(),
            "damaged_output_W": self.damaged_output_W,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PrismSpec":
        return cls(
            length_mm=float(data["length_mm"]),
            forward=SteadyStateModel.from_dict(data["forward"]),
            backward=SteadyStateModel.from_dict(data["backward"]),
            activation_tau_s=float(data.get("activation_tau_s", DEFAULT_ACTIVATION_TAU_S)),
            thermal_rise_coeff=float(data.get("thermal_rise_coeff", 0.3)),
            thermal_decay_coeff=float(data.get("thermal_decay_coeff", 0.006)),
            leak_thresholds_W=LeakThresholds(**data.get("leak_thresholds_W", {})),
            leak_multipliers=LeakMultipliers(**data.get("leak_multipliers", {})),
            damaged_output_W=float(data.get("damaged_output_W", 3e-8)),
            name=str(data.get("name", "")),
        )


@dataclass(frozen=True)
class OplState:
    temperature_C: float = DEFAULT_AMBIENT_C
    ambient_C: float = DEFAULT_AMBIENT_C
    regime: Regime = Regime.PRISTINE
    max_exposure_W: float = 0.0
    elapsed_on_s: float = 0.0

    @classmethod
    def fresh(cls, ambient_C: float = DEFAULT_AMBIENT_C) -> "OplState":
        return cls(temperature_C=ambient_C, ambient_C=ambient_C)


# --------------------------------------------------------------------------
# calibration fitting


def _sse(model: SteadyStateModel, x, y) -> float:
    return float(np.sum((model(x) - y) ** 2))


def _split_candidates(x, y):
    """Separate fits of both pieces for every split; keep those whose
    intersection lands between the two points adjacent to the split."""
    n = len(x)
    for s in range(1, n - 1):
        xl, yl = x[:s], y[:s]
        denom = float(np.dot(xl, xl))
        if denom == 0.0:
            continue
        gain = float(np.dot(xl, yl)) / denom
        xr, yr = x[s:], y[s:]
        slope, offset = np.polyfit(xr, yr, 1)
        if gain - slope <= 0:
            continue
        knee = offset / (gain - slope)
        tol = 1e-12 * max(1.0, abs(x[-1]))
        if x[s - 1] - tol <= knee <= x[s] + tol and 0.0 <= gain <= 1.0:
            yield gain, float(offset), float(slope)


def _hinge_candidates(x, y):
    """Continuous hinge regression with the knee scanned per interval."""
    from scipy.optimize import minimize_scalar

    def solve(k):
        basis = np.column_stack([np.minimum(x, k), np.maximum(x - k, 0.0)])
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        return coef, float(np.sum((basis @ coef - y) ** 2))

    positive = x[x > 0]
    for lo, hi in zip(positive[:-1], positive[1:]):
        res = minimize_scalar(lambda k: solve(k)[1], bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * hi})
        (gain, slope), _ = solve(res.x)
        if 0.0 <= gain <= 1.0 and slope < gain:
            yield float(gain), float((gain - slope) * res.x), float(slope)


def fit_calibration(table: CalibrationTable) -> SteadyStateModel:
    """Fit the two-piece steady-state curve to a calibration table.

    Raises FitError when fewer than four points are given or no admissible
    two-piece curve exists.
    """
    if len(table) < 4:
        raise FitError(f"need at least 4 calibration points, got {len(table)}")
    x = np.asarray(table.inputs_W)
    y = np.asarray(table.outputs_W)
    x_max = float(x[-1])
    if x_max <= 0:
        raise FitError("calibration inputs are all zero")

    if not np.any(y):
        return SteadyStateModel(0.0, 0.0, 0.0, x_max)

    candidates = [SteadyStateModel(g, c0, c1, x_max) for g, c0, c1 in _split_candidates(x, y)]
    if not candidates:
        candidates = [SteadyStateModel(g, c0, c1, x_max) for g, c0, c1 in _hinge_candidates(x, y)]
    gain_all = float(np.dot(x, y) / np.dot(x, x))
    if gain_all <= 1.0:
        # purely linear table, no clamp engaged
        candidates.append(SteadyStateModel(gain_all, 0.0, gain_all, x_max))
    if not candidates:
        raise FitError("no admissible two-piece curve fits the calibration points")

    best = min(candidates, key=lambda m: _sse(m, x, y))
    resid = best(x) - y
    return replace(
        best,
        residual_rms_W=float(np.sqrt(np.mean(resid**2))),
        residual_max_W=float(np.max(np.abs(resid))),
    )


# --------------------------------------------------------------------------
# device response


def _check_power(input_W: float) -> float:
    input_W = float(input_W)
    if not input_W >= 0:  # also rejects NaN
        raise ValidationError(f"input power must be non-negative, got {input_W}")
    return input_W


def steady_state_output(spec: PrismSpec, state: OplState, input_W: float,
                        direction=Direction.FORWARD) -> float:
    """Settled output power for a constant input in the given direction."""
    input_W = _check_power(input_W)
    direction = Direction.parse(direction)
    if state.regime is Regime.DAMAGED:
        # opaque prism: transmission grows linearly up to 1 W, then saturates
        return min(spec.damaged_output_W * min(input_W, 1.0), input_W)
    out = spec.model(direction)(input_W)
    mult = spec.leak_multipliers
    if direction is Direction.BACKWARD and state.regime >= Regime.BACKWARD_LEAKY:
        out *= mult.backward
    elif direction is Direction.FORWARD and state.regime >= Regime.FORWARD_LEAKY:
        out *= mult.forward
    return min(out, input_W)


def transient_output(spec: PrismSpec, state: OplState, input_W: float, t_since_on_s,
                     direction=Direction.FORWARD):
    """Output after switching on a constant input; the lens forms exponentially.

    ``t_since_on_s`` may be a scalar or an array.
    """
    input_W = _check_power(input_W)
    t = np.asarray(t_since_on_s, dtype=float)
    if np.any(t < 0):
        raise ValidationError("t_since_on_s must be non-negative")
    steady = steady_state_output(spec, state, input_W, direction)
    if state.regime is Regime.DAMAGED:
        cold = steady
    else:
        cold = spec.model(direction).linear_gain * input_W
    out = steady + (cold - steady) * np.exp(-t / spec.activation_tau_s)
    return float(out) if out.ndim == 0 else out


def default_thermal_dt(spec: PrismSpec) -> float:
    return spec.activation_tau_s * THERMAL_DT_FRACTION


def equilibrium_temperature(spec: PrismSpec, state: OplState, input_W: float) -> float:
    if spec.thermal_decay_coeff == 0:
        return math.inf if input_W > 0 else state.temperature_C
    return state.ambient_C + spec.thermal_rise_coeff * input_W / spec.thermal_decay_coeff


def step_thermal(spec: PrismSpec, state: OplState, input_W: float, dt_s: float) -> OplState:
    """One explicit Euler step of dT/dt = a P - b (T - T_ambient)."""
    input_W = _check_power(input_W)
    if not dt_s > 0:
        raise ValidationError("dt_s must be positive")
    dT = spec.thermal_rise_coeff * input_W - spec.thermal_decay_coeff * (state.temperature_C - state.ambient_C)
    return replace(state, temperature_C=state.temperature_C + dt_s * dT,
                   elapsed_on_s=state.elapsed_on_s + dt_s)


def euler_temperature(spec: PrismSpec, state: OplState, input_W: float, t_s, dt_s=None):
    """Temperature after repeated Euler steps of size ``dt_s`` up to time ``t_s``.

    Uses the closed form of the Euler recursion, so the result equals looping
    :func:`step_thermal` ``t // dt`` times followed by one partial step.
    """
    dt = default_thermal_dt(spec) if dt_s is None else float(dt_s)
    t = np.asarray(t_s, dtype=float)
    a, b = spec.thermal_rise_coeff, spec.thermal_decay_coeff
    n_full = np.floor(t / dt + 1e-9)
    rest = np.clip(t - n_full * dt, 0.0, None)
    dev0 = state.temperature_C - state.ambient_C
    if b == 0:
        dev = dev0 + a * input_W * t
    else:
        dev_eq = a * input_W / b
        dev = dev_eq + (dev0 - dev_eq) * (1.0 - b * dt) ** n_full
        dev = dev + rest * (a * input_W - b * dev)
    out = state.ambient_C + dev
    return float(out) if out.ndim == 0 else out


def advance_thermal(spec: PrismSpec, state: OplState, input_W: float, duration_s: float,
                    dt_s=None) -> OplState:
    """Hold a constant input for ``duration_s`` and return the new state."""
    input_W = _check_power(input_W)
    if duration_s < 0:
        raise ValidationError("duration_s must be non-negative")
    if duration_s == 0:
        return state
    temp = euler_temperature(spec, state, input_W, duration_s, dt_s)
    return replace(state, temperature_C=temp, elapsed_on_s=state.elapsed_on_s + duration_s)


def regime_for_exposure(spec: PrismSpec, exposure_W: float) -> Regime:
    th = spec.leak_thresholds_W
    if exposure_W > th.destruction:
        return Regime.DAMAGED
    if exposure_W >= th.forward_leak:
        return Regime.FORWARD_LEAKY
    if exposure_W >= th.backward_leak:
        return Regime.BACKWARD_LEAKY
    return Regime.PRISTINE


def update_regime(spec: PrismSpec, state: OplState, exposure_W: float) -> OplState:
    """Record an exposure and promote the regime; never demotes."""
    exposure_W = _check_power(exposure_W)
    peak = max(state.max_exposure_W, exposure_W)
    regime = max(state.regime, regime_for_exposure(spec, peak))
    return replace(state, max_exposure_W=peak, regime=Regime(regime))
