from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from limiter_lab import presets, pulse
from limiter_lab.errors import ValidationError
from limiter_lab.opl import OplState, Regime, steady_state_output
from limiter_lab.pulse import (
    ANCHOR_AVERAGES_W,
    ANCHOR_WIDTH_S,
    PEAK_ANCHORS_W,
    RATIO_MAX,
    RATIO_MIN,
    PulseTrain,
    average_power,
    photons_per_pulse,
    transmitted_peak,
)

# exact SI values, kept independent of the library's constants
H = 6.62607015e-34
C = 299792458.0

PULSE_BUILDS = {s.length_mm: s for s in presets.pulse_builds()}
CAL_BUILDS = presets.calibration_builds()
FRESH = OplState.fresh()


def fast_train(rate, average):
    return PulseTrain.from_average(rate, ANCHOR_WIDTH_S[rate], average)


class TestArithmetic:
    def test_half_duty_slow_train(self):
        assert average_power(PulseTrain(0.5, 1.0, 0.4)) == pytest.approx(0.2)

    def test_zero_peak(self):
        assert average_power(PulseTrain(1e9, 1e-10, 0.0)) == 0.0

    def test_40mhz_multiplication_oracle(self):
        assert average_power(PulseTrain(40e6, 4e-9, 0.1875)) == pytest.approx(0.1875 * 40e6 * 4e-9, rel=1e-15)

    def test_duty_above_one_rejected(self):
        with pytest.raises(ValidationError):
            PulseTrain(1e9, 2e-9, 0.1)

    @pytest.mark.parametrize("kwargs", [dict(rep_rate_Hz=0.0), dict(width_s=-1.0),
                                        dict(peak_W=-0.1), dict(wavelength_nm=0.0)])
    def test_invalid_fields(self, kwargs):
        base = dict(rep_rate_Hz=1e6, width_s=1e-9, peak_W=0.1)
        with pytest.raises(ValidationError):
            PulseTrain(**{**base, **kwargs})

    def test_from_average_round_trip(self):
        train = PulseTrain.from_average(40e6, 4e-9, 0.03)
        assert train.peak_W == pytest.approx(0.1875)
        assert train.average_W == pytest.approx(0.03)
        assert train.energy_J == pytest.approx(0.1875 * 4e-9)


class TestPhotons:
    def test_zero_energy(self):
        assert photons_per_pulse(PulseTrain(40e6, 4e-9, 0.0)) == 0.0

    def test_energy_oracle_40mhz(self):
        width = 4e-9
        train = PulseTrain(40e6, width, 1.78e-10 / width)
        expected = 1.78e-10 / (H * C / 1550e-9)
        assert photons_per_pulse(train) == pytest.approx(expected, rel=1e-9)
        assert photons_per_pulse(train) == pytest.approx(1.39e9, rel=0.01)

    def test_energy_oracle_1ghz(self):
        train = PulseTrain(1e9, 200e-12, 47.8e-3)
        assert photons_per_pulse(train) == pytest.approx(47.8e-3 * 200e-12 * 1550e-9 / (H * C), rel=1e-9)
        assert photons_per_pulse(train) == pytest.approx(7.46e7, rel=0.01)

    def test_photon_energy(self):
        assert pulse.photon_energy_J(1550.0) == pytest.approx(1.282e-19, rel=1e-3)

    @given(peak=st.floats(1e-6, 1.0), k=st.floats(0.1, 10.0), width=st.floats(1e-12, 1e-9))
    def test_linear_in_peak_and_width(self, peak, k, width):
        base = photons_per_pulse(PulseTrain(1e6, width, peak))
        assert photons_per_pulse(PulseTrain(1e6, width, k * peak)) == pytest.approx(k * base, rel=1e-12)
        assert photons_per_pulse(PulseTrain(1e6, width * k, peak)) == pytest.approx(k * base, rel=1e-12)


class TestAnchors:
    @pytest.mark.parametrize("key", sorted(PEAK_ANCHORS_W))
    def test_every_anchor_reproduced(self, key):
        rate, length = key
        for avg, expected in zip(ANCHOR_AVERAGES_W, PEAK_ANCHORS_W[key]):
            resp = transmitted_peak(PULSE_BUILDS[length], FRESH, fast_train(rate, avg))
            assert resp.peak_out_W == pytest.approx(expected, rel=0.05)

    def test_fig6c_value_and_reference(self):
        resp = transmitted_peak(PULSE_BUILDS[25.4], FRESH, fast_train(40e6, 0.03))
        assert resp.peak_out_W == pytest.approx(38.83e-3, rel=0.05)
        assert resp.cw_equivalent_out_W == pytest.approx(3.78e-3, rel=0.05)

    def test_1ghz_10mW_value_and_reference(self):
        resp = transmitted_peak(PULSE_BUILDS[25.4], FRESH, fast_train(1e9, 0.01))
        assert resp.peak_out_W == pytest.approx(28.87e-3, rel=0.05)
        assert resp.cw_equivalent_out_W == pytest.approx(2.094e-3, rel=0.05)

    @pytest.mark.parametrize("key", sorted(pulse.ALTERNATE_PEAKS_W))
    def test_alternate_readings_within_tolerance(self, key):
        rate, length, avg = key
        resp = transmitted_peak(PULSE_BUILDS[length], FRESH, fast_train(rate, avg))
        assert resp.peak_out_W == pytest.approx(pulse.ALTERNATE_PEAKS_W[key], rel=0.05)

    @pytest.mark.parametrize("key", sorted(pulse.CW_REFERENCE_W))
    def test_cw_references(self, key):
        length, avg = key
        cw = steady_state_output(PULSE_BUILDS[length], FRESH, avg)
        assert cw == pytest.approx(pulse.CW_REFERENCE_W[key], rel=0.01)

    @pytest.mark.parametrize("rate", sorted(ANCHOR_WIDTH_S))
    @pytest.mark.parametrize("length", sorted(PULSE_BUILDS))
    def test_rise_then_fall(self, rate, length):
        peaks = [transmitted_peak(PULSE_BUILDS[length], FRESH, fast_train(rate, a)).peak_out_W
                 for a in ANCHOR_AVERAGES_W]
        best = ANCHOR_AVERAGES_W[int(np.argmax(peaks))]
        assert best in (0.03, 0.06)
        assert peaks[0] < max(peaks) and peaks[-1] < max(peaks)


class TestRatio:
    @given(avg=st.floats(0.005, 0.1), rate=st.sampled_from(sorted(ANCHOR_WIDTH_S)),
           idx=st.integers(0, 5))
    def test_ratio_bounds(self, avg, rate, idx):
        spec = (list(PULSE_BUILDS.values()) + CAL_BUILDS)[idx]
        resp = transmitted_peak(spec, FRESH, fast_train(rate, avg))
        assert RATIO_MIN - 1e-12 <= resp.ratio <= RATIO_MAX + 1e-12
        assert resp.ratio == pytest.approx(resp.peak_out_W / resp.cw_equivalent_out_W)

    def test_continuous_train_has_unit_ratio(self):
        train = PulseTrain(1e9, 1e-9, 0.03)
        assert pulse.peak_ratio(PULSE_BUILDS[25.4], train) == 1.0
        resp = transmitted_peak(PULSE_BUILDS[25.4], FRESH, train)
        assert resp.ratio == 1.0 and resp.peak_out_W == resp.cw_equivalent_out_W

    @given(avg=st.floats(0.005, 0.1), rate=st.floats(1e6, 2e9),
           d1=st.floats(1e-4, 1.0), d2=st.floats(1e-4, 1.0), idx=st.integers(0, 2))
    def test_ratio_non_decreasing_as_duty_falls(self, avg, rate, d1, d2, idx):
        spec = presets.pulse_builds()[idx]
        lo, hi = sorted((d1, d2))
        r_lo = pulse.peak_ratio(spec, PulseTrain.from_average(rate, lo / rate, avg))
        r_hi = pulse.peak_ratio(spec, PulseTrain.from_average(rate, hi / rate, avg))
        assert r_lo >= r_hi - 1e-12

    @given(avg=st.floats(0.005, 0.1), length=st.sampled_from(sorted(PULSE_BUILDS)))
    def test_rate_ordering(self, avg, length):
        spec = PULSE_BUILDS[length]
        p40 = transmitted_peak(spec, FRESH, fast_train(40e6, avg)).peak_out_W
        p1g = transmitted_peak(spec, FRESH, fast_train(1e9, avg)).peak_out_W
        assert p1g >= p40 * (1 - 1e-12)

    @given(avg=st.floats(0.005, 0.1), builds=st.sampled_from(["pulse", "calibration"]))
    def test_length_ordering_at_40mhz(self, avg, builds):
        specs = presets.pulse_builds() if builds == "pulse" else CAL_BUILDS
        peaks = [transmitted_peak(s, FRESH, fast_train(40e6, avg)).peak_out_W for s in specs]
        assert peaks[0] > peaks[1] > peaks[2]

    def test_unanchored_rate_rejected_by_anchor_lookup(self):
        with pytest.raises(ValidationError):
            pulse.anchor_peak(1e6, 0.03, 25.4)


class TestSlowAndDamaged:
    def test_slow_train_peak_is_cold_value(self):
        spec = CAL_BUILDS[2]
        train = PulseTrain(0.5, 1.0, 0.2)
        assert pulse.is_slow(spec, train)
        resp = transmitted_peak(spec, FRESH, train)
        assert resp.peak_out_W == pytest.approx(spec.forward.linear_gain * 0.2)
        assert resp.cw_equivalent_out_W == pytest.approx(steady_state_output(spec, FRESH, 0.2))
        assert resp.peak_out_W > resp.cw_equivalent_out_W

    def test_damaged_prism_passes_damaged_output(self):
        spec = CAL_BUILDS[0]
        state = replace(FRESH, regime=Regime.DAMAGED)
        resp = transmitted_peak(spec, state, fast_train(40e6, 0.03))
        assert resp.peak_out_W <= spec.damaged_output_W


class TestWaveform:
    def test_shape_and_duty(self):
        train = fast_train(40e6, 0.03)
        t, p = pulse.waveform(train, 0.04, n_periods=3, samples_per_pulse=8)
        assert len(t) == len(p) == 3 * 50  # 25 ns period in 0.5 ns samples
        assert np.count_nonzero(p) == 3 * 8
        assert set(np.unique(p)) == {0.0, 0.04}
        np.testing.assert_allclose(np.diff(t), train.width_s / 8)

    def test_no_periods(self):
        t, p = pulse.waveform(fast_train(1e9, 0.01), 0.02, n_periods=0)
        assert t.size == p.size == 0
