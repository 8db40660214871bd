"""
Pulsed light beats the thermal clamp
====================================

Heat builds on the scale of the average power, so short intense pulses pass
with peaks well above the c.w. level the limiter would enforce. Slow 0.5 Hz
trains are switched c.w. light, and every switch-on meets a cold prism.
"""
from limiter_lab import presets
from limiter_lab.opl import OplState
from limiter_lab.pulse import ANCHOR_WIDTH_S, PulseTrain, photons_per_pulse, transmitted_peak

fresh = OplState.fresh()
spec = presets.get_preset("pulse-25.4mm")

print("avg (mW)   40 MHz peak   1 GHz peak   (mW, ratio to c.w.)")
for avg in (0.01, 0.03, 0.06, 0.1):
    row = []
    for rate in (40e6, 1e9):
        train = PulseTrain.from_average(rate, ANCHOR_WIDTH_S[rate], avg)
        resp = transmitted_peak(spec, fresh, train)
        row.append(f"{resp.peak_out_W * 1e3:7.3f} ({resp.ratio:5.2f}x)")
    print(f"{avg * 1e3:6.1f}     " + "   ".join(row))

# How many photons a single leaked pulse carries.
for rate in (40e6, 1e9):
    train = PulseTrain.from_average(rate, ANCHOR_WIDTH_S[rate], 0.1)
    peak = transmitted_peak(spec, fresh, train).peak_out_W
    leaked = PulseTrain(rate, train.width_s, peak)
    print(f"{rate:.0e} Hz: {photons_per_pulse(leaked):.3e} photons per transmitted pulse")

# A 50% duty 0.5 Hz train at 0.4 W peak carries 0.2 W on average.
slow = PulseTrain(0.5, 1.0, 0.4)
print("slow train average:", slow.average_W, "W, duty", slow.duty)
resp = transmitted_peak(presets.get_preset("pulse-101.6mm"), fresh, slow)
print(f"slow train peak out {resp.peak_out_W * 1e6:.2f} uW vs c.w. {resp.cw_equivalent_out_W * 1e6:.2f} uW")
