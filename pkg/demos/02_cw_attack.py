"""
Continuous-wave injection and irreversible damage
=================================================

An eavesdropper steps a strong c.w. beam up from 0.223 W to 5 W, probing the
limiter with weak light after every step. The device first leaks in the
backward direction, then forward, and finally burns to near-opaque.
"""
from limiter_lab import harness, presets
from limiter_lab.opl import OplState, transient_output

spec = presets.get_preset("25.4mm-a")
records = harness.run_cw_cycle(spec)

previous = None
for r in records:
    if r.regime_after is not previous:
        print(f"round {r.k:2d}: {r.eve_strong_in_W:5.3f} W in -> regime {r.regime_after.name}")
        previous = r.regime_after
final = records[-1]
print(f"after the last round the strong beam emerges at {final.eve_strong_out_W * 1e9:.1f} nW")

# Replicate samples disagree on how soon leakage begins.
for length in presets.LENGTHS_MM:
    onsets = []
    for group in presets.GROUPS:
        recs = harness.run_cw_cycle(presets.get_preset(f"{length:g}mm-{group}"))
        onsets.append(next(r.eve_strong_in_W for r in recs if r.regime_after.name != "PRISTINE"))
    print(f"{length:6.1f} mm: first leak after " + ", ".join(f"{w:.3f} W" for w in onsets) + " (groups a, b, c)")

# Before the thermal lens forms, a fresh prism passes far more than its steady level.
fresh = OplState.fresh()
for t in (0.0, 0.05, 0.2, 1.0, 2.0):
    print(f"t = {t:4.2f} s  output {transient_output(spec, fresh, 0.2, t) * 1e3:7.3f} mW")

# Twenty minutes at 200 mW on the longest prism: the temperature settles.
series = harness.run_long_exposure(presets.get_preset("101.6mm-a"))
for minute in (0, 1, 5, 10, 20):
    i = min(int(minute * 60 / 0.01), len(series) - 1)
    print(f"{minute:2d} min  {series.temperature_C[i]:6.2f} C  {series.output_W[i] * 1e6:8.3f} uW")
