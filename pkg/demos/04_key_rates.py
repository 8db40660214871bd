"""
What inflated pulses do to the key rate
=======================================

If the source emits g times more photons than the user believes, the
decoy-state estimate is computed with the wrong intensities. The "incorrect"
rate R_I is what the user thinks they have, the "correct" R_C uses the real
intensities.
"""
import numpy as np

from limiter_lab import keyrate
from limiter_lab.keyrate import ATTACK_PRESETS, Bb84Params, Label, MdiParams

distances = np.arange(0.0, 151.0, 10.0)
for g in ATTACK_PRESETS:
    curves = keyrate.bb84_curves(Bb84Params(), distances, g)
    r_i, r_c, clean = (curves[k].rates for k in (Label.R_I, Label.R_C, Label.NO_ATTACK))
    i = np.searchsorted(distances, 50.0)
    print(f"BB84 g={g:4.2f}  at 50 km: no attack {clean[i]:.2e}, R_I {r_i[i]:.2e}, R_C {r_c[i]:.2e}")

# MDI-QKD is much more fragile: under strong inflation the true rate vanishes.
distances = np.arange(0.0, 252.0, 25.0)
for g in (1.0,) + ATTACK_PRESETS:
    curves = keyrate.mdi_curves(MdiParams(), distances, g)
    reach = distances[curves[Label.R_C].rates > 0]
    print(f"MDI  g={g:4.2f}  correct-rate reach {reach[-1] if reach.size else 0:5.1f} km")
