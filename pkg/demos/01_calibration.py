"""
Fitting the steady-state limiter curve
======================================

Each prism build clamps its output once the input passes a knee of a few
tens of milliwatts. We load the bundled forward/backward calibration tables,
fit the two-piece model and compare the three prism lengths at 200 mW.
"""
import numpy as np

from limiter_lab import presets
from limiter_lab.io import read_calibration_csv
from limiter_lab.opl import Direction, fit_calibration

fits = {}
for length in presets.LENGTHS_MM:
    tables = read_calibration_csv(presets.bundled_calibration_path(length))
    fits[length] = {d: fit_calibration(t) for d, t in tables.items()}

# The fitted knee and clamp level per build.
for length, models in fits.items():
    fwd = models[Direction.FORWARD]
    print(f"{length:6.1f} mm  knee {fwd.knee_W * 1e3:6.2f} mW  "
          f"out(200 mW) {fwd(0.2) * 1e3:7.4f} mW  rms residual {fwd.residual_rms_W:.2e} W")

# Longer prisms attenuate more everywhere on the clamp.
grid = np.linspace(0.04, 0.2, 9)
table = np.array([fits[L][Direction.FORWARD](grid) for L in presets.LENGTHS_MM])
print("\ninput (mW):", np.round(grid * 1e3, 1))
for L, row in zip(presets.LENGTHS_MM, table):
    print(f"{L:6.1f} mm :", np.round(row * 1e3, 4))
print("strictly ordered:", bool(np.all(table[0] > table[1]) and np.all(table[1] > table[2])))
