"""Regenerate the bundled calibration CSVs from the built-in calibration builds."""
from pathlib import Path

from limiter_lab.io import write_calibration_csv
from limiter_lab.presets import calibration_builds, synthetic_table

DATA = Path(__file__).resolve().parents[1] / "src" / "limiter_lab" / "data"

for spec in calibration_builds():
    tables = [synthetic_table(spec, d) for d in ("forward", "backward")]
    out = write_calibration_csv(DATA / f"calibration-{spec.length_mm:g}mm.csv", tables)
    print(out)
