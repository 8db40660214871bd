"""File formats: calibration CSVs, fitted-model JSON, and result CSVs."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .errors import ValidationError
from .opl import CalibrationTable, Direction, PrismSpec, SteadyStateModel

CALIBRATION_HEADER = ("direction", "input_w", "output_w")


def fmt(value) -> str:
    """Format a CSV field; floats keep 9 significant digits."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.9g}"
    return str(value)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def read_calibration_csv(path) -> dict:
    """Parse a ``direction,input_w,output_w`` file into one table per direction.

    Errors carry the offending line number.
    """
    points = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValidationError(f"{path}: empty calibration file")
        if tuple(h.strip().lower() for h in header) != CALIBRATION_HEADER:
            raise ValidationError(f"{path}:1: expected header {','.join(CALIBRATION_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ValidationError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                direction = Direction.parse(row[0])
                p_in, p_out = float(row[1]), float(row[2])
            except (ValueError, ValidationError) as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
            pts = points.setdefault(direction, [])
            if pts and p_in <= pts[-1][0]:
                raise ValidationError(f"{path}:{lineno}: input_w not strictly increasing")
            if p_in < 0 or p_out < 0:
                raise ValidationError(f"{path}:{lineno}: negative power")
            pts.append((p_in, p_out))
    if not points:
        raise ValidationError(f"{path}: no calibration points")
    return {d: CalibrationTable(d, [p[0] for p in pts], [p[1] for p in pts])
            for d, pts in points.items()}


def write_calibration_csv(path, tables) -> Path:
    rows = []
    for table in tables:
        rows.extend((table.direction.value, x, y) for x, y in zip(table.inputs_W, table.outputs_W))
    return write_csv(path, CALIBRATION_HEADER, rows)


def save_json(path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def save_spec(path, spec: PrismSpec) -> Path:
    return save_json(path, spec.to_dict())


def load_spec(path) -> PrismSpec:
    return PrismSpec.from_dict(load_json(path))


def save_models(path, models: dict) -> Path:
    """Write fitted per-direction models keyed by direction name."""
    return save_json(path, {Direction.parse(d).value: m.to_dict() for d, m in models.items()})


def load_models(path) -> dict:
    """Per-direction models from a model file; other keys such as ``length_mm`` are ignored."""
    data = load_json(path)
    names = {d.value for d in Direction}
    return {Direction.parse(k): SteadyStateModel.from_dict(v) for k, v in data.items() if k in names}
