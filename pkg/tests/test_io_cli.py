import csv
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from limiter_lab import cli, presets
from limiter_lab.errors import ValidationError
from limiter_lab.io import (
    fmt,
    load_models,
    load_spec,
    read_calibration_csv,
    read_csv,
    save_spec,
    write_calibration_csv,
)
from limiter_lab.opl import Direction
from limiter_lab.reproduce import REPRODUCE_FILES


def rows_of(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(autouse=True)
def no_env_output_dir(monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_ENV, raising=False)


class TestCsv:
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_nine_digit_round_trip(self, x):
        assert float(fmt(x)) == pytest.approx(x, rel=5e-9, abs=0)

    def test_calibration_round_trip(self, tmp_path):
        tables = [presets.synthetic_table(presets.get_preset("50.8mm"), d) for d in Direction]
        path = write_calibration_csv(tmp_path / "cal.csv", tables)
        back = read_calibration_csv(path)
        assert [back[t.direction] for t in tables] == tables

    @pytest.mark.parametrize("body, line", [
        ("direction,input_w,output_w\nforward,0.1,1e-3\nforward,abc,1e-3\n", 3),
        ("direction,input_w,output_w\nforward,0.1,1e-3\nforward,0.05,1e-3\n", 3),
        ("direction,input_w,output_w\nsideways,0.1,1e-3\n", 2),
        ("direction,input_w,output_w\nforward,0.1\n", 2),
        ("direction,input_w,output_w\nforward,0.1,-1e-3\n", 2),
        ("dir,in,out\n", 1),
    ])
    def test_errors_carry_line_numbers(self, tmp_path, body, line):
        path = tmp_path / "bad.csv"
        path.write_text(body)
        with pytest.raises(ValidationError, match=rf"bad\.csv:{line}:"):
            read_calibration_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValidationError, match="empty"):
            read_calibration_csv(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "header.csv"
        path.write_text("direction,input_w,output_w\n")
        with pytest.raises(ValidationError):
            read_calibration_csv(path)

    def test_spec_file_round_trip(self, tmp_path):
        spec = presets.get_preset("101.6mm-c")
        assert load_spec(save_spec(tmp_path / "s.json", spec)) == spec


class TestCalibrateCommand:
    def test_bundled_csv(self, tmp_path, capsys):
        src = presets.bundled_calibration_path(25.4)
        out = tmp_path / "model.json"
        assert cli.main(["calibrate", str(src), "--model-out", str(out), "--length-mm", "25.4"]) == 0
        models = load_models(out)
        assert models[Direction.FORWARD](0.2) == pytest.approx(1.2e-3, rel=0.10)
        report = read_csv(tmp_path / "model-residuals.csv")
        assert len(report) == 2 * len(presets.CALIBRATION_GRID_W)
        assert {"direction", "residual_w"} <= set(report[0])

    def test_synthetic_round_trip(self, tmp_path):
        spec = presets.get_preset("50.8mm")
        tables = [presets.synthetic_table(spec, d, digits=17) for d in Direction]
        src = write_calibration_csv(tmp_path / "synthetic.csv", tables)
        assert cli.main(["calibrate", str(src), "--output-dir", str(tmp_path)]) == 0
        for row in read_csv(tmp_path / "synthetic-model-residuals.csv"):
            assert abs(float(row["residual_w"])) < 1e-9

    def test_empty_csv_is_validation_error(self, tmp_path, capsys):
        src = tmp_path / "empty.csv"
        src.write_text("")
        assert cli.main(["calibrate", str(src), "--output-dir", str(tmp_path)]) == 1
        assert "empty" in capsys.readouterr().err

    def test_missing_file_is_io_error(self, tmp_path):
        assert cli.main(["calibrate", str(tmp_path / "none.csv")]) == 2

    def test_model_feeds_run(self, tmp_path):
        src = presets.bundled_calibration_path(101.6)
        model = tmp_path / "m.json"
        cli.main(["calibrate", str(src), "--model-out", str(model)])
        code = cli.main(["run", "long-exposure", "--model", str(model), "--length-mm", "101.6",
                         "--set", "duration_s=5", "--output-dir", str(tmp_path)])
        assert code == 0
        rows = read_csv(tmp_path / "long-exposure-101.6mm.csv")
        assert len(rows) == 501

    def test_model_without_length(self, tmp_path):
        model = tmp_path / "m.json"
        cli.main(["calibrate", str(presets.bundled_calibration_path(25.4)), "--model-out", str(model)])
        assert cli.main(["run", "cw-cycle", "--model", str(model), "--output-dir", str(tmp_path)]) == 1


class TestRunCommand:
    def test_cw_cycle(self, tmp_path):
        assert cli.main(["run", "cw-cycle", "--length-mm", "25.4", "--output-dir", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "cw-cycle-25.4mm.csv")
        assert rows[-1]["regime_after"] == "damaged"
        assert float(rows[-1]["eve_strong_in_w"]) == 5.0

    def test_pulse_summary(self, tmp_path):
        code = cli.main(["run", "pulse", "--length-mm", "25.4", "--train", "40e6", "4e-9", "0.03",
                         "--output-dir", str(tmp_path)])
        assert code == 0
        summary = read_csv(tmp_path / "pulse-25.4mm.csv")
        assert float(summary[0]["peak_out_w"]) == pytest.approx(38.83e-3, rel=0.05)
        wave = rows_of(tmp_path / "pulse-25.4mm-train0.csv")
        assert wave[0] == ["t_s", "power_w"] and len(wave) > 1

    def test_unknown_scenario_is_usage_error(self, tmp_path, capsys):
        assert cli.main(["run", "bogus", "--length-mm", "25.4", "--output-dir", str(tmp_path)]) == 1
        err = capsys.readouterr().err
        assert "usage" in err and "bogus" in err

    def test_bad_flag_is_usage_error(self, capsys):
        assert cli.main(["run", "--no-such-flag"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_config_with_flag_override(self, tmp_path):
        config = {
            "scenario": "long-exposure",
            "preset": "25.4mm",
            "params": {"power_W": 0.2, "duration_s": 2.0, "sample_dt_s": 0.5},
            "output_dir": str(tmp_path / "from-config"),
        }
        path = tmp_path / "run.json"
        path.write_text(json.dumps(config))
        assert cli.main(["run", "--config", str(path), "--set", "duration_s=1"]) == 0
        rows = read_csv(tmp_path / "from-config" / "long-exposure-25.4mm.csv")
        assert [float(r["t_s"]) for r in rows] == [0.0, 0.5, 1.0]
        assert cli.main(["run", "--config", str(path), "--preset", "50.8mm",
                         "--output-dir", str(tmp_path / "flag")]) == 0
        assert (tmp_path / "flag" / "long-exposure-50.8mm.csv").exists()

    def test_config_pulse_trains(self, tmp_path):
        config = {
            "scenario": "pulse", "length_mm": 101.6,
            "trains": [{"rep_rate_hz": 1e9, "width_s": 2e-10, "average_w": 0.03},
                       {"rep_rate_hz": 0.5, "width_s": 1.0, "peak_w": 0.2}],
            "params": {"duration_s": 10.0},
        }
        path = tmp_path / "pulse.json"
        path.write_text(json.dumps(config))
        assert cli.main(["run", "--config", str(path), "--output-dir", str(tmp_path)]) == 0
        summary = read_csv(tmp_path / "pulse-101.6mm.csv")
        assert float(summary[0]["peak_out_w"]) == pytest.approx(5.41e-3, rel=0.05)
        assert len(read_csv(tmp_path / "pulse-101.6mm-train1.csv")) == 100

    @pytest.mark.parametrize("config", [
        {"scenario": "cw-cycle", "length_mm": 25.4, "params": {"step_W": 0}},
        {"scenario": "cw-cycle", "length_mm": 25.4, "params": {"warp": 1}},
        {"scenario": "pulse", "length_mm": 25.4, "trains": []},
        {"scenario": "pulse", "length_mm": 25.4, "trains": [{"rep_rate_hz": 1e9, "width_s": 1e-10}]},
        {"scenario": "cw-cycle"},
        {"scenario": "cw-cycle", "preset": "nope"},
    ])
    def test_invalid_configs(self, tmp_path, config):
        path = tmp_path / "c.json"
        path.write_text(json.dumps(config))
        assert cli.main(["run", "--config", str(path), "--output-dir", str(tmp_path)]) == 1

    def test_malformed_config(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json")
        assert cli.main(["run", "--config", str(path)]) == 1

    def test_env_overrides_default_output(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
        assert cli.main(["run", "cw-cycle", "--length-mm", "50.8"]) == 0
        assert (tmp_path / "env" / "cw-cycle-50.8mm.csv").exists()

    def test_unwritable_output_is_io_error(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert cli.main(["run", "cw-cycle", "--length-mm", "25.4", "--output-dir", str(blocker / "sub")]) == 2


class TestKeyrateCommand:
    def test_bb84_curves(self, tmp_path):
        assert cli.main(["keyrate", "--protocol", "bb84", "--max-distance", "20", "--step", "10",
                         "--output-dir", str(tmp_path)]) == 0
        rows = rows_of(tmp_path / "keyrate-bb84.csv")
        assert rows[0] == ["distance_km", "rate", "label", "g"]
        assert len(rows) == 1 + 3 * 7
        assert {r[2] for r in rows[1:]} == {"NoAttack", "R_I", "R_C"}

    def test_overrides(self, tmp_path):
        assert cli.main(["keyrate", "--protocol", "mdi", "--g", "4.41", "--max-distance", "10",
                         "--set", "e_det=0.02", "--output-dir", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "keyrate-mdi.csv")
        assert {r["g"] for r in rows} == {"1", "4.41"}

    def test_unknown_parameter(self, tmp_path):
        assert cli.main(["keyrate", "--set", "zeta=1", "--output-dir", str(tmp_path)]) == 1


class TestBudgetCommand:
    def test_paper_rounding(self, capsys):
        assert cli.main(["budget", "--rate", "1e9", "--paper-rounding"]) == 0
        out = capsys.readouterr().out
        assert "gamma=-140 dB" in out
        assert "1 GHz, 140, 40, 40, 60(1)" in out

    def test_custom_catalog(self, tmp_path, capsys):
        cat = tmp_path / "cat.json"
        cat.write_text(json.dumps({"isolator_db": [60], "attenuator_db": [0],
                                   "reflectivity_db": [20], "max_isolators": 2}))
        assert cli.main(["budget", "--rate", "1e9", "--paper-rounding", "--catalog", str(cat)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[-1] == "1 GHz, 140, 20, 0, 60(2)"

    def test_unknown_rate_needs_width(self):
        assert cli.main(["budget", "--rate", "1e8", "--peak", "0.05"]) == 1
        assert cli.main(["budget", "--rate", "1e8", "--peak", "0.05", "--width", "1e-9"]) == 0


class TestReproduce:
    def test_all_files_and_determinism(self, tmp_path):
        first, second = tmp_path / "a" / "nested", tmp_path / "b"
        assert cli.main(["reproduce-paper", "--output-dir", str(first)]) == 0
        assert cli.main(["reproduce-paper", "--output-dir", str(second)]) == 0
        for name in REPRODUCE_FILES:
            assert (first / name).read_bytes() == (second / name).read_bytes()
        assert sorted(p.name for p in first.iterdir()) == sorted(REPRODUCE_FILES)
        assert "1 GHz, 140, 40, 40, 60(1)" in (first / "table1.txt").read_text()
        fig7 = read_csv(first / "fig7.csv")
        assert {(r["label"], r["g"]) for r in fig7} == {("NoAttack", "1")} | {
            (lab, g) for lab in ("R_I", "R_C") for g in ("1.17", "4.41", "7.16")}
        for name in REPRODUCE_FILES:
            if name.endswith(".csv"):
                rows = rows_of(first / name)
                assert rows[0] and all(h for h in rows[0])
                assert len(rows) > 1

    def test_numeric_fields_parse(self, tmp_path):
        cli.main(["reproduce-paper", "--output-dir", str(tmp_path)])
        rows = read_csv(tmp_path / "fig2.csv")
        data = np.array([[float(r[k]) for k in ("length_mm", "input_w", "output_w")] for r in rows])
        assert np.all(np.isfinite(data))
