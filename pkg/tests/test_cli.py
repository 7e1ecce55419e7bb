import csv
import io
import math

import pytest

from sdqkd import cli
from sdqkd.bounds import keyrate_imperfect, keyrate_perfect
from sdqkd.devices import DeviceModel
from sdqkd.cli import EXIT_INPUT, EXIT_NO_KEY, EXIT_OK, EXIT_STATISTICAL, format_number, main

FAMILY = ["--radians", "--alpha1", "0.2", "--beta1", "0.2", "--beta2", "0.2"]
RECT_ONLY = ["--degrees", "--alpha2", "-45", "--alpha4", "135", "--beta2", "-45", "--beta4", "135"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestFormatNumber:
    @pytest.mark.parametrize("x,expected", [
        (0.0, "0"),
        (1.0, "1"),
        (0.5, "0.5"),
        (0.0284781103856581, "0.0284781103857"),
        (1 / 3, "0.333333333333"),
    ])
    def test_values(self, x, expected):
        assert format_number(x) == expected

    def test_nan(self):
        assert format_number(math.nan) == "nan"


class TestRates:
    def test_defaults(self, capsys):
        code, out, _ = run(capsys, "rates")
        assert code == EXIT_OK
        assert out == "e_bit1,e_bit,e_phase,Q\n0,0,0,0\n"

    def test_family(self, capsys):
        code, out, _ = run(capsys, "rates", *FAMILY)
        row = parse(out)[0]
        assert code == EXIT_OK
        assert float(row["e_bit1"]) == pytest.approx(0.018985406924, abs=1e-12)
        assert float(row["Q"]) == pytest.approx(0.0284781103857, abs=1e-12)

    def test_degrees_equal_radians(self, capsys):
        _, deg, _ = run(capsys, "rates", "--degrees", "--alpha1", "10")
        _, rad, _ = run(capsys, "rates", "--radians", "--alpha1", str(math.radians(10)))
        assert deg == rad

    def test_angles_need_unit(self, capsys):
        code, out, err = run(capsys, "rates", "--alpha1", "0.2")
        assert code == EXIT_INPUT
        assert out == ""
        assert "--degrees or --radians" in err

    def test_channel_must_sum_to_one(self, capsys):
        code, _, err = run(capsys, "rates", "--p00", "0.9")
        assert code == EXIT_INPUT
        assert "sum to 1" in err

    def test_missing_probabilities_default_to_zero(self, capsys):
        code, out, _ = run(capsys, "rates", "--p00", "0.9", "--p10", "0.1")
        assert code == EXIT_OK
        assert parse(out)[0]["e_bit"] == "0.05"

    def test_table_format(self, capsys):
        _, out, _ = run(capsys, "rates", "--format", "table")
        header, row = out.splitlines()
        assert header.split() == ["e_bit1", "e_bit", "e_phase", "Q"]
        assert row.split() == ["0"] * 4

    def test_large_angle_warning_reported(self, capsys):
        code, _, err = run(capsys, "rates", *RECT_ONLY)
        assert code == EXIT_OK
        assert err.startswith("warning:")

    def test_unknown_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["rates", "--gamma", "1"])
        assert info.value.code == 2


class TestConfigFile:
    def test_file_values(self, tmp_path, capsys):
        path = tmp_path / "run.cfg"
        path.write_text("# family run\nunit = radians\nalpha1 = 0.2\nbeta1 = 0.2\nbeta2 = 0.2\n")
        _, from_file, _ = run(capsys, "rates", "--config", str(path))
        _, from_flags, _ = run(capsys, "rates", *FAMILY)
        assert from_file == from_flags

    def test_flags_override(self, tmp_path, capsys):
        path = tmp_path / "run.cfg"
        path.write_text("p00 = 0.5\np11 = 0.5\n")
        _, out, _ = run(capsys, "rates", "--config", str(path), "--p00", "1", "--p11", "0")
        assert out.splitlines()[1] == "0,0,0,0"

    def test_unknown_key(self, tmp_path, capsys):
        path = tmp_path / "run.cfg"
        path.write_text("gamma = 1\n")
        code, _, err = run(capsys, "rates", "--config", str(path))
        assert code == EXIT_INPUT
        assert "unknown key" in err

    def test_file_angles_need_unit(self, tmp_path, capsys):
        path = tmp_path / "run.cfg"
        path.write_text("alpha1 = 0.2\n")
        code, _, err = run(capsys, "rates", "--config", str(path))
        assert code == EXIT_INPUT
        assert "'unit'" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(capsys, "rates", "--config", str(tmp_path / "absent.cfg"))
        assert code == EXIT_INPUT

    def test_out_file(self, tmp_path, capsys):
        target = tmp_path / "rates.csv"
        code, out, _ = run(capsys, "rates", "--out", str(target))
        assert code == EXIT_OK
        assert out == ""
        assert target.read_text() == "e_bit1,e_bit,e_phase,Q\n0,0,0,0\n"


class TestSweep:
    def test_perfect_columns_coincide(self, capsys):
        code, out, _ = run(capsys, "sweep", "--q-max", "0.2", "--q-step", "0.01")
        rows = parse(out)
        assert code == EXIT_OK
        assert len(rows) == 21
        assert all(r["R_perfect"] == r["R_imperfect"] for r in rows)

    def test_row_matches_library(self, capsys):
        _, out, _ = run(capsys, "sweep", *FAMILY, "--q-min", "0.05", "--q-max", "0.05")
        (row,) = parse(out)
        model = DeviceModel.family_a(0.2)
        assert row["Q"] == "0.05"
        assert row["R_perfect"] == format_number(keyrate_perfect(0.05).rate)
        assert row["R_imperfect"] == format_number(keyrate_imperfect(0.05, model).rate)

    def test_starts_at_detection_floor(self, capsys):
        _, out, _ = run(capsys, "sweep", *FAMILY, "--q-max", "0.1")
        assert float(parse(out)[0]["Q"]) == pytest.approx(0.0189854069238, abs=1e-12)

    def test_below_floor_rejected(self, capsys):
        code, _, err = run(capsys, "sweep", *FAMILY, "--q-min", "0.01")
        assert code == EXIT_INPUT
        assert "out of model" in err

    def test_q_max_above_half(self, capsys):
        code, _, _ = run(capsys, "sweep", "--q-max", "0.6")
        assert code == EXIT_INPUT

    def test_exact_mode_marks_infeasible(self, capsys):
        _, out, _ = run(capsys, "sweep", *FAMILY, "--bound", "exact_optimizer", "--q-max", "0.1")
        rows = parse(out)
        assert rows[0]["R_imperfect"] == "nan"
        assert rows[-1]["R_imperfect"] != "nan"

    def test_non_positive_step(self, capsys):
        code, _, _ = run(capsys, "sweep", "--q-step", "0")
        assert code == EXIT_INPUT


class TestSimulate:
    def test_pass(self, capsys):
        code, out, _ = run(capsys, "simulate", *FAMILY, "--n-pulses", "200000", "--seed", "1")
        row = parse(out)[0]
        assert code == EXIT_OK
        assert row["verdict"] == "PASS"
        assert int(row["n_pulses"]) == 200000

    def test_fail_exit_code(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "analytic_qber", lambda model, channel: 0.3)
        code, out, _ = run(capsys, "simulate", "--n-pulses", "20000")
        assert code == EXIT_STATISTICAL
        assert parse(out)[0]["verdict"] == "FAIL"

    def test_eve_on_perfect_devices_detected(self, capsys):
        code, out, _ = run(capsys, "simulate", "--eve", "intercept_resend_rect",
                           "--n-pulses", "100000")
        row = parse(out)[0]
        assert code == EXIT_OK
        assert row["verdict"] == "attack detected"
        assert float(row["qber"]) == pytest.approx(0.25, abs=0.01)

    def test_eve_on_rect_only_undetected(self, capsys):
        code, out, _ = run(capsys, "simulate", *RECT_ONLY, "--eve", "intercept_resend_rect",
                           "--n-pulses", "100000")
        row = parse(out)[0]
        assert code == EXIT_OK
        assert row["qber"] == "0"
        assert row["verdict"] == "attack undetected"

    def test_workers_do_not_change_counts(self, capsys):
        _, one, _ = run(capsys, "simulate", "--p00", "0.9", "--p10", "0.1",
                        "--n-pulses", "300000", "--seed", "8")
        _, four, _ = run(capsys, "simulate", "--p00", "0.9", "--p10", "0.1",
                         "--n-pulses", "300000", "--seed", "8", "--workers", "4")
        assert one == four

    def test_bad_pulse_count(self, capsys):
        code, _, _ = run(capsys, "simulate", "--n-pulses", "0")
        assert code == EXIT_INPUT


class TestThreshold:
    def test_perfect(self, capsys):
        code, out, _ = run(capsys, "threshold")
        row = parse(out)[0]
        assert code == EXIT_OK
        assert row["bound"] == "analytic_family_a"
        assert float(row["Q_threshold"]) == pytest.approx(0.110028, abs=1e-5)

    def test_family_analytic(self, capsys):
        _, out, _ = run(capsys, "threshold", *FAMILY)
        assert float(parse(out)[0]["Q_threshold"]) == pytest.approx(0.111067, abs=1e-5)

    def test_general_model_uses_optimizer(self, capsys):
        _, out, _ = run(capsys, "threshold", "--radians", "--alpha2", "0.1")
        assert parse(out)[0]["bound"] == "exact_optimizer"

    def test_analytic_on_general_model_rejected(self, capsys):
        code, _, _ = run(capsys, "threshold", "--radians", "--alpha2", "0.1",
                         "--bound", "analytic_family_a")
        assert code == EXIT_INPUT

    def test_rect_only_no_key(self, capsys):
        code, out, err = run(capsys, "threshold", *RECT_ONLY)
        assert code == EXIT_NO_KEY
        assert parse(out)[0]["Q_threshold"] == "nan"
        assert "no tolerated QBER" in err
