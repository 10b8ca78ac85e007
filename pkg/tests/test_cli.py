"""CLI contract: subcommands, exit codes, overrides, determinism."""

import json

import pytest

from tvcap.cli import main
from tvcap.scenario import (apply_overrides, bundled_scenario_names,
                            load_bundled)


def run_cli(*args):
    return main(list(args))


class TestListAndValidate:
    def test_bundled_inventory(self):
        names = bundled_scenario_names()
        assert len(names) >= 8
        assert "emulate_capacitance" in names
        assert "sensor_fdtd" in names

    def test_list_exit_code(self, capsys):
        assert run_cli("list") == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) >= 8

    def test_validate_bundled(self, capsys):
        assert run_cli("validate", "emulate_inductance") == 0
        assert "ok" in capsys.readouterr().out

    def test_validate_all_bundled(self):
        for name in bundled_scenario_names():
            assert run_cli("validate", name) == 0

    def test_validate_zero_loss_resistance(self, tmp_path, capsys):
        scenario = load_bundled("emulate_inductance")
        scenario["params"]["target"]["r_l_ohm"] = 0.0
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(scenario))
        assert run_cli("validate", str(path)) == 3
        err = capsys.readouterr().err
        assert "r_l" in err and "zero" in err

    def test_missing_file_is_parse_error(self):
        assert run_cli("run", "missing.json") == 2

    def test_bad_json_is_parse_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert run_cli("run", str(path)) == 2

    def test_schema_violation_is_validation_error(self, tmp_path):
        path = tmp_path / "incomplete.json"
        path.write_text(json.dumps({"name": "x", "kind": "circuit"}))
        assert run_cli("validate", str(path)) == 3


class TestRun:
    def test_run_writes_artifacts_and_passes(self, tmp_path, capsys):
        code = run_cli("run", "emulate_capacitance", "--out", str(tmp_path))
        assert code == 0
        out_dir = tmp_path / "emulate_capacitance"
        assert (out_dir / "report.txt").is_file()
        assert (out_dir / "trace.csv").is_file()
        assert (out_dir / "profile.csv").is_file()
        assert (out_dir / "echo.json").is_file()
        trace = (out_dir / "trace.csv").read_text().splitlines()
        assert trace[0] == "t,q,v_cap,i"
        report = (out_dir / "report.txt").read_text()
        assert "CHECK emulation_error: PASS" in report

    def test_failed_check_exits_one(self, tmp_path):
        scenario = load_bundled("emulate_capacitance")
        scenario["checks"][0]["max"] = 1e-9  # unreachable tolerance
        path = tmp_path / "strict.json"
        path.write_text(json.dumps(scenario))
        assert run_cli("run", str(path), "--out", str(tmp_path), "--quiet") == 1
        report = (tmp_path / "emulate_capacitance" / "report.txt").read_text()
        assert "CHECK emulation_error: FAIL" in report

    def test_reruns_byte_identical(self, tmp_path):
        for sub in ("one", "two"):
            assert run_cli("run", "emulate_resistance", "--quiet",
                           "--out", str(tmp_path / sub)) == 0
        for name in ("trace.csv", "profile.csv", "echo.json"):
            a = (tmp_path / "one" / "emulate_resistance" / name).read_bytes()
            b = (tmp_path / "two" / "emulate_resistance" / name).read_bytes()
            assert a == b

    def test_quiet_suppresses_report(self, tmp_path, capsys):
        run_cli("run", "nonfoster_instability", "--quiet", "--out", str(tmp_path))
        assert capsys.readouterr().out == ""


class TestOverrides:
    def test_override_changes_only_named_key(self):
        scenario = load_bundled("sensor_sheet")
        changed = apply_overrides(scenario, ["modulation=off"])
        assert changed["params"]["modulation"] == "off"
        changed["params"]["modulation"] = scenario["params"]["modulation"]
        assert changed == scenario

    def test_dotted_path_and_json_values(self):
        scenario = load_bundled("emulate_capacitance")
        changed = apply_overrides(
            scenario, ["params.sim.periods=30", "params.r_s_ohm=12.5"])
        assert changed["params"]["sim"]["periods"] == 30
        assert changed["params"]["r_s_ohm"] == 12.5

    def test_unknown_path_rejected(self):
        scenario = load_bundled("emulate_capacitance")
        with pytest.raises(Exception):
            apply_overrides(scenario, ["params.nonsense.key=1"])

    def test_modulation_off_flips_invisibility_expectation(self, tmp_path):
        code = run_cli("run", "sensor_sheet", "--out", str(tmp_path),
                       "--quiet", "--override", "modulation=off")
        assert code == 0
        report = (tmp_path / "sensor_sheet" / "report.txt").read_text()
        assert "CHECK invisibility: PASS" in report
        assert "expected-fail" in report

    def test_override_echoed(self, tmp_path):
        run_cli("run", "emulate_capacitance", "--quiet", "--out",
                str(tmp_path), "--override", "params.sim.periods=25")
        echo = json.loads(
            (tmp_path / "emulate_capacitance" / "echo.json").read_text())
        assert echo["params"]["sim"]["periods"] == 25
