"""Scenario executors beyond what the CLI tests exercise."""

import pytest

from tvcap.errors import ScenarioError
from tvcap.runner import run_scenario, validate_scenario
from tvcap.scenario import apply_overrides, load_bundled


class TestFilteredFeedback:
    def test_feedback_mode_runs_and_stays_stable(self, tmp_path):
        scenario = load_bundled("emulate_capacitance")
        scenario = apply_overrides(
            scenario, ["params.modulation.mode=filtered-feedback"])
        # the default smoothing cutoff (3x the tone) droops the fundamental
        # by ~10%, so the feedback profile emulates with that error scale
        scenario["checks"] = [
            {"name": "emulation_error", "type": "emulation_rms", "max": 0.2},
            {"name": "not_diverged", "type": "not_diverged"},
            {"name": "stable_verdict", "type": "stability_verdict",
             "expect": "stable"},
        ]
        rep = run_scenario(scenario, tmp_path)
        assert rep.passed
        assert rep.blocks["profile"]["mode"] == "filtered-feedback"
        err = rep.blocks["emulation"]["rel_rms_error"]
        assert 0.005 < err < 0.2

    def test_unknown_mode_rejected(self):
        scenario = load_bundled("emulate_capacitance")
        scenario["params"]["modulation"]["mode"] = "telepathy"
        with pytest.raises(ScenarioError):
            validate_scenario(scenario)


class TestStabilityScenario:
    def test_blocks_carry_case_data(self):
        scenario = load_bundled("nonfoster_instability")
        rep = run_scenario(scenario)
        case = rep.blocks["case:frozen_negative"]
        assert case["verdict"] == "not-proven-stable"
        assert case["diverged"] is True
        assert case["growth_rate_rel_err"] < 0.02
        assert case["growth_rate_expected_per_s"] == pytest.approx(1e8)


class TestSheetScenarioArtifacts:
    def test_probe_and_power_csv(self, tmp_path):
        rep = run_scenario(load_bundled("sensor_sheet"), tmp_path)
        assert rep.passed
        above = (tmp_path / "probe_above.csv").read_text().splitlines()
        assert above[0] == "t,e_total,e_incident"
        power = (tmp_path / "power_layers.csv").read_text().splitlines()
        assert power[0] == "t,p_static,p_modulated"
        summary = (tmp_path / "summary.csv").read_text().splitlines()
        assert summary[0] == "variant,modulation,residual_rel,net_power_W_per_m2"
        assert summary[1].startswith("two-patch-arrays,on,")

    def test_report_has_explicit_verdict_per_check(self, tmp_path):
        scenario = load_bundled("sensor_sheet")
        rep = run_scenario(scenario, tmp_path)
        assert len(rep.checks) == len(scenario["checks"])
        names = [c.name for c in rep.checks]
        assert names == [c["name"] for c in scenario["checks"]]


class TestValidateOnly:
    def test_thickness_sweep_validates_without_running(self):
        scenario = load_bundled("sensor_power_balance")
        validate_scenario(scenario)  # must not simulate anything

    def test_variants_sweep_validates(self):
        validate_scenario(load_bundled("sensor_variants"))

    def test_unknown_check_type_fails_at_run(self, tmp_path):
        scenario = load_bundled("emulate_capacitance")
        scenario["checks"].append({"name": "odd", "type": "no-such-check"})
        rep = run_scenario(scenario, tmp_path)
        assert not rep.passed
        bad = [c for c in rep.checks if c.name == "odd"][0]
        assert not bad.passed
