import copy
import json

import pytest

from mirup import cli
from mirup.errors import ConfigError, DomainError

MINIMAL = """
[crystal]
length_mm = 10.0
"""

NO_SEED = """
[simulation]
rep_rate_khz = 750.0
duration_s = 1.0
"""


class TestLoadScenario:
    def test_bundled_cool_point(self):
        cfg = cli.load_scenario("paper_25C")
        s = cfg.scenario
        assert s.signal.wavelength == pytest.approx(4.65e-6)
        assert s.pump.power == pytest.approx(0.063)
        assert s.pump.wavelength == pytest.approx(980e-9)
        assert s.crystal.length == pytest.approx(0.01)
        assert s.crystal.temperature == pytest.approx(298.15)
        assert s.detector.dark_rate == 55.0
        assert cfg.measured.eta_tot == pytest.approx(3.6e-6)
        assert cfg.measured.background_rate == pytest.approx(32.8)
        assert cfg.warnings == ()

    def test_bundled_hot_point(self):
        cfg = cli.load_scenario("paper_93C")
        assert cfg.scenario.crystal.temperature == pytest.approx(366.15)
        assert cfg.measured.background_rate == pytest.approx(78.1)

    def test_defaults_fill_missing_sections(self, tmp_path):
        path = tmp_path / "minimal.toml"
        path.write_text(MINIMAL)
        cfg = cli.load_scenario(path)
        # everything else falls back to the 25 C reference configuration
        assert cfg.scenario.pump.power == pytest.approx(0.063)
        assert cfg.scenario.eta_opt == pytest.approx(0.137)
        assert cfg.tac.bin_width == pytest.approx(0.05e-9)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.toml"
        path.write_text("")
        with pytest.raises(ConfigError):
            cli.load_scenario(path)

    def test_parse_error(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("[crystal\nlength_mm = 10")
        with pytest.raises(ConfigError, match="parse error"):
            cli.load_scenario(path)

    def test_negative_pump_power_names_field(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[pump]\npower_mw = -5.0\n")
        with pytest.raises(ConfigError, match=r"pump\.power_mw"):
            cli.load_scenario(path)

    def test_unknown_key_warns_by_default(self, tmp_path):
        path = tmp_path / "typo.toml"
        path.write_text("[pump]\npower_mw = 63.0\npowerr_mw = 1.0\n")
        cfg = cli.load_scenario(path)
        assert any("powerr_mw" in w for w in cfg.warnings)

    def test_strict_mode_rejects_unknown_key(self, tmp_path):
        path = tmp_path / "typo.toml"
        path.write_text("[pump]\npowerr_mw = 1.0\n")
        with pytest.raises(ConfigError, match="powerr_mw"):
            cli.load_scenario(path, strict=True)

    def test_strict_mode_rejects_unknown_section(self, tmp_path):
        path = tmp_path / "typo.toml"
        path.write_text("[pump]\npower_mw = 63.0\n\n[pmup]\nwavelength_nm = 980.0\n")
        with pytest.raises(ConfigError, match="pmup"):
            cli.load_scenario(path, strict=True)

    def test_file_with_only_unknown_sections_rejected(self, tmp_path):
        path = tmp_path / "typo.toml"
        path.write_text("[pmup]\npower_mw = 63.0\n")
        with pytest.raises(ConfigError, match="pmup"):
            cli.load_scenario(path)

    def test_unknown_name(self):
        with pytest.raises(ConfigError):
            cli.load_scenario("paper_300C")

    def test_exclusive_attenuation_keys(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text(
            "[crystal]\nabsorption_fraction = 0.4\nattenuation_per_m = 51.1\n"
        )
        with pytest.raises(ConfigError, match="mutually exclusive"):
            cli.load_scenario(path)

    def test_echo_is_self_contained(self):
        cfg = cli.load_scenario("paper_25C")
        for section in ("crystal", "pump", "signal", "filters", "detector", "simulation"):
            assert section in cfg.echo
        assert cfg.echo["pump"]["power_mw"] == pytest.approx(63.0)

    def test_tabulated_filter_table(self, tmp_path):
        table = tmp_path / "filter.csv"
        table.write_text(
            "frequency_hz,transmission\n"
            "6.439e13,0.0\n6.444e13,1.0\n6.450e13,1.0\n6.455e13,0.0\n"
        )
        scenario = tmp_path / "tabulated.toml"
        # relative paths resolve against the scenario file's directory
        scenario.write_text('[filters]\ntable_csv = "filter.csv"\n')
        cfg = cli.load_scenario(scenario)
        report = cli.run_command("noise", cfg)
        assert report.results["background_model_hz"] > 0
        # roughly the same acceptance band as the bundled delta filter
        delta = cli.run_command("noise", cli.load_scenario("paper_25C"))
        assert report.results["background_model_hz"] == pytest.approx(
            delta.results["background_model_hz"], rel=0.5
        )

    def test_missing_filter_table_is_config_error(self, tmp_path):
        scenario = tmp_path / "tabulated.toml"
        scenario.write_text('[filters]\ntable_csv = "does_not_exist.csv"\n')
        with pytest.raises(ConfigError):
            cli.load_scenario(scenario)


class TestCommands:
    def test_efficiency_reports_theory_gap(self):
        cfg = cli.load_scenario("paper_25C")
        report = cli.run_command("efficiency", cfg)
        assert 2.3 <= report.results["theory_gap"] <= 2.5
        assert report.results["eta_sfg_measured"] == pytest.approx(5.05e-5, rel=1e-2)
        assert report.results["per_watt_measured_per_w"] == pytest.approx(8.03e-4, rel=1e-2)

    def test_noise_reports_model_and_measured(self):
        cfg = cli.load_scenario("paper_25C")
        report = cli.run_command("noise", cfg)
        assert report.results["background_predicted_measured_eta_hz"] == pytest.approx(
            17.9, abs=0.2
        )
        assert report.results["total_measured_hz"] == pytest.approx(87.8)

    def test_sensitivity_reports_discrepancy_note(self):
        cfg = cli.load_scenario("paper_25C")
        report = cli.run_command("sensitivity", cfg)
        assert report.results["snr0_pw"] == pytest.approx(1.042, rel=5e-3)
        assert any("1.24" in note and "factor" in note for note in report.notes)

    def test_sensitivity_hot_point(self):
        cfg = cli.load_scenario("paper_93C")
        report = cli.run_command("sensitivity", cfg)
        assert report.results["snr0_pw"] == pytest.approx(1.579, rel=5e-3)
        assert any("2.82" in note for note in report.notes)

    def test_simulate_requires_seed(self, tmp_path):
        path = tmp_path / "noseed.toml"
        path.write_text(NO_SEED)
        cfg = cli.load_scenario(path)
        with pytest.raises(ConfigError, match="seed"):
            cli.run_command("simulate", cfg)

    def test_simulate_zero_duration_is_domain_error(self):
        cfg = cli.load_scenario("paper_25C")
        with pytest.raises(DomainError):
            cli.run_command("simulate", cfg, cli.Options(seed=1, duration=0.0))

    def test_simulate_produces_histogram(self):
        cfg = cli.load_scenario("paper_25C")
        report = cli.run_command("simulate", cfg, cli.Options(seed=42, duration=5.0))
        hist = report.results["histogram"]
        assert len(hist["counts"]) == len(hist["bin_start_ns"])
        assert report.provenance["seed"] == 42
        assert "PCG64" in report.provenance["rng"]

    def test_optimize_results(self):
        cfg = cli.load_scenario("paper_25C")
        report = cli.run_command("optimize", cfg)
        assert report.results["xi_star"] == pytest.approx(1.39175, abs=1e-4)
        assert report.results["optimal_length_fixed_focus_m"] == pytest.approx(
            1.0 / cfg.scenario.crystal.attenuation, rel=1e-12
        )
        assert report.tabular is not None

    def test_optimize_custom_sweep(self):
        cfg = cli.load_scenario("paper_25C")
        options = cli.Options(sweep_path="pump.power", sweep_grid=(0.063, 1.0))
        report = cli.run_command("optimize", cfg, options)
        header, rows = report.tabular
        assert header[0] == "parameter"
        assert len(rows) == 2

    def test_optimize_sweep_needs_grid(self):
        cfg = cli.load_scenario("paper_25C")
        with pytest.raises(ConfigError):
            cli.run_command("optimize", cfg, cli.Options(sweep_path="pump.power"))

    def test_compare_rows_match_catalog(self):
        cfg = cli.load_scenario("paper_25C")
        report = cli.run_command("compare", cfg)
        header, rows = report.tabular
        assert header == ["name", "timing_ns", "snr0_pw", "ratio", "note"]
        assert len(rows) == 3
        by_name = {row[0]: float(row[3]) for row in rows}
        assert by_name["Fermionics PV-650"] == pytest.approx(180, rel=0.01)
        assert by_name["Vigo System PVI-5"] == pytest.approx(1.31e6, rel=0.01)

    def test_compare_with_custom_catalog(self, tmp_path):
        catalog = tmp_path / "catalog.csv"
        catalog.write_text("name,timing_ns,snr0_pw,note\nAlpha,1.0,12.4,ten times worse\n")
        cfg = cli.load_scenario("paper_25C")
        report = cli.run_command("compare", cfg, cli.Options(catalog=str(catalog)))
        _, rows = report.tabular
        assert len(rows) == 1
        assert float(rows[0][3]) == pytest.approx(10.0, rel=1e-6)

    def test_unknown_command(self):
        cfg = cli.load_scenario("paper_25C")
        with pytest.raises(ConfigError):
            cli.run_command("frobnicate", cfg)


class TestEmitReport:
    def test_json_round_trip(self, tmp_path):
        cfg = cli.load_scenario("paper_25C")
        report = cli.run_command("sensitivity", cfg)
        out = tmp_path / "report.json"
        cli.emit_report(report, fmt="json", out=out)
        parsed = json.loads(out.read_text())
        assert parsed == report.to_json_dict()

    def test_json_stable_except_timestamp(self):
        cfg = cli.load_scenario("paper_25C")
        doc_a = cli.run_command("sensitivity", cfg).to_json_dict()
        doc_b = cli.run_command("sensitivity", cfg).to_json_dict()
        a, b = copy.deepcopy(doc_a), copy.deepcopy(doc_b)
        a["provenance"].pop("timestamp")
        b["provenance"].pop("timestamp")
        assert a == b

    def test_csv_for_non_tabular_rejected(self):
        cfg = cli.load_scenario("paper_25C")
        report = cli.run_command("sensitivity", cfg)
        with pytest.raises(ConfigError):
            cli.emit_report(report, fmt="csv", out=None)

    def test_text_lines_carry_units(self):
        cfg = cli.load_scenario("paper_25C")
        report = cli.run_command("sensitivity", cfg)
        text = "\n".join(report.text_lines())
        assert "pW" in text and "Hz" in text and "(probability)" in text


class TestMainExitCodes:
    def test_success(self, capsys):
        assert cli.main(["sensitivity", "--config", "paper_25C"]) == 0
        assert "snr0" in capsys.readouterr().out

    def test_config_error_is_2(self, tmp_path, capsys):
        missing = tmp_path / "nope.toml"
        assert cli.main(["efficiency", "--config", str(missing)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_domain_error_is_3(self, capsys):
        code = cli.main(["simulate", "--seed", "1", "--duration", "0"])
        assert code == 3
        assert "domain error" in capsys.readouterr().err

    def test_csv_on_scalar_report_is_2(self, capsys):
        assert cli.main(["efficiency", "--format", "csv"]) == 2

    def test_strict_flag(self, tmp_path, capsys):
        path = tmp_path / "typo.toml"
        path.write_text("[pump]\npowerr_mw = 1.0\n")
        assert cli.main(["noise", "--config", str(path), "--strict"]) == 2
        assert cli.main(["noise", "--config", str(path)]) == 0

    def test_compare_csv_stdout(self, capsys):
        assert cli.main(["compare", "--format", "csv"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "name,timing_ns,snr0_pw,ratio,note"
        assert len(out.strip().splitlines()) == 4

    def test_simulate_histogram_csv_determinism(self, tmp_path):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        base = ["simulate", "--seed", "9", "--duration", "2.0", "--format", "csv"]
        assert cli.main(base + ["--out", str(out_a)]) == 0
        assert cli.main(base + ["--out", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        header = out_a.read_text().splitlines()[0]
        assert header == "bin_start_ns,bin_end_ns,counts"
