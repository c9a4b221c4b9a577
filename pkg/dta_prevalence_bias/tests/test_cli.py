"""
Tests for the command-line interface.
"""

import json
import os

import pytest

from dta_prevalence_bias.__main__ import build_parser, main
from dta_prevalence_bias.manifest import verify_manifest

SMALL_RUN = ["--studies", "30", "--subjects", "100", "--chains", "2", "--iters", "200", "--burnin", "100"]


def _read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


class TestParser:
    """Test class for argument parsing."""

    def test_setups_argument(self):
        args = build_parser().parse_args(["simulate", "--setups", "1,4"])
        assert args.setups == [1, 4]
        assert build_parser().parse_args(["simulate", "--setups", "all"]).setups == "all"

    def test_subgroup_flag(self):
        parser = build_parser()
        assert parser.parse_args(["fit"]).subgroup is None
        assert parser.parse_args(["fit", "--no-subgroup"]).subgroup is False

    def test_png_only_on_report_stages(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["simulate", "--png"])
        assert build_parser().parse_args(["all", "--png"]).png


class TestCommands:
    """Test class for running commands end to end."""

    def test_all_stages(self, temp_output_dir, capsys):
        """Test that 'all' writes every output and a matching manifest."""
        out = os.path.join(temp_output_dir, "rse")
        main(["all", "--bias", "reference_standard_error", "--setups", "1,4", "--out", out, "--png"] + SMALL_RUN)

        printed = capsys.readouterr().out
        assert "Written:" in printed
        for name in ("estimates.csv", "meta.csv", "correlations.csv", "fit.json", "report.md", "report.html"):
            assert os.path.exists(os.path.join(out, name)), name
        assert not os.path.exists(os.path.join(out, "verif.csv"))
        for name in ("scatter_setup1_se.svg", "scatter_setup4_sp.svg", "adjusted_setup1_se.svg", "overview_se.png"):
            assert os.path.exists(os.path.join(out, "figures", name)), name

        with open(os.path.join(out, "fit.json")) as f:
            document = json.load(f)
        assert document["model"] == "lcbm"
        assert sorted(document["results"]) == ["Setup 1", "Setup 4"]
        assert document["results"]["Setup 1"]["n_studies"] == 30
        assert verify_manifest(os.path.join(out, "manifest.json")) == []

        with open(os.path.join(out, "manifest.json")) as f:
            manifest = json.load(f)
        assert manifest["seed"] == 20240601
        assert manifest["command"].startswith("dta-bias all")
        assert "reference_standard_error/Setup 4" in manifest["scenarios"]

    def test_reruns_are_byte_identical(self, temp_output_dir):
        """Test that the same seed reproduces CSV, JSON and SVG bytes."""
        outs = [os.path.join(temp_output_dir, name) for name in ("a", "b")]
        for out in outs:
            main(["all", "--bias", "partial_verification", "--setups", "1", "--seed", "5", "--out", out] + SMALL_RUN)
        for name in (
            "estimates.csv",
            "meta.csv",
            "verif.csv",
            "correlations.csv",
            "fit.json",
            "figures/scatter_setup1_se.svg",
            "figures/adjusted_setup1_sp.svg",
        ):
            assert _read_bytes(os.path.join(outs[0], name)) == _read_bytes(os.path.join(outs[1], name)), name

    def test_stages_separately_with_subgroups(self, temp_output_dir):
        """Test simulate, correlate, fit and report as separate commands."""
        out = os.path.join(temp_output_dir, "spectrum")
        common = ["--bias", "spectrum_effect", "--setups", "2", "--out", out] + SMALL_RUN
        main(["simulate"] + common)
        main(["correlate"] + common)
        main(["fit"] + common)
        main(["report"] + common)

        with open(os.path.join(out, "fit.json")) as f:
            document = json.load(f)
        assert sorted(document["results"]["Setup 2"]) == ["stratum_0", "stratum_1"]
        with open(os.path.join(out, "report.md"), encoding="utf-8") as f:
            report = f.read()
        assert "## Adjusted estimates (lcbm)" in report
        assert os.path.exists(os.path.join(out, "figures", "adjusted_setup2_r1_se.svg"))

    def test_verification_rate_preset(self, temp_output_dir):
        out = os.path.join(temp_output_dir, "pvb")
        main(["simulate", "--bias", "partial_verification", "--verif-rate", "low", "--out", out] + SMALL_RUN)
        with open(os.path.join(out, "manifest.json")) as f:
            assert json.load(f)["plan"]["verif_rate"] == "low"


class TestErrors:
    """Test class for error reporting."""

    def test_unknown_bias(self, temp_output_dir, capsys):
        """Test that configuration errors exit with status 1."""
        with pytest.raises(SystemExit) as excinfo:
            main(["simulate", "--bias", "selection", "--out", temp_output_dir])
        assert excinfo.value.code == 1
        assert "Error: Unknown bias 'selection'" in capsys.readouterr().err

    def test_missing_inputs(self, temp_output_dir, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["correlate", "--out", os.path.join(temp_output_dir, "empty")])
        assert excinfo.value.code == 1
        assert "Estimates file" in capsys.readouterr().err

    def test_missing_config_file(self, capsys):
        with pytest.raises(SystemExit):
            main(["simulate", "--config", "missing.toml"])
        assert "Config file 'missing.toml' not found" in capsys.readouterr().err
