"""
Tests for figures and the markdown/HTML report.
"""

import os

import pandas as pd
import pytest
from PIL import Image

from dta_prevalence_bias.association import CorrelationReport, expected_bias_curve
from dta_prevalence_bias.diagnostics import ParameterSummary
from dta_prevalence_bias.image_processor import OverviewPanelRenderer
from dta_prevalence_bias.lcbm import PER_STUDY_COLUMNS, FitResult
from dta_prevalence_bias.plotting import (
    render_adjusted_scatters,
    render_estimate_scatters,
    setup_slug,
)
from dta_prevalence_bias.report import (
    collect_fits,
    correlation_table,
    fit_table,
    markdown_to_html,
    render_markdown_report,
    write_report,
)
from dta_prevalence_bias.sampler import REPORTED_PARAMETERS
from dta_prevalence_bias.tables import EstimateRecord


def _fit(label="Setup 1", stratum=None, rhat=1.01, converged=True):
    summaries = {name: ParameterSummary(0.85, 0.9, 0.95, 0.9, rhat) for name in REPORTED_PARAMETERS}
    per_study = pd.DataFrame(
        [[0, 0.2, 0.88, 0.91, 0.7, 0.95], [1, 0.6, 0.9, 0.89, 0.72, 0.94], [2, 0.4, 0.91, 0.9, 0.69, 0.96]],
        columns=PER_STUDY_COLUMNS,
    )
    return FitResult(
        model="lcbm",
        label=label,
        summaries=summaries,
        per_study=per_study,
        acceptance={"prev": 0.44},
        converged=converged,
        rhat_threshold=1.1,
        n_draws=300,
        stratum=stratum,
        adjusted_rho=(0.5, -0.5),
    )


def _records():
    return [
        EstimateRecord(i, label, 0.1 + 0.08 * i, 0.7 + 0.02 * i, 0.95 - 0.03 * i, 10, 10)
        for label in ("Setup 1", "Setup 2")
        for i in range(10)
    ]


class TestScatterFigures:
    """Test class for the SVG scatter plots."""

    def test_setup_slug(self):
        assert setup_slug("Setup 1") == "setup1"

    def test_estimate_scatters(self, temp_output_dir, rseb_setups):
        curves = {"Setup 1": expected_bias_curve(rseb_setups[0], [0.1, 0.5, 0.9])}
        paths = render_estimate_scatters(_records(), temp_output_dir, "Reference standard error", curves)
        names = [os.path.basename(p) for p in paths]
        assert names == [
            "scatter_setup1_se.svg",
            "scatter_setup1_sp.svg",
            "scatter_setup2_se.svg",
            "scatter_setup2_sp.svg",
        ]
        with open(paths[0], encoding="utf-8") as f:
            assert "<svg" in f.read()

    def test_svg_is_byte_stable(self, temp_output_dir):
        first = render_estimate_scatters(_records(), os.path.join(temp_output_dir, "a"))
        second = render_estimate_scatters(_records(), os.path.join(temp_output_dir, "b"))
        for a, b in zip(first, second):
            with open(a, "rb") as fa, open(b, "rb") as fb:
                assert fa.read() == fb.read()

    def test_adjusted_scatters(self, temp_output_dir):
        paths = render_adjusted_scatters([_fit(), _fit("Setup 2", stratum=1)], temp_output_dir)
        names = [os.path.basename(p) for p in paths]
        assert names == [
            "adjusted_setup1_se.svg",
            "adjusted_setup1_sp.svg",
            "adjusted_setup2_r1_se.svg",
            "adjusted_setup2_r1_sp.svg",
        ]


class TestOverviewPanels:
    """Test class for OverviewPanelRenderer."""

    def test_panels(self, temp_output_dir):
        renderer = OverviewPanelRenderer(size=400, margin=50)
        paths = renderer.render_panels(_records(), temp_output_dir, title="Reference standard error")
        assert [os.path.basename(p) for p in paths] == ["overview_se.png", "overview_sp.png"]
        with Image.open(paths[0]) as image:
            assert image.size == (400, 400)
            # Setup 1 markers are red.
            assert (220, 0, 0) in {color for _, color in image.getcolors(maxcolors=100000)}

    def test_invalid_measure(self, temp_output_dir):
        with pytest.raises(ValueError, match="measure must be"):
            OverviewPanelRenderer().render(_records(), "ppv", os.path.join(temp_output_dir, "x.png"))


class TestMarkdownReport:
    """Test class for the markdown and HTML report."""

    def test_correlation_table(self):
        table = correlation_table([CorrelationReport("Setup 1", 0.87, -0.975, 100, 100)])
        assert "| Setup 1 | 0.870 | 100 | -0.975 | 100 |" in table

    def test_fit_table_flags_non_convergence(self):
        table = fit_table([_fit(), _fit("Setup 2", rhat=1.4, converged=False)])
        assert "0.900 (0.850, 0.950)" in table
        assert "**no**" in table
        assert "1.400" in table

    def test_full_report(self, temp_output_dir):
        text = render_markdown_report(
            "Reference standard error",
            [CorrelationReport("Setup 1", 0.87, -0.975, 100, 100)],
            [_fit()],
            figures=["figures/scatter_setup1_se.svg"],
            model="lcbm",
        )
        assert text.startswith("# Reference standard error")
        assert "## Adjusted estimates (lcbm)" in text
        assert "![scatter_setup1_se](figures/scatter_setup1_se.svg)" in text
        md_path, html_path = write_report(text, temp_output_dir, title="RSE")
        with open(html_path, encoding="utf-8") as f:
            html = f.read()
        assert "<title>RSE</title>" in html
        assert "<table>" in html
        assert os.path.basename(md_path) == "report.md"

    def test_empty_report(self, caplog):
        text = render_markdown_report("Confounding", [])
        assert "No estimates to report." in text
        assert "No estimates to report" in caplog.text

    def test_markdown_to_html(self):
        html = markdown_to_html("# Title\n\nSome **bold** text", "Page")
        assert "<h1>Title</h1>" in html
        assert "<strong>bold</strong>" in html


class TestCollectFits:
    """Test class for collect_fits."""

    def test_pooled_and_stratified_blocks(self):
        document = {
            "model": "lcbm",
            "results": {
                "Setup 1": _fit().to_dict(),
                "Setup 2": {"stratum_1": _fit("Setup 2", 1).to_dict(), "stratum_0": _fit("Setup 2", 0).to_dict()},
            },
        }
        fits = collect_fits(document)
        assert [(f.label, f.stratum) for f in fits] == [("Setup 1", None), ("Setup 2", 0), ("Setup 2", 1)]
        assert fits[0].adjusted_rho == (0.5, -0.5)
