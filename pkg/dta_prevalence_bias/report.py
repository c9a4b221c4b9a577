"""
Markdown and HTML summaries of a run.
"""

import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import markdown

from .association import CorrelationReport
from .lcbm import FitResult
from .sampler import MONITORED_PARAMETERS

logger = logging.getLogger(__name__)

_SUMMARY_COLUMNS = (
    ("mean_se_index", "Index Se"),
    ("mean_sp_index", "Index Sp"),
    ("mean_se_ref", "Reference Se"),
    ("mean_sp_ref", "Reference Sp"),
)


def _fmt(value: Optional[float], digits: int = 3) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


def correlation_table(reports: Sequence[CorrelationReport]) -> str:
    """Markdown table of per-setup correlations."""
    lines = [
        "| Setup | ρ(Se, prevalence) | Pairs | ρ(Sp, prevalence) | Pairs |",
        "|---|---:|---:|---:|---:|",
    ]
    for r in reports:
        lines.append(
            f"| {r.setup_label} | {_fmt(r.rho_se_prev)} | {r.n_pairs_se} | "
            f"{_fmt(r.rho_sp_prev)} | {r.n_pairs_sp} |"
        )
    return "\n".join(lines)


def fit_table(fits: Sequence[FitResult]) -> str:
    """Markdown table of posterior medians (95% intervals) and diagnostics."""
    header = ["Setup", "Stratum"] + [title for _, title in _SUMMARY_COLUMNS]
    header += ["Max R-hat", "Converged", "Adjusted ρ(Se)", "Adjusted ρ(Sp)"]
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for fit in fits:
        cells = [fit.label, "all" if fit.stratum is None else str(fit.stratum)]
        for name, _ in _SUMMARY_COLUMNS:
            s = fit.summaries[name]
            cells.append(f"{s.q50:.3f} ({s.q025:.3f}, {s.q975:.3f})")
        rhats = [fit.summaries[n].rhat for n in MONITORED_PARAMETERS if fit.summaries[n].rhat is not None]
        cells.append(_fmt(max(rhats)) if rhats else "n/a")
        cells.append("yes" if fit.converged else "**no**")
        cells.extend([_fmt(fit.adjusted_rho[0]), _fmt(fit.adjusted_rho[1])])
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines)


def render_markdown_report(
    title: str,
    correlations: Sequence[CorrelationReport],
    fits: Optional[Sequence[FitResult]] = None,
    figures: Iterable[str] = (),
    model: Optional[str] = None,
) -> str:
    """
    Assemble the run report.

    Args:
        title: Report heading
        correlations: Naive correlations per setup
        fits: Fitted meta-analyses, if any
        figures: Figure file names relative to the report
        model: Model name of the fits

    Returns:
        Markdown text
    """
    parts = [f"# {title}", ""]
    if not correlations:
        logger.warning("No estimates to report")
        parts += ["No estimates to report.", ""]
    else:
        parts += ["## Naive estimates", "", correlation_table(correlations), ""]

    if fits:
        heading = "## Adjusted estimates" + (f" ({model})" if model else "")
        parts += [heading, "", "Posterior median (95% interval) of the population mean accuracy.", ""]
        parts += [fit_table(fits), ""]

    figures = list(figures)
    if figures:
        parts += ["## Figures", ""]
        parts += [f"![{Path(f).stem}]({f})" for f in figures]
        parts.append("")
    return "\n".join(parts)


def markdown_to_html(markdown_text: str, title: str = "Report") -> str:
    """
    Convert the markdown report into a standalone HTML page.

    Args:
        markdown_text: Report in markdown
        title: Page title

    Returns:
        HTML document
    """
    body = markdown.markdown(markdown_text, extensions=["extra"])
    return f"""<!DOCTYPE html>
<html>
<head>
    <meta charset="utf-8">
    <title>{title}</title>
    <style>
        body {{
            font-family: -apple-system, BlinkMacSystemFont, 'Segoe UI', Roboto, sans-serif;
            line-height: 1.6;
            max-width: 1100px;
            margin: 0 auto;
            padding: 40px;
            background: white;
        }}

        h1, h2, h3 {{
            color: #333;
        }}

        table {{
            border-collapse: collapse;
            margin-bottom: 1em;
        }}

        th, td {{
            border: 1px solid #ccc;
            padding: 4px 8px;
        }}

        img {{
            width: 360px;
            margin: 4px;
        }}
    </style>
</head>
<body>
{body}
</body>
</html>
"""


def write_report(
    markdown_text: str, out_dir: Union[str, Path], title: str = "Report"
) -> Tuple[Path, Path]:
    """
    Write ``report.md`` and ``report.html`` into ``out_dir``.

    Returns:
        (markdown path, HTML path)
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    md_path = out_dir / "report.md"
    html_path = out_dir / "report.html"
    md_path.write_text(markdown_text, encoding="utf-8")
    html_path.write_text(markdown_to_html(markdown_text, title), encoding="utf-8")
    return md_path, html_path


def collect_fits(document: dict) -> List[FitResult]:
    """FitResult objects of a fit document, one per setup and stratum."""
    model = document.get("model", "lcbm")
    fits = []
    for block in document.get("results", {}).values():
        if "summaries" in block:
            fits.append(FitResult.from_dict(block, model))
        else:
            fits.extend(FitResult.from_dict(sub, model) for _, sub in sorted(block.items()))
    return fits
