"""
Deterministic SVG scatter plots of study estimates against prevalence.
"""

import logging
import re
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib import rc_context  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .association import estimates_frame, spearman_rho  # noqa: E402
from .tables import EstimateRecord  # noqa: E402

logger = logging.getLogger(__name__)

# (marker, colour) per setup number.
SETUP_STYLES = {
    1: ("o", "red"),
    2: ("^", "green"),
    3: ("s", "blue"),
    4: ("x", "purple"),
}
MEASURE_LABELS = {"se": "Estimated sensitivity", "sp": "Estimated specificity"}

_SVG_RC = {"svg.hashsalt": "dta-prevalence-bias", "svg.fonttype": "path"}


def setup_slug(label: str) -> str:
    """File-name form of a setup label: ``"Setup 1"`` -> ``"setup1"``."""
    return re.sub(r"[^a-z0-9]+", "", label.lower())


def _setup_number(label: str) -> int:
    match = re.search(r"(\d+)$", label)
    return int(match.group(1)) if match else 1


def render_scatter_svg(
    x: Sequence[float],
    y: Sequence[float],
    path: Union[str, Path],
    title: str,
    ylabel: str,
    xlabel: str = "Estimated prevalence",
    setup_number: int = 1,
    curve: Optional[pd.DataFrame] = None,
    curve_columns: Sequence[str] = ("expected_prev_hat", "expected_se_hat"),
    annotation: Optional[str] = None,
) -> Path:
    """
    Draw one scatter with both axes fixed to [0, 1] and save it as SVG.

    Args:
        x: Prevalence values, one per study
        y: Accuracy values, one per study
        path: Output file
        title: Figure title
        ylabel: Y-axis label
        xlabel: X-axis label
        setup_number: Picks the marker and colour from :data:`SETUP_STYLES`
        curve: Optional expected-value curve drawn as a dashed line
        curve_columns: (x, y) columns of ``curve``
        annotation: Text placed in the upper left corner

    Returns:
        Path of the written SVG; identical inputs give identical bytes
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    marker, colour = SETUP_STYLES.get(setup_number, ("o", "black"))

    with rc_context(_SVG_RC):
        fig = Figure(figsize=(4.5, 4.5))
        ax = fig.add_subplot(1, 1, 1)
        scatter_kw = {"marker": marker, "s": 8, "alpha": 0.5, "linewidths": 0.6}
        if marker == "x":
            scatter_kw["c"] = colour
        else:
            scatter_kw.update(facecolors="none", edgecolors=colour)
        ax.scatter(np.asarray(x, dtype=float), np.asarray(y, dtype=float), **scatter_kw)
        if curve is not None and len(curve):
            cx, cy = curve_columns
            ax.plot(curve[cx], curve[cy], linestyle="--", color="black", linewidth=1.0)
        ax.set_xlim(0.0, 1.0)
        ax.set_ylim(0.0, 1.0)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title, fontsize=10)
        if annotation:
            ax.text(0.03, 0.97, annotation, transform=ax.transAxes, va="top", fontsize=9)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.debug("Wrote %s", path)
    return path


def _rho_text(rho: Optional[float]) -> str:
    return "ρ = n/a" if rho is None else f"ρ = {rho:.3f}"


def render_estimate_scatters(
    records: Iterable[EstimateRecord],
    out_dir: Union[str, Path],
    structure_name: str = "",
    curves: Optional[Dict[str, pd.DataFrame]] = None,
) -> List[Path]:
    """
    One scatter per (setup, se|sp) of naive estimates against naive prevalence.

    Args:
        records: Estimates of one or more setups
        out_dir: Output directory
        structure_name: Prefix of the figure titles
        curves: Expected-bias curves keyed by setup label

    Returns:
        Written paths, ordered by setup then measure
    """
    frame = estimates_frame(records)
    curves = curves or {}
    paths = []
    for label, group in frame.groupby("setup_label", sort=False):
        label = str(label)
        for measure in ("se", "sp"):
            column = f"{measure}_hat"
            complete = group[["prev_hat", column]].dropna()
            rho = spearman_rho(group[column].to_numpy(), group["prev_hat"].to_numpy())
            curve = curves.get(label)
            paths.append(
                render_scatter_svg(
                    complete["prev_hat"],
                    complete[column],
                    Path(out_dir) / f"scatter_{setup_slug(label)}_{measure}.svg",
                    title=f"{structure_name}: {label}".strip(": "),
                    ylabel=MEASURE_LABELS[measure],
                    setup_number=_setup_number(label),
                    curve=curve,
                    curve_columns=("expected_prev_hat", f"expected_{measure}_hat"),
                    annotation=_rho_text(rho),
                )
            )
    return paths


def render_adjusted_scatters(fits: Iterable, out_dir: Union[str, Path]) -> List[Path]:
    """
    Scatters of posterior-median index accuracy against posterior-median prevalence.

    Args:
        fits: FitResult objects
        out_dir: Output directory

    Returns:
        Written paths, two per fit
    """
    paths = []
    for fit in fits:
        suffix = "" if fit.stratum is None else f"_r{fit.stratum}"
        title = f"Adjusted: {fit.label}" + ("" if fit.stratum is None else f" (R={fit.stratum})")
        for measure, column, rho in (
            ("se", "se2_med", fit.adjusted_rho[0]),
            ("sp", "sp2_med", fit.adjusted_rho[1]),
        ):
            paths.append(
                render_scatter_svg(
                    fit.per_study["prev_med"],
                    fit.per_study[column],
                    Path(out_dir) / f"adjusted_{setup_slug(fit.label)}{suffix}_{measure}.svg",
                    title=title,
                    ylabel=f"Posterior median {'sensitivity' if measure == 'se' else 'specificity'}",
                    xlabel="Posterior median prevalence",
                    setup_number=_setup_number(fit.label),
                    annotation=_rho_text(rho),
                )
            )
    return paths
