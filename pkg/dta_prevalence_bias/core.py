"""
Core pipeline: simulate, correlate, fit and report one bias structure.
"""

import logging
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .association import correlation_report, expected_bias_curve
from .config import RunPlan
from .experiment import ScenarioRun, run_scenario
from .formats import (
    read_correlations,
    read_estimates,
    read_json,
    read_meta,
    read_verif,
    write_correlations,
    write_estimates,
    write_json,
    write_meta,
    write_verif,
)
from .image_processor import OverviewPanelRenderer
from .lcbm import FitResult, MetaDataset, fit_lcbm, fit_lcbm_subgroup
from .manifest import MANIFEST_NAME, build_manifest, write_manifest
from .plotting import render_adjusted_scatters, render_estimate_scatters
from .pvb import PvbMetaDataset, fit_pvb
from .report import collect_fits, render_markdown_report, write_report
from .scenarios import BiasStructure
from .tables import TwoByTwoTable, VerificationTable

logger = logging.getLogger(__name__)

ESTIMATES_FILE = "estimates.csv"
META_FILE = "meta.csv"
VERIF_FILE = "verif.csv"
CORRELATIONS_FILE = "correlations.csv"
FIT_FILE = "fit.json"


def _group_by_setup(entries, keep) -> "OrderedDict[str, List[Tuple[int, object]]]":
    grouped: "OrderedDict[str, List[Tuple[int, object]]]" = OrderedDict()
    for study_id, label, table in entries:
        if keep(study_id, table):
            grouped.setdefault(label, []).append((study_id, table))
    return grouped


def meta_datasets(
    entries: Sequence[Tuple[int, str, TwoByTwoTable]],
    by_stratum: bool = False,
    max_studies: Optional[int] = None,
) -> "OrderedDict[str, MetaDataset]":
    """
    Build one MetaDataset per setup from meta-dataset rows.

    Args:
        entries: (study_id, setup, table) rows
        by_stratum: Use per-stratum rows instead of pooled rows
        max_studies: Keep studies with id below this value

    Raises:
        ValueError: If ``by_stratum`` is set and no row carries a stratum
    """
    def keep(study_id, table):
        if max_studies is not None and study_id >= max_studies:
            return False
        # A small study can leave one stratum empty.
        return (table.stratum is not None and table.n > 0) if by_stratum else (table.stratum is None)

    grouped = _group_by_setup(entries, keep)
    if by_stratum and not grouped:
        raise ValueError("Meta-dataset has no stratum labels; subgroup fitting needs stratified data")
    return OrderedDict(
        (label, MetaDataset(tuple(t for _, t in rows), tuple(i for i, _ in rows), label))
        for label, rows in grouped.items()
    )


def pvb_datasets(
    entries: Sequence[Tuple[int, str, VerificationTable]],
    max_studies: Optional[int] = None,
) -> "OrderedDict[str, PvbMetaDataset]":
    """Build one PvbMetaDataset per setup from verification rows."""
    grouped = _group_by_setup(entries, lambda i, _: max_studies is None or i < max_studies)
    return OrderedDict(
        (label, PvbMetaDataset(tuple(t for _, t in rows), tuple(i for i, _ in rows), label))
        for label, rows in grouped.items()
    )


class BiasStudyPipeline:
    """
    Runs the stages of one configured experiment and writes their files.

    This class coordinates the process of:
    1. Simulating every selected setup and writing estimates and study tables
    2. Computing per-setup Spearman correlations
    3. Fitting the latent class model to the leading studies
    4. Drawing figures and writing the report and manifest

    Every stage reads its inputs from the output directory, so stages can be
    run separately from the command line.
    """

    def __init__(self, plan: RunPlan, command: str = ""):
        """
        Initialize the pipeline.

        Args:
            plan: Resolved run plan
            command: Command line recorded in the manifest
        """
        self.plan = plan
        self.command = command
        self.out = Path(plan.out)
        self.panel_renderer = OverviewPanelRenderer()

    @property
    def scenario_ids(self) -> List[str]:
        return [f"{self.plan.structure.value}/{s.label}" for s in self.plan.setups]

    def simulate(self) -> List[Path]:
        """
        Simulate every selected setup.

        Returns:
            Paths of estimates.csv, meta.csv and, for partial verification,
            verif.csv
        """
        plan = self.plan
        runs: List[ScenarioRun] = [
            run_scenario(setup, plan.n_studies, plan.n_subjects, plan.seed, n_jobs=plan.n_jobs)
            for setup in plan.setups
        ]
        estimates = [record for run in runs for record in run.estimates]
        meta_rows = []
        verif_rows = []
        for run in runs:
            label = run.setup.label
            for study_id, tables in enumerate(run.tables):
                meta_rows.append((study_id, label, tables.overall))
                for level in sorted(tables.strata):
                    meta_rows.append((study_id, label, tables.strata[level]))
                if tables.verification is not None:
                    verif_rows.append((study_id, label, tables.verification))

        paths = [
            write_estimates(estimates, self.out / ESTIMATES_FILE),
            write_meta(meta_rows, self.out / META_FILE),
        ]
        if verif_rows:
            paths.append(write_verif(verif_rows, self.out / VERIF_FILE))
        logger.info("Simulated %d studies over %d setup(s)", len(estimates), len(runs))
        self.write_manifest()
        return paths

    def correlate(self) -> Path:
        """Compute correlations from estimates.csv and write correlations.csv."""
        records = read_estimates(self.out / ESTIMATES_FILE)
        reports = correlation_report(records)
        for r in reports:
            logger.info("%s: rho(se, prev)=%s rho(sp, prev)=%s", r.setup_label, r.rho_se_prev, r.rho_sp_prev)
        path = write_correlations(reports, self.out / CORRELATIONS_FILE)
        self.write_manifest()
        return path

    def _fit_datasets(self, max_studies: Optional[int]):
        if self.plan.model == "pvb":
            verif_path = self.out / VERIF_FILE
            if verif_path.exists():
                return pvb_datasets(read_verif(verif_path), max_studies)
            logger.info("No %s; treating every study as fully verified", VERIF_FILE)
            rows = [
                (i, label, VerificationTable.from_two_by_two(t))
                for i, label, t in read_meta(self.out / META_FILE)
                if t.stratum is None
            ]
            return pvb_datasets(rows, max_studies)
        return meta_datasets(read_meta(self.out / META_FILE), self.plan.subgroup, max_studies)

    def fit(self, max_studies: Optional[int] = None) -> Path:
        """
        Fit every setup found in the meta-dataset (or verification) file.

        Args:
            max_studies: Fit only studies with id below this value;
                ``plan.fit_studies`` when None

        Returns:
            Path of fit.json
        """
        plan = self.plan
        if max_studies is None:
            max_studies = plan.fit_studies
        results: Dict[str, dict] = {}
        for label, dataset in self._fit_datasets(max_studies).items():
            if plan.model == "pvb":
                results[label] = fit_pvb(dataset, plan.mcmc, n_jobs=plan.n_jobs).to_dict()
            elif plan.subgroup:
                fits = fit_lcbm_subgroup(dataset, plan.mcmc, n_jobs=plan.n_jobs)
                results[label] = {f"stratum_{level}": fit.to_dict() for level, fit in fits.items()}
            else:
                results[label] = fit_lcbm(dataset, plan.mcmc, n_jobs=plan.n_jobs).to_dict()

        document = {"model": plan.model, "config": plan.to_dict(), "results": results}
        path = write_json(document, self.out / FIT_FILE)
        self.write_manifest()
        return path

    def _curves(self) -> Dict[str, object]:
        if self.plan.structure is not BiasStructure.REFERENCE_STANDARD_ERROR:
            return {}
        curves = {}
        for setup in self.plan.setups:
            grid = np.linspace(setup.prev_low, setup.prev_high, 81)
            curves[setup.label] = expected_bias_curve(setup, grid)
        return curves

    def report(self, png: bool = False) -> List[Path]:
        """
        Draw figures and write report.md / report.html.

        Correlations are recomputed when correlations.csv is absent; adjusted
        figures and the fit table are added when fit.json exists.

        Args:
            png: Also write the raster overview panels

        Returns:
            Paths of every written file
        """
        estimates_path = self.out / ESTIMATES_FILE
        records = read_estimates(estimates_path) if estimates_path.exists() else []
        correlations_path = self.out / CORRELATIONS_FILE
        if correlations_path.exists():
            correlations = read_correlations(correlations_path)
        else:
            correlations = correlation_report(records)

        title = self.plan.structure.value.replace("_", " ").capitalize()
        figures = self.out / "figures"
        paths: List[Path] = []
        if records:
            paths += render_estimate_scatters(records, figures, title, curves=self._curves())
            if png:
                paths += self.panel_renderer.render_panels(records, figures, title=title)

        fits: List[FitResult] = []
        fit_path = self.out / FIT_FILE
        if fit_path.exists():
            fits = collect_fits(read_json(fit_path))
            paths += render_adjusted_scatters(fits, figures)

        text = render_markdown_report(
            title,
            correlations,
            fits,
            figures=[p.relative_to(self.out).as_posix() for p in paths],
            model=self.plan.model if fits else None,
        )
        paths += list(write_report(text, self.out, title=title))
        self.write_manifest()
        return paths

    def run_all(self, png: bool = False) -> List[Path]:
        """
        Run every stage in order and return every file written.
        """
        self.simulate()
        self.correlate()
        self.fit()
        self.report(png=png)
        return self.output_files()

    def output_files(self) -> List[Path]:
        """Every file under the output directory except the manifest."""
        if not self.out.exists():
            return []
        return sorted(p for p in self.out.rglob("*") if p.is_file() and p.name != MANIFEST_NAME)

    def write_manifest(self) -> Path:
        manifest = build_manifest(
            self.out,
            self.output_files(),
            command=self.command,
            seed=self.plan.seed,
            scenarios=self.scenario_ids,
            plan=self.plan.to_dict(),
        )
        return write_manifest(manifest, self.out)
