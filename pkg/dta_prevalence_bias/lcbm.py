"""
Latent class bivariate meta-analysis of an index test against an imperfect
reference standard.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .association import spearman_rho
from .diagnostics import ParameterSummary, is_converged, summarize
from .likelihood import study_log_likelihoods
from .priors import HyperPriors
from .sampler import (
    MONITORED_PARAMETERS,
    REPORTED_PARAMETERS,
    SE,
    SP,
    TEST_INDEX,
    TEST_REF,
    ChainSamples,
    McmcConfig,
    run_chain,
)
from .tables import StudyTables, TwoByTwoTable

logger = logging.getLogger(__name__)

PER_STUDY_COLUMNS = ["study_id", "prev_med", "se2_med", "sp2_med", "se1_med", "sp1_med"]


@dataclass(frozen=True)
class MetaDataset:
    """
    Two-by-two tables of the studies in one meta-analysis.

    Tables may carry a stratum label, in which case the same study id can
    appear once per stratum.

    Attributes:
        tables: One table per study (or per study and stratum)
        study_ids: Study id of each table; 0..n-1 when omitted
        label: Setup label the studies were generated under
    """

    tables: Tuple[TwoByTwoTable, ...]
    study_ids: Tuple[int, ...] = ()
    label: str = ""
    counts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tables = tuple(self.tables)
        object.__setattr__(self, "tables", tables)
        if len(tables) < 2:
            raise ValueError(f"A meta-analysis needs at least 2 studies, got {len(tables)}")
        empty = [i for i, t in enumerate(tables) if t.n == 0]
        if empty:
            raise ValueError(f"Tables {empty[:10]} have no verified subjects")
        ids = tuple(self.study_ids) or tuple(range(len(tables)))
        if len(ids) != len(tables):
            raise ValueError(f"Got {len(ids)} study ids for {len(tables)} tables")
        object.__setattr__(self, "study_ids", ids)
        object.__setattr__(self, "counts", np.array([t.cell_counts() for t in tables]))

    @property
    def n_studies(self) -> int:
        return len(self.tables)

    @property
    def strata(self) -> List[Optional[int]]:
        return [t.stratum for t in self.tables]

    @classmethod
    def from_study_tables(
        cls,
        study_tables: Sequence[StudyTables],
        study_ids: Optional[Sequence[int]] = None,
        label: str = "",
        by_stratum: bool = False,
    ) -> "MetaDataset":
        """
        Collect the tables of simulated studies.

        Args:
            study_tables: Tables of each study
            study_ids: Ids of the studies; 0..n-1 when omitted
            label: Setup label
            by_stratum: Use the per-stratum tables (two per study) instead of
                the pooled ones

        Raises:
            ValueError: If ``by_stratum`` is set but the studies carry no strata
        """
        ids = list(study_ids) if study_ids is not None else list(range(len(study_tables)))
        tables: List[TwoByTwoTable] = []
        table_ids: List[int] = []
        for study_id, st in zip(ids, study_tables):
            if by_stratum:
                if not st.strata:
                    raise ValueError(f"Study {study_id} has no stratum labels")
                for level in sorted(st.strata):
                    tables.append(st.strata[level])
                    table_ids.append(study_id)
            else:
                tables.append(st.overall)
                table_ids.append(study_id)
        return cls(tables=tuple(tables), study_ids=tuple(table_ids), label=label)

    def subset(self, mask: Sequence[bool]) -> "MetaDataset":
        """Tables where ``mask`` is true, keeping their study ids."""
        keep = [i for i, flag in enumerate(mask) if flag]
        return MetaDataset(
            tables=tuple(self.tables[i] for i in keep),
            study_ids=tuple(self.study_ids[i] for i in keep),
            label=self.label,
        )

    def study_log_likelihoods(self, prev, ref_se, ref_sp, index_se, index_sp) -> np.ndarray:
        return study_log_likelihoods(self.counts, prev, ref_se, ref_sp, index_se, index_sp)

    def initial_estimates(self) -> Dict[str, np.ndarray]:
        """
        Naive per-study values with a 0.5 continuity correction.

        The index test is scored against the reference standard; the
        reference standard's starting values are its agreement with the
        index test.
        """
        n_pp, n_np, n_pn, n_nn = self.counts.T
        n = n_pp + n_np + n_pn + n_nn
        return {
            "prev": (n_pp + n_np + 0.5) / (n + 1.0),
            "index_se": (n_pp + 0.5) / (n_pp + n_np + 1.0),
            "index_sp": (n_nn + 0.5) / (n_pn + n_nn + 1.0),
            "ref_se": (n_pp + 0.5) / (n_pp + n_pn + 1.0),
            "ref_sp": (n_nn + 0.5) / (n_np + n_nn + 1.0),
        }


@dataclass
class FitResult:
    """
    Posterior summary of one fitted meta-analysis.

    Attributes:
        model: ``"lcbm"`` or ``"pvb"``
        label: Setup label of the data
        summaries: Quantiles, mean and R-hat per reported population parameter
        per_study: Posterior medians per study (see :data:`PER_STUDY_COLUMNS`);
            suffix 2 is the index test, suffix 1 the reference standard
        acceptance: Metropolis acceptance per block, averaged over chains
        converged: Every monitored R-hat is at or below ``rhat_threshold``
        rhat_threshold: Convergence threshold used
        n_draws: Draws kept over all chains
        stratum: Covariate stratum of a subgroup fit
        adjusted_rho: Spearman correlations of posterior-median index Se and
            Sp with posterior-median prevalence
    """

    model: str
    label: str
    summaries: Dict[str, ParameterSummary]
    per_study: pd.DataFrame
    acceptance: Dict[str, float]
    converged: bool
    rhat_threshold: float
    n_draws: int
    stratum: Optional[int] = None
    adjusted_rho: Tuple[Optional[float], Optional[float]] = (None, None)

    def median(self, name: str) -> float:
        return self.summaries[name].q50

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready representation; missing values become None."""
        per_study = [
            {k: (None if pd.isna(v) else (int(v) if k == "study_id" else float(v))) for k, v in row.items()}
            for row in self.per_study.to_dict(orient="records")
        ]
        return {
            "label": self.label,
            "stratum": self.stratum,
            "n_studies": int(len(self.per_study)),
            "n_draws": self.n_draws,
            "converged": self.converged,
            "rhat_threshold": self.rhat_threshold,
            "summaries": {name: s.to_dict() for name, s in self.summaries.items()},
            "per_study": per_study,
            "acceptance": dict(self.acceptance),
            "adjusted_rho": {
                "rho_se_prev": self.adjusted_rho[0],
                "rho_sp_prev": self.adjusted_rho[1],
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], model: str) -> "FitResult":
        per_study = pd.DataFrame(data["per_study"], columns=PER_STUDY_COLUMNS)
        per_study = per_study.astype({c: float for c in PER_STUDY_COLUMNS[1:]})
        rho = data.get("adjusted_rho") or {}
        return cls(
            model=model,
            label=data["label"],
            summaries={name: ParameterSummary(**s) for name, s in data["summaries"].items()},
            per_study=per_study,
            acceptance=dict(data.get("acceptance", {})),
            converged=bool(data["converged"]),
            rhat_threshold=float(data["rhat_threshold"]),
            n_draws=int(data["n_draws"]),
            stratum=data.get("stratum"),
            adjusted_rho=(rho.get("rho_se_prev"), rho.get("rho_sp_prev")),
        )


def sample_chains(
    dataset,
    config: McmcConfig,
    priors: HyperPriors,
    n_jobs: Optional[int] = 1,
) -> List[ChainSamples]:
    """Run ``config.n_chains`` independent chains, in parallel when ``n_jobs`` allows."""
    if n_jobs == 1 or config.n_chains == 1:
        return [run_chain(dataset, config, c, priors) for c in range(config.n_chains)]
    return Parallel(n_jobs=n_jobs)(
        delayed(run_chain)(dataset, config, c, priors) for c in range(config.n_chains)
    )


def fit_result_from_chains(
    model: str,
    dataset,
    chains: Sequence[ChainSamples],
    config: McmcConfig,
    stratum: Optional[int] = None,
) -> FitResult:
    """Pool chains into summaries, per-study medians and diagnostics."""
    summaries = {
        name: summarize([chain.parameter(name) for chain in chains]) for name in REPORTED_PARAMETERS
    }
    converged = is_converged(summaries, MONITORED_PARAMETERS, config.rhat_threshold)

    prev = np.concatenate([c.prev for c in chains])
    accuracy = np.concatenate([c.accuracy for c in chains])
    per_study = pd.DataFrame(
        {
            "study_id": list(dataset.study_ids),
            "prev_med": np.median(prev, axis=0),
            "se2_med": np.median(accuracy[:, :, TEST_INDEX, SE], axis=0),
            "sp2_med": np.median(accuracy[:, :, TEST_INDEX, SP], axis=0),
            "se1_med": np.median(accuracy[:, :, TEST_REF, SE], axis=0),
            "sp1_med": np.median(accuracy[:, :, TEST_REF, SP], axis=0),
        },
        columns=PER_STUDY_COLUMNS,
    )

    blocks = sorted({block for chain in chains for block in chain.acceptance})
    acceptance = {
        block: float(np.mean([c.acceptance[block] for c in chains if block in c.acceptance]))
        for block in blocks
    }
    result = FitResult(
        model=model,
        label=dataset.label,
        summaries=summaries,
        per_study=per_study,
        acceptance=acceptance,
        converged=converged,
        rhat_threshold=config.rhat_threshold,
        n_draws=int(prev.shape[0]),
        stratum=stratum,
    )
    result.adjusted_rho = adjusted_association(result)
    return result


def fit_lcbm(
    dataset: MetaDataset,
    config: McmcConfig,
    priors: Optional[HyperPriors] = None,
    n_jobs: Optional[int] = 1,
    stratum: Optional[int] = None,
) -> FitResult:
    """
    Fit the latent class bivariate model.

    Args:
        dataset: Two-by-two tables of at least 2 studies
        config: Sampler settings
        priors: Hyperpriors; N(0, precision 0.5) means and half-Cauchy(16)
            standard deviations when None
        n_jobs: joblib workers for the chains
        stratum: Stratum recorded on the result of a subgroup fit

    Returns:
        FitResult; non-convergence is flagged, not raised
    """
    priors = priors or HyperPriors.lcbm()
    logger.info(
        "Fitting latent class model to %d studies%s (%d chains x %d iterations)",
        dataset.n_studies,
        f" of {dataset.label}" if dataset.label else "",
        config.n_chains,
        config.n_iters,
    )
    chains = sample_chains(dataset, config, priors, n_jobs)
    return fit_result_from_chains("lcbm", dataset, chains, config, stratum=stratum)


def fit_lcbm_subgroup(
    dataset: MetaDataset,
    config: McmcConfig,
    priors: Optional[HyperPriors] = None,
    n_jobs: Optional[int] = 1,
) -> Dict[int, FitResult]:
    """
    Fit each covariate stratum separately.

    Args:
        dataset: Per-stratum tables (``MetaDataset.from_study_tables(...,
            by_stratum=True)``)
        config: Sampler settings
        priors: Hyperpriors, as in :func:`fit_lcbm`
        n_jobs: joblib workers for the chains

    Returns:
        FitResult per stratum (0 and/or 1); strata with fewer than 2 studies
        are skipped with a warning

    Raises:
        ValueError: If the tables carry no stratum labels
    """
    strata = dataset.strata
    if any(s is None for s in strata):
        raise ValueError("Subgroup fit needs per-stratum tables, but the dataset has no stratum labels")

    results = {}
    for level in sorted(set(strata)):
        mask = [t.stratum == level for t in dataset.tables]
        if sum(mask) < 2:
            logger.warning("Stratum %d has %d studies; skipping its fit", level, sum(mask))
            continue
        stratum_data = dataset.subset(mask)
        results[level] = fit_lcbm(stratum_data, config, priors, n_jobs=n_jobs, stratum=level)
    return results


def adjusted_association(fit: FitResult) -> Tuple[Optional[float], Optional[float]]:
    """
    Spearman correlations after latent class adjustment.

    Returns:
        (rho_se_prev, rho_sp_prev) between posterior-median index accuracy
        and posterior-median prevalence; None when not assessable
    """
    per_study = fit.per_study
    return (
        spearman_rho(per_study["se2_med"].to_numpy(), per_study["prev_med"].to_numpy()),
        spearman_rho(per_study["sp2_med"].to_numpy(), per_study["prev_med"].to_numpy()),
    )
