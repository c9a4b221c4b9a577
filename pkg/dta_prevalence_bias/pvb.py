"""
Latent class meta-analysis of two-stage partial verification studies.

Every subject receives the index test; index-positive subjects are always
verified, index-negative subjects only with some probability. Verification
depends on the index result alone, so the verified counts enter the
likelihood as fixed binomial denominators.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .lcbm import FitResult, fit_result_from_chains, sample_chains
from .likelihood import pvb_study_log_likelihoods
from .priors import HyperPriors
from .sampler import McmcConfig
from .tables import StudyTables, VerificationTable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PvbMetaDataset:
    """
    Verification tables of the studies in one meta-analysis.

    Attributes:
        tables: One VerificationTable per study
        study_ids: Study id of each table; 0..n-1 when omitted
        label: Setup label the studies were generated under
    """

    tables: Tuple[VerificationTable, ...]
    study_ids: Tuple[int, ...] = ()
    label: str = ""
    counts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tables = tuple(self.tables)
        object.__setattr__(self, "tables", tables)
        if len(tables) < 2:
            raise ValueError(f"A meta-analysis needs at least 2 studies, got {len(tables)}")
        empty = [i for i, t in enumerate(tables) if t.n_total == 0]
        if empty:
            raise ValueError(f"Tables {empty[:10]} have no subjects")
        ids = tuple(self.study_ids) or tuple(range(len(tables)))
        if len(ids) != len(tables):
            raise ValueError(f"Got {len(ids)} study ids for {len(tables)} tables")
        object.__setattr__(self, "study_ids", ids)
        object.__setattr__(
            self,
            "counts",
            np.array([(t.n_total, t.n1, t.v1, t.v0, t.x1, t.x0) for t in tables], dtype=float),
        )

    @property
    def n_studies(self) -> int:
        return len(self.tables)

    @classmethod
    def from_study_tables(
        cls,
        study_tables: Sequence[StudyTables],
        study_ids: Optional[Sequence[int]] = None,
        label: str = "",
    ) -> "PvbMetaDataset":
        """
        Collect verification tables; fully verified studies are converted.
        """
        ids = list(study_ids) if study_ids is not None else list(range(len(study_tables)))
        tables = [
            st.verification if st.verification is not None else VerificationTable.from_two_by_two(st.overall)
            for st in study_tables
        ]
        return cls(tables=tuple(tables), study_ids=tuple(ids), label=label)

    def study_log_likelihoods(self, prev, ref_se, ref_sp, index_se, index_sp) -> np.ndarray:
        return pvb_study_log_likelihoods(self.counts, prev, ref_se, ref_sp, index_se, index_sp)

    def initial_estimates(self) -> Dict[str, np.ndarray]:
        """
        Starting values that reweight verified subjects to the whole study.

        Reference-positive counts among index-negatives are scaled up by the
        inverse verification fraction; a 0.5 continuity correction keeps every
        value inside (0, 1).
        """
        n_total, n1, v1, v0, x1, x0 = self.counts.T
        n0 = n_total - n1
        pos_given_index_pos = (x1 + 0.5) / (v1 + 1.0)
        pos_given_index_neg = (x0 + 0.5) / (v0 + 1.0)
        diseased_pos = n1 * pos_given_index_pos
        diseased_neg = n0 * pos_given_index_neg
        diseased = diseased_pos + diseased_neg
        healthy = n_total - diseased
        return {
            "prev": (diseased + 0.5) / (n_total + 1.0),
            "index_se": (diseased_pos + 0.5) / (diseased + 1.0),
            "index_sp": (n0 - diseased_neg + 0.5) / (healthy + 1.0),
            "ref_se": pos_given_index_pos,
            "ref_sp": 1.0 - pos_given_index_neg,
        }


def fit_pvb(
    dataset: PvbMetaDataset,
    config: McmcConfig,
    priors: Optional[HyperPriors] = None,
    n_jobs: Optional[int] = 1,
) -> FitResult:
    """
    Fit the partial verification model.

    Args:
        dataset: Verification tables of at least 2 studies
        config: Sampler settings; pass ``fix_rho=True`` for uncorrelated
            study accuracies (the default of the ``pvb`` model in run plans)
        priors: Hyperpriors; N(0, precision 0.01) means with positive
            specificity means and U(0, 2) standard deviations when None
        n_jobs: joblib workers for the chains

    Returns:
        FitResult with model ``"pvb"``
    """
    priors = priors or HyperPriors.pvb()
    logger.info(
        "Fitting partial verification model to %d studies%s (%d chains x %d iterations)",
        dataset.n_studies,
        f" of {dataset.label}" if dataset.label else "",
        config.n_chains,
        config.n_iters,
    )
    chains = sample_chains(dataset, config, priors, n_jobs)
    return fit_result_from_chains("pvb", dataset, chains, config)
