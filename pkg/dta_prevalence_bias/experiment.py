"""
Many-study runs of one scenario.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from .scenarios import ScenarioSetup
from .simulation import simulate_study, study_stream
from .tables import EstimateRecord, StudyTables, naive_estimates, tabulate

logger = logging.getLogger(__name__)

# Studies per joblib task.
_CHUNK_SIZE = 500


@dataclass
class ScenarioRun:
    """Output of :func:`run_scenario`, ordered by study id."""

    setup: ScenarioSetup
    estimates: List[EstimateRecord]
    tables: List[StudyTables]

    def __len__(self) -> int:
        return len(self.estimates)

    def head(self, n_studies: int) -> "ScenarioRun":
        """The first ``n_studies`` studies (identical to a smaller run with the same seed)."""
        return ScenarioRun(self.setup, self.estimates[:n_studies], self.tables[:n_studies])


def simulate_one(
    setup: ScenarioSetup, study_id: int, n_subjects: int, master_seed: int
) -> Tuple[EstimateRecord, StudyTables]:
    """Simulate, tabulate and estimate one study on its own stream."""
    rng = study_stream(master_seed, study_id)
    subjects = simulate_study(setup, n_subjects, rng)
    tables = tabulate(subjects)
    return naive_estimates(tables.overall, study_id, setup.label), tables


def _simulate_chunk(
    setup: ScenarioSetup, study_ids: Sequence[int], n_subjects: int, master_seed: int
) -> List[Tuple[EstimateRecord, StudyTables]]:
    return [simulate_one(setup, i, n_subjects, master_seed) for i in study_ids]


def run_scenario(
    setup: ScenarioSetup,
    n_studies: int,
    n_subjects: int,
    master_seed: int,
    n_jobs: Optional[int] = 1,
) -> ScenarioRun:
    """
    Simulate a meta-analysis of ``n_studies`` independent studies.

    Study ``i`` draws from :func:`study_stream(master_seed, i)
    <dta_prevalence_bias.simulation.study_stream>`, so the output does not
    depend on ``n_jobs``.

    Args:
        setup: Scenario to simulate
        n_studies: Number of studies, at least 1
        n_subjects: Subjects per study, at least 1
        master_seed: Run seed
        n_jobs: joblib worker count (1 runs in-process)

    Returns:
        ScenarioRun with estimates and tables ordered by study id

    Raises:
        ValueError: If ``n_studies`` or ``n_subjects`` is below 1
    """
    if n_studies < 1:
        raise ValueError(f"n_studies must be at least 1, got {n_studies}")
    if n_subjects < 1:
        raise ValueError(f"n_subjects must be at least 1, got {n_subjects}")

    logger.info(
        "Simulating %s %s: %d studies x %d subjects (seed %d)",
        setup.structure.value,
        setup.label,
        n_studies,
        n_subjects,
        master_seed,
    )
    chunks = [
        np.arange(start, min(start + _CHUNK_SIZE, n_studies)).tolist()
        for start in range(0, n_studies, _CHUNK_SIZE)
    ]
    if n_jobs == 1 or len(chunks) == 1:
        results = [_simulate_chunk(setup, ids, n_subjects, master_seed) for ids in chunks]
    else:
        results = Parallel(n_jobs=n_jobs)(
            delayed(_simulate_chunk)(setup, ids, n_subjects, master_seed) for ids in chunks
        )

    estimates = []
    tables = []
    for chunk in results:
        for estimate, study_tables in chunk:
            estimates.append(estimate)
            tables.append(study_tables)
    return ScenarioRun(setup=setup, estimates=estimates, tables=tables)
