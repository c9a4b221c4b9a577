"""
Subject-level data generation for one simulated study.

Draw order inside a study is fixed: study parameters first, then for each
subject the covariate R (if used), the target condition D, the reference
result T1, the index result T2 and finally the verification flag V. T1 and T2
are conditionally independent given (D, R).
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Union, overload

import numpy as np

from .scenarios import BiasStructure, ScenarioSetup

logger = logging.getLogger(__name__)


def study_stream(master_seed: int, study_id: int) -> np.random.Generator:
    """
    Independent random stream for one study.

    The stream is ``default_rng(SeedSequence(entropy=master_seed,
    spawn_key=(study_id,)))``, so study ``i`` sees the same numbers no matter
    which worker simulates it or in which order.

    Args:
        master_seed: Non-negative run seed
        study_id: Zero-based study index

    Returns:
        A seeded numpy Generator
    """
    if master_seed < 0 or study_id < 0:
        raise ValueError(
            f"Seeds and study ids must be non-negative (seed={master_seed}, study={study_id})"
        )
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(study_id,))
    )


@dataclass(frozen=True)
class StudyParams:
    """
    Study-level parameters drawn once per study.

    Attributes:
        prevalence: Target condition prevalence (marginal over R for confounding)
        prevalence_r1: Prevalence among R=1 subjects (confounding only)
        prevalence_r0: Prevalence among R=0 subjects (confounding only)
        covariate_rate: P(R=1) in the study (structures with R only)
        verif_rate: Verification probability of index-negative subjects
            (partial verification only)
    """

    prevalence: float
    prevalence_r1: Optional[float] = None
    prevalence_r0: Optional[float] = None
    covariate_rate: Optional[float] = None
    verif_rate: Optional[float] = None

    def prevalence_for(self, r):
        """Prevalence that applies to subjects with covariate value(s) ``r``."""
        if self.prevalence_r1 is None:
            return self.prevalence
        return np.where(np.asarray(r) == 1, self.prevalence_r1, self.prevalence_r0)


@dataclass(frozen=True)
class SubjectRecord:
    """
    One simulated subject.

    Attributes:
        d: Target condition (1 present, 0 absent)
        r: Covariate value, None when the structure has no covariate
        t_ref: Reference standard result, None when the subject is unverified
        t_index: Index test result
        verified: 1 when the subject received the reference standard
    """

    d: int
    r: Optional[int]
    t_ref: Optional[int]
    t_index: int
    verified: int

    def __post_init__(self):
        if (self.t_ref is None) != (self.verified == 0):
            raise ValueError(
                f"t_ref must be recorded exactly when the subject is verified "
                f"(t_ref={self.t_ref}, verified={self.verified})"
            )


@dataclass(eq=False)
class SubjectBatch(Sequence):
    """
    Column-oriented subjects of one study.

    Behaves as a read-only sequence of :class:`SubjectRecord`; the arrays are
    what the tabulation and estimation code actually consume.

    Attributes:
        d: Target condition per subject
        t_ref: Reference result per subject (meaningful where ``verified``)
        t_index: Index result per subject
        verified: Verification flag per subject
        r: Covariate per subject, or None
        partial_verification: True when generated under partial verification
    """

    d: np.ndarray
    t_ref: np.ndarray
    t_index: np.ndarray
    verified: np.ndarray
    r: Optional[np.ndarray] = None
    partial_verification: bool = False

    def __len__(self) -> int:
        return int(self.d.shape[0])

    @overload
    def __getitem__(self, index: int) -> SubjectRecord: ...

    @overload
    def __getitem__(self, index: slice) -> List[SubjectRecord]: ...

    def __getitem__(self, index: Union[int, slice]):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        verified = int(self.verified[index])
        return SubjectRecord(
            d=int(self.d[index]),
            r=None if self.r is None else int(self.r[index]),
            t_ref=int(self.t_ref[index]) if verified else None,
            t_index=int(self.t_index[index]),
            verified=verified,
        )

    def __iter__(self) -> Iterator[SubjectRecord]:
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def from_records(
        cls, records: Sequence[SubjectRecord], partial_verification: Optional[bool] = None
    ) -> "SubjectBatch":
        """
        Build a batch from individual records.

        Args:
            records: Subject records of one study
            partial_verification: Whether the study used partial verification;
                inferred from the presence of unverified subjects when None
        """
        if isinstance(records, SubjectBatch):
            return records
        records = list(records)
        has_r = any(rec.r is not None for rec in records)
        if has_r and any(rec.r is None for rec in records):
            raise ValueError("Either every subject or no subject must carry a covariate")
        if partial_verification is None:
            partial_verification = any(rec.verified == 0 for rec in records)
        as_int = lambda values: np.asarray(values, dtype=np.int8).reshape(-1)  # noqa: E731
        return cls(
            d=as_int([rec.d for rec in records]),
            t_ref=as_int([rec.t_ref if rec.t_ref is not None else 0 for rec in records]),
            t_index=as_int([rec.t_index for rec in records]),
            verified=as_int([rec.verified for rec in records]),
            r=as_int([rec.r for rec in records]) if has_r else None,
            partial_verification=partial_verification,
        )


def draw_study_params(setup: ScenarioSetup, rng: np.random.Generator) -> StudyParams:
    """
    Draw the study-level parameters of one study.

    Args:
        setup: Scenario the study belongs to
        rng: Seeded random stream of the study

    Returns:
        StudyParams with the fields used by ``setup.structure`` populated
    """
    structure = setup.structure
    covariate_rate = None
    prevalence_r1 = prevalence_r0 = None
    verif_rate = None

    if structure.uses_covariate:
        covariate_rate = float(rng.beta(1.0, 1.0))

    if structure is BiasStructure.CONFOUNDING:
        prevalence_r1 = float(rng.uniform(setup.prev_low_r1, setup.prev_high_r1))
        prevalence_r0 = float(rng.uniform(setup.prev_low_r0, setup.prev_high_r0))
        prevalence = covariate_rate * prevalence_r1 + (1.0 - covariate_rate) * prevalence_r0
    else:
        prevalence = float(rng.uniform(setup.prev_low, setup.prev_high))

    if structure.uses_verification:
        verif_rate = float(rng.uniform(setup.verif_low, setup.verif_high))

    return StudyParams(
        prevalence=prevalence,
        prevalence_r1=prevalence_r1,
        prevalence_r0=prevalence_r0,
        covariate_rate=covariate_rate,
        verif_rate=verif_rate,
    )


def simulate_subject(
    params: StudyParams, setup: ScenarioSetup, rng: np.random.Generator
) -> SubjectRecord:
    """
    Draw one subject.

    Args:
        params: Study parameters drawn from ``setup``
        setup: Scenario of the study
        rng: Random stream of the study

    Returns:
        A SubjectRecord; T1 is recorded only when the subject is verified
    """
    r = None
    if setup.structure.uses_covariate:
        r = int(rng.random() < params.covariate_rate)

    d = int(rng.random() < float(params.prevalence_for(r)))
    t_ref = _draw_result(rng.random(), d, setup, "ref", r)
    t_index = _draw_result(rng.random(), d, setup, "index", r)

    verified = 1
    if setup.structure.uses_verification and t_index == 0:
        verified = int(rng.random() < params.verif_rate)

    return SubjectRecord(
        d=d,
        r=r,
        t_ref=t_ref if verified else None,
        t_index=t_index,
        verified=verified,
    )


def _draw_result(u: float, d: int, setup: ScenarioSetup, test: str, r) -> int:
    se = float(setup.accuracy(f"{test}_se", r))
    sp = float(setup.accuracy(f"{test}_sp", r))
    p_positive = se if d == 1 else 1.0 - sp
    return int(u < p_positive)


def simulate_study(
    setup: ScenarioSetup, n_subjects: int, rng: np.random.Generator
) -> SubjectBatch:
    """
    Simulate every subject of one study.

    One StudyParams is drawn, then ``n_subjects`` independent subjects. The
    draw order matches :func:`simulate_subject` but each variable is drawn
    for the whole study at once.

    Args:
        setup: Scenario of the study
        n_subjects: Number of subjects, at least 1
        rng: Random stream of the study

    Returns:
        The subjects as a SubjectBatch (a sequence of SubjectRecord)

    Raises:
        ValueError: If ``n_subjects`` is below 1
    """
    if n_subjects < 1:
        raise ValueError(f"n_subjects must be at least 1, got {n_subjects}")

    params = draw_study_params(setup, rng)
    structure = setup.structure

    r = None
    if structure.uses_covariate:
        r = (rng.random(n_subjects) < params.covariate_rate).astype(np.int8)

    d = (rng.random(n_subjects) < params.prevalence_for(r)).astype(np.int8)
    t_ref = _draw_results(rng.random(n_subjects), d, setup, "ref", r)
    t_index = _draw_results(rng.random(n_subjects), d, setup, "index", r)

    if structure.uses_verification:
        coin = rng.random(n_subjects) < params.verif_rate
        verified = ((t_index == 1) | coin).astype(np.int8)
    else:
        verified = np.ones(n_subjects, dtype=np.int8)

    return SubjectBatch(
        d=d,
        t_ref=t_ref,
        t_index=t_index,
        verified=verified,
        r=r,
        partial_verification=structure.uses_verification,
    )


def _draw_results(u: np.ndarray, d: np.ndarray, setup: ScenarioSetup, test: str, r) -> np.ndarray:
    se = setup.accuracy(f"{test}_se", r)
    sp = setup.accuracy(f"{test}_sp", r)
    p_positive = np.where(d == 1, se, 1.0 - sp)
    return (u < p_positive).astype(np.int8)
