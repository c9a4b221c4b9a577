"""
Study-level count tables and the naive estimates derived from them.

Cell names of :class:`TwoByTwoTable` read index result first, reference
result second: ``n_pn`` counts index-positive, reference-negative subjects.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Union

import numpy as np

from .simulation import SubjectBatch, SubjectRecord


@dataclass(frozen=True)
class TwoByTwoTable:
    """Index test by reference standard counts of verified subjects."""

    n_pp: int
    n_pn: int
    n_np: int
    n_nn: int
    stratum: Optional[int] = None

    def __post_init__(self):
        for name in ("n_pp", "n_pn", "n_np", "n_nn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.stratum not in (None, 0, 1):
            raise ValueError(f"stratum must be 0, 1 or None, got {self.stratum}")

    @property
    def n(self) -> int:
        return self.n_pp + self.n_pn + self.n_np + self.n_nn

    @property
    def n_ref_pos(self) -> int:
        return self.n_pp + self.n_np

    @property
    def n_ref_neg(self) -> int:
        return self.n_pn + self.n_nn

    def cell_counts(self) -> np.ndarray:
        """Counts ordered like the cell probabilities: (ref, index) = 11, 10, 01, 00."""
        return np.array([self.n_pp, self.n_np, self.n_pn, self.n_nn], dtype=float)


@dataclass(frozen=True)
class VerificationTable:
    """
    Two-stage partial verification counts of one study.

    Attributes:
        n_total: Subjects tested with the index test (N)
        n1: Index-positive subjects (N1)
        v1: Verified index-positive subjects (V1)
        v0: Verified index-negative subjects (V0)
        x1: Reference-positive subjects among the verified index-positives (X1)
        x0: Reference-positive subjects among the verified index-negatives (X0)
    """

    n_total: int
    n1: int
    v1: int
    v0: int
    x1: int
    x0: int

    def __post_init__(self):
        counts = (self.n_total, self.n1, self.v1, self.v0, self.x1, self.x0)
        if min(counts) < 0:
            raise ValueError(f"Verification counts must be non-negative, got {counts}")
        if not (
            self.n1 <= self.n_total
            and self.v1 <= self.n1
            and self.v0 <= self.n_total - self.n1
            and self.x1 <= self.v1
            and self.x0 <= self.v0
        ):
            raise ValueError(f"Inconsistent verification counts: {self}")

    @classmethod
    def from_two_by_two(cls, table: TwoByTwoTable) -> "VerificationTable":
        """Verification table of a fully verified study."""
        n1 = table.n_pp + table.n_pn
        return cls(
            n_total=table.n,
            n1=n1,
            v1=n1,
            v0=table.n - n1,
            x1=table.n_pp,
            x0=table.n_np,
        )


@dataclass(frozen=True)
class EstimateRecord:
    """Naive per-study estimates; None marks a zero denominator."""

    study_id: int
    setup_label: str
    prev_hat: Optional[float]
    se_hat: Optional[float]
    sp_hat: Optional[float]
    n_ref_pos: int
    n_ref_neg: int


@dataclass(frozen=True)
class StudyTables:
    """All tables of one study: pooled, per stratum, and verification."""

    overall: TwoByTwoTable
    strata: Dict[int, TwoByTwoTable] = field(default_factory=dict)
    verification: Optional[VerificationTable] = None


def _count_table(t_index: np.ndarray, t_ref: np.ndarray, stratum: Optional[int] = None) -> TwoByTwoTable:
    idx = t_index.astype(bool)
    ref = t_ref.astype(bool)
    return TwoByTwoTable(
        n_pp=int(np.count_nonzero(idx & ref)),
        n_pn=int(np.count_nonzero(idx & ~ref)),
        n_np=int(np.count_nonzero(~idx & ref)),
        n_nn=int(np.count_nonzero(~idx & ~ref)),
        stratum=stratum,
    )


def tabulate(
    subjects: Union[SubjectBatch, Sequence[SubjectRecord]],
    with_verification: Optional[bool] = None,
) -> StudyTables:
    """
    Aggregate the subjects of one study into count tables.

    Only verified subjects enter the two-by-two tables. The verification
    table counts every subject.

    Args:
        subjects: Subjects of one study
        with_verification: Whether to build the verification table; follows
            the batch's partial-verification flag when None

    Returns:
        StudyTables with per-stratum tables when subjects carry a covariate
    """
    batch = SubjectBatch.from_records(subjects)
    if with_verification is None:
        with_verification = batch.partial_verification

    verified = batch.verified.astype(bool)
    t_index = batch.t_index[verified]
    t_ref = batch.t_ref[verified]

    strata = {}
    if batch.r is not None:
        r = batch.r[verified]
        for level in (0, 1):
            mask = r == level
            strata[level] = _count_table(t_index[mask], t_ref[mask], stratum=level)

    verification = None
    if with_verification:
        positive = batch.t_index.astype(bool)
        ref = batch.t_ref.astype(bool)
        verification = VerificationTable(
            n_total=len(batch),
            n1=int(np.count_nonzero(positive)),
            v1=int(np.count_nonzero(positive & verified)),
            v0=int(np.count_nonzero(~positive & verified)),
            x1=int(np.count_nonzero(positive & verified & ref)),
            x0=int(np.count_nonzero(~positive & verified & ref)),
        )

    return StudyTables(
        overall=_count_table(t_index, t_ref),
        strata=strata,
        verification=verification,
    )


def _ratio(numerator: int, denominator: int) -> Optional[float]:
    if denominator == 0:
        return None
    return numerator / denominator


def naive_estimates(table: TwoByTwoTable, study_id: int, setup_label: str) -> EstimateRecord:
    """
    Estimates a practitioner reports when the reference standard is taken as truth.

    Args:
        table: Two-by-two table of verified subjects
        study_id: Study index
        setup_label: Label of the generating setup

    Returns:
        EstimateRecord with missing values where a denominator is zero
    """
    return EstimateRecord(
        study_id=study_id,
        setup_label=setup_label,
        prev_hat=_ratio(table.n_ref_pos, table.n),
        se_hat=_ratio(table.n_pp, table.n_ref_pos),
        sp_hat=_ratio(table.n_nn, table.n_ref_neg),
        n_ref_pos=table.n_ref_pos,
        n_ref_neg=table.n_ref_neg,
    )
