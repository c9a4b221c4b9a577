"""
Cross-study association between naive accuracy and prevalence estimates.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from .scenarios import ScenarioSetup
from .tables import EstimateRecord

logger = logging.getLogger(__name__)

ESTIMATE_COLUMNS = ["study_id", "setup_label", "prev_hat", "se_hat", "sp_hat"]


class DegenerateInputError(ValueError):
    """A closed-form quantity has a zero denominator for the given inputs."""


@dataclass(frozen=True)
class CorrelationReport:
    """Spearman correlations of one setup; None when not assessable."""

    setup_label: str
    rho_se_prev: Optional[float]
    rho_sp_prev: Optional[float]
    n_pairs_se: int
    n_pairs_sp: int


def _as_float_array(values: Iterable) -> np.ndarray:
    return np.array([np.nan if v is None else v for v in values], dtype=float)


def spearman_rho(x: Sequence, y: Sequence) -> Optional[float]:
    """
    Spearman rank correlation with pairwise deletion of missing values.

    Ties get average ranks; the coefficient is the Pearson correlation of the
    two rank vectors.

    Args:
        x: Values, None or NaN for missing
        y: Values of the same length

    Returns:
        The coefficient, or None with fewer than 2 complete pairs or constant ranks

    Raises:
        ValueError: If ``x`` and ``y`` differ in length
    """
    a = _as_float_array(x)
    b = _as_float_array(y)
    if a.shape != b.shape:
        raise ValueError(f"x and y must have equal length ({a.size} != {b.size})")

    complete = ~(np.isnan(a) | np.isnan(b))
    if np.count_nonzero(complete) < 2:
        return None

    ra = rankdata(a[complete], method="average")
    rb = rankdata(b[complete], method="average")
    ra -= ra.mean()
    rb -= rb.mean()
    denom = math.sqrt(float(np.dot(ra, ra)) * float(np.dot(rb, rb)))
    if denom == 0.0:
        return None
    rho = float(np.dot(ra, rb)) / denom
    return max(-1.0, min(1.0, rho))


def estimates_frame(records: Iterable[EstimateRecord]) -> pd.DataFrame:
    """Estimate records as a DataFrame with NaN for missing values."""
    rows = [
        (r.study_id, r.setup_label, r.prev_hat, r.se_hat, r.sp_hat, r.n_ref_pos, r.n_ref_neg)
        for r in records
    ]
    frame = pd.DataFrame(rows, columns=ESTIMATE_COLUMNS + ["n_ref_pos", "n_ref_neg"])
    for column in ("prev_hat", "se_hat", "sp_hat"):
        frame[column] = frame[column].astype(float)
    return frame


def correlation_report(records: Iterable[EstimateRecord]) -> List[CorrelationReport]:
    """
    Per-setup Spearman correlations of se_hat and sp_hat with prev_hat.

    Args:
        records: Estimates of one or more setups

    Returns:
        One CorrelationReport per setup label, in order of first appearance
    """
    frame = estimates_frame(records)
    reports = []
    for label, group in frame.groupby("setup_label", sort=False):
        prev = group["prev_hat"].to_numpy()
        se = group["se_hat"].to_numpy()
        sp = group["sp_hat"].to_numpy()
        reports.append(
            CorrelationReport(
                setup_label=str(label),
                rho_se_prev=spearman_rho(se, prev),
                rho_sp_prev=spearman_rho(sp, prev),
                n_pairs_se=int(np.count_nonzero(~np.isnan(se) & ~np.isnan(prev))),
                n_pairs_sp=int(np.count_nonzero(~np.isnan(sp) & ~np.isnan(prev))),
            )
        )
        logger.debug("%s: rho_se=%s rho_sp=%s", label, reports[-1].rho_se_prev, reports[-1].rho_sp_prev)
    return reports


def enumerate_joint_outcomes(
    prev: float, ref_se: float, ref_sp: float, index_se: float, index_sp: float
) -> np.ndarray:
    """
    Joint probabilities of (D, T1, T2) under conditional independence given D.

    Returns:
        Array ``p[d, t1, t2]`` of shape (2, 2, 2) summing to 1
    """
    joint = np.zeros((2, 2, 2))
    for d in (0, 1):
        p_d = prev if d else 1.0 - prev
        p_t1 = ref_se if d else 1.0 - ref_sp
        p_t2 = index_se if d else 1.0 - index_sp
        for t1 in (0, 1):
            for t2 in (0, 1):
                joint[d, t1, t2] = (
                    p_d
                    * (p_t1 if t1 else 1.0 - p_t1)
                    * (p_t2 if t2 else 1.0 - p_t2)
                )
    return joint


def analytic_naive_accuracy(
    prev: float, ref_se: float, ref_sp: float, index_se: float, index_sp: float
) -> Tuple[float, float]:
    """
    Expected naive index accuracy when the reference standard is taken as truth.

    The expected naive sensitivity is P(T2=1 | T1=1) and the expected naive
    specificity is P(T2=0 | T1=0).

    Returns:
        (expected_se_hat, expected_sp_hat)

    Raises:
        ValueError: If an argument is outside [0, 1]
        DegenerateInputError: If P(T1=1) or P(T1=0) is zero
    """
    args = dict(prev=prev, ref_se=ref_se, ref_sp=ref_sp, index_se=index_se, index_sp=index_sp)
    for name, value in args.items():
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be a probability in [0, 1], got {value}")

    ref_pos = prev * ref_se + (1.0 - prev) * (1.0 - ref_sp)
    ref_neg = prev * (1.0 - ref_se) + (1.0 - prev) * ref_sp
    if ref_pos == 0.0 or ref_neg == 0.0:
        raise DegenerateInputError(
            f"Naive accuracy is undefined: P(reference positive)={ref_pos}, "
            f"P(reference negative)={ref_neg} for inputs {args}"
        )

    se_hat = (prev * ref_se * index_se + (1.0 - prev) * (1.0 - ref_sp) * (1.0 - index_sp)) / ref_pos
    sp_hat = (prev * (1.0 - ref_se) * (1.0 - index_se) + (1.0 - prev) * ref_sp * index_sp) / ref_neg
    return se_hat, sp_hat


def expected_bias_curve(setup: ScenarioSetup, prevalences: Sequence[float]) -> pd.DataFrame:
    """
    Expected naive estimates over a prevalence grid for an unstratified setup.

    Args:
        setup: Setup with unstratified accuracies
        prevalences: True prevalence values

    Returns:
        DataFrame with columns prev, expected_prev_hat, expected_se_hat,
        expected_sp_hat; the apparent prevalence is P(T1=1)

    Raises:
        ValueError: If the setup has stratified accuracies
    """
    if setup.structure.uses_covariate:
        raise ValueError(f"No closed-form curve for stratified structure {setup.structure.value}")
    ref_se, ref_sp = setup.ref_se[0], setup.ref_sp[0]
    index_se, index_sp = setup.index_se[0], setup.index_sp[0]
    rows = []
    for prev in prevalences:
        se_hat, sp_hat = analytic_naive_accuracy(prev, ref_se, ref_sp, index_se, index_sp)
        apparent = prev * ref_se + (1.0 - prev) * (1.0 - ref_sp)
        rows.append((prev, apparent, se_hat, sp_hat))
    return pd.DataFrame(rows, columns=["prev", "expected_prev_hat", "expected_se_hat", "expected_sp_hat"])


def scatter_export(records: Iterable[EstimateRecord]) -> pd.DataFrame:
    """
    One row per study for scatter plots: study_id, setup_label, prev_hat, se_hat, sp_hat.

    Missing values are NaN here and become empty fields when written to CSV.
    """
    return estimates_frame(records)[ESTIMATE_COLUMNS].reset_index(drop=True)


def records_from_frame(frame: pd.DataFrame) -> List[EstimateRecord]:
    """Inverse of :func:`estimates_frame`; count columns default to 0 when absent."""

    def value(v):
        return None if pd.isna(v) else float(v)

    records = []
    for row in frame.itertuples(index=False):
        records.append(
            EstimateRecord(
                study_id=int(row.study_id),
                setup_label=str(row.setup_label),
                prev_hat=value(row.prev_hat),
                se_hat=value(row.se_hat),
                sp_hat=value(row.sp_hat),
                n_ref_pos=int(getattr(row, "n_ref_pos", 0)),
                n_ref_neg=int(getattr(row, "n_ref_neg", 0)),
            )
        )
    return records
