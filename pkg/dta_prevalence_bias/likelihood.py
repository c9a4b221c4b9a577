"""
Likelihoods of the latent class models.

The target condition is marginalized out, so each study contributes a
multinomial over its four (reference, index) cells, or for two-stage
verification data three binomials. Multinomial and binomial coefficients are
omitted everywhere; they do not depend on any parameter.

Cell order is (reference, index) = (1,1), (1,0), (0,1), (0,0), matching
:meth:`TwoByTwoTable.cell_counts`.
"""

from typing import TYPE_CHECKING, Tuple

import numpy as np
from scipy.special import xlogy

from .association import DegenerateInputError

if TYPE_CHECKING:  # pragma: no cover
    from .lcbm import MetaDataset
    from .pvb import PvbMetaDataset
    from .sampler import LcbmState


def _check_unit_interval(**values) -> None:
    for name, value in values.items():
        arr = np.asarray(value, dtype=float)
        if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _cells(prev, ref_se, ref_sp, index_se, index_sp) -> np.ndarray:
    pos = prev * np.stack([ref_se * index_se, ref_se * (1 - index_se),
                           (1 - ref_se) * index_se, (1 - ref_se) * (1 - index_se)], axis=-1)
    neg = (1 - prev) * np.stack([(1 - ref_sp) * (1 - index_sp), (1 - ref_sp) * index_sp,
                                 ref_sp * (1 - index_sp), ref_sp * index_sp], axis=-1)
    return pos + neg


def cell_probabilities(prev, ref_se, ref_sp, index_se, index_sp) -> np.ndarray:
    """
    Probabilities of the four (reference, index) result cells.

    Arguments broadcast, so per-study arrays give one row per study.

    Args:
        prev: Prevalence of the target condition
        ref_se: Reference standard sensitivity
        ref_sp: Reference standard specificity
        index_se: Index test sensitivity
        index_sp: Index test specificity

    Returns:
        Array with a trailing axis of length 4: (p11, p10, p01, p00)

    Raises:
        ValueError: If any argument is outside [0, 1]
    """
    _check_unit_interval(
        prev=prev, ref_se=ref_se, ref_sp=ref_sp, index_se=index_se, index_sp=index_sp
    )
    return _cells(
        np.asarray(prev, dtype=float),
        np.asarray(ref_se, dtype=float),
        np.asarray(ref_sp, dtype=float),
        np.asarray(index_se, dtype=float),
        np.asarray(index_sp, dtype=float),
    )


def study_log_likelihoods(counts: np.ndarray, prev, ref_se, ref_sp, index_se, index_sp) -> np.ndarray:
    """
    Per-study multinomial log-likelihood of cell counts, without input checks.

    Args:
        counts: Array (n_studies, 4) ordered like :func:`cell_probabilities`
        prev, ref_se, ref_sp, index_se, index_sp: Per-study parameters

    Returns:
        One value per study; -inf where a positive count meets a zero cell
    """
    cells = _cells(prev, ref_se, ref_sp, index_se, index_sp)
    return xlogy(counts, cells).sum(axis=-1)


def log_likelihood(dataset: "MetaDataset", state: "LcbmState") -> float:
    """
    Multinomial log-likelihood of a meta-analysis, constant omitted.

    Args:
        dataset: Study tables
        state: Parameter state with one entry per table

    Returns:
        Sum over studies and cells of ``n * log(p)``; -inf when a cell with a
        positive count has probability zero
    """
    counts = dataset.counts
    if counts.shape[0] != state.prev.shape[0]:
        raise ValueError(
            f"State has {state.prev.shape[0]} studies but the dataset has {counts.shape[0]}"
        )
    return float(
        study_log_likelihoods(
            counts, state.prev, state.ref_se, state.ref_sp, state.index_se, state.index_sp
        ).sum()
    )


def _stage_probs(prev, index_se, index_sp, ref_se, ref_sp) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    p1 = prev * index_se + (1 - prev) * (1 - index_sp)
    with np.errstate(divide="ignore", invalid="ignore"):
        q1 = (prev * index_se * ref_se + (1 - prev) * (1 - index_sp) * (1 - ref_sp)) / p1
        q0 = (prev * (1 - index_se) * ref_se + (1 - prev) * index_sp * (1 - ref_sp)) / (1 - p1)
    return p1, q1, q0


def stage_probs(prev, index_se, index_sp, ref_se, ref_sp) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Stage probabilities of the two-stage verification design.

    Args:
        prev: Prevalence of the target condition
        index_se: Index test sensitivity
        index_sp: Index test specificity
        ref_se: Reference standard sensitivity
        ref_sp: Reference standard specificity

    Returns:
        (p1, q1, q0): P(index positive), P(reference positive | index
        positive) and P(reference positive | index negative)

    Raises:
        ValueError: If any argument is outside [0, 1]
        DegenerateInputError: If P(index positive) is 0 or 1
    """
    _check_unit_interval(
        prev=prev, index_se=index_se, index_sp=index_sp, ref_se=ref_se, ref_sp=ref_sp
    )
    p1, q1, q0 = _stage_probs(
        np.asarray(prev, dtype=float),
        np.asarray(index_se, dtype=float),
        np.asarray(index_sp, dtype=float),
        np.asarray(ref_se, dtype=float),
        np.asarray(ref_sp, dtype=float),
    )
    if np.any((p1 <= 0.0) | (p1 >= 1.0)):
        raise DegenerateInputError(
            f"P(index positive) must lie strictly between 0 and 1, got {p1} "
            f"(prev={prev}, index_se={index_se}, index_sp={index_sp})"
        )
    if p1.ndim == 0:
        return float(p1), float(q1), float(q0)
    return p1, q1, q0


def pvb_study_log_likelihoods(counts: np.ndarray, prev, ref_se, ref_sp, index_se, index_sp) -> np.ndarray:
    """
    Per-study log-likelihood of verification counts, without input checks.

    Args:
        counts: Array (n_studies, 6) of (n_total, n1, v1, v0, x1, x0)
        prev, ref_se, ref_sp, index_se, index_sp: Per-study parameters

    Returns:
        Per-study values; -inf where a positive count meets a zero probability.
        NaN stage probabilities (degenerate p1) are treated the same way.
    """
    p1, q1, q0 = _stage_probs(prev, index_se, index_sp, ref_se, ref_sp)
    n_total, n1, v1, v0, x1, x0 = (counts[:, j] for j in range(6))
    with np.errstate(invalid="ignore"):
        ll = (
            xlogy(n1, p1) + xlogy(n_total - n1, 1 - p1)
            + xlogy(x1, q1) + xlogy(v1 - x1, 1 - q1)
            + xlogy(x0, q0) + xlogy(v0 - x0, 1 - q0)
        )
    return np.where(np.isnan(ll), -np.inf, ll)


def pvb_log_likelihood(dataset: "PvbMetaDataset", state: "LcbmState") -> float:
    """
    Log-likelihood of two-stage verification data, constants omitted.

    Verified counts enter only as binomial denominators; the verification
    mechanism itself contributes nothing.

    Args:
        dataset: Verification tables
        state: Parameter state with one entry per table

    Returns:
        Sum over studies of the three binomial log-likelihood kernels
    """
    counts = dataset.counts
    if counts.shape[0] != state.prev.shape[0]:
        raise ValueError(
            f"State has {state.prev.shape[0]} studies but the dataset has {counts.shape[0]}"
        )
    return float(
        pvb_study_log_likelihoods(
            counts, state.prev, state.ref_se, state.ref_sp, state.index_se, state.index_sp
        ).sum()
    )
