"""
Convergence diagnostics and posterior summaries.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def gelman_rubin(chains: Sequence[Sequence[float]]) -> Optional[float]:
    """
    Potential scale reduction factor of one scalar parameter.

    The ratio is floored at 1, so chains without between-chain spread
    (identical chains included) give exactly 1.

    Args:
        chains: Equal-length draw sequences, one per chain

    Returns:
        R-hat, at least 1, or None when the within-chain variance is zero

    Raises:
        ValueError: With fewer than 2 chains, chains shorter than 2 draws or
            chains of unequal length
    """
    try:
        draws = np.asarray(chains, dtype=float)
    except ValueError as e:
        raise ValueError(f"Chains must have equal length: {e}")
    if draws.ndim != 2:
        raise ValueError(f"Expected a (chains, draws) array, got shape {draws.shape}")
    m, n = draws.shape
    if m < 2 or n < 2:
        raise ValueError(f"Need at least 2 chains of at least 2 draws, got {m} x {n}")

    within = float(np.mean(np.var(draws, axis=1, ddof=1)))
    if within == 0.0:
        return None
    between = n * float(np.var(np.mean(draws, axis=1), ddof=1))
    pooled = (n - 1) / n * within + between / n
    return max(1.0, math.sqrt(pooled / within))


@dataclass(frozen=True)
class ParameterSummary:
    """Pooled posterior quantiles, mean and R-hat of one parameter."""

    q025: float
    q50: float
    q975: float
    mean: float
    rhat: Optional[float]

    def to_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)


def summarize(chains: Sequence[np.ndarray]) -> ParameterSummary:
    """
    Summarize the draws of one parameter over all chains.

    R-hat is None for a single chain or when every chain is constant.
    """
    draws = np.asarray(chains, dtype=float)
    pooled = draws.reshape(-1)
    q025, q50, q975 = np.quantile(pooled, [0.025, 0.5, 0.975])
    rhat = gelman_rubin(draws) if draws.shape[0] >= 2 and draws.shape[1] >= 2 else None
    return ParameterSummary(
        q025=float(q025),
        q50=float(q50),
        q975=float(q975),
        mean=float(pooled.mean()),
        rhat=rhat,
    )


def is_converged(summaries: Dict[str, ParameterSummary], names: Sequence[str], threshold: float) -> bool:
    """
    True when every named parameter has R-hat at or below ``threshold``.

    A missing R-hat (constant chains, or a single chain) cannot be assessed
    and counts as not converged.
    """
    failed = {}
    for name in names:
        rhat = summaries[name].rhat
        if rhat is None:
            failed[name] = "not assessable"
        elif rhat > threshold:
            failed[name] = f"{rhat:.3f}"
    if failed:
        logger.warning(
            "Not converged (R-hat > %s): %s",
            threshold,
            ", ".join(f"{k}={v}" for k, v in failed.items()),
        )
    return not failed
