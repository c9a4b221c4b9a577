"""
Prior distributions of the latent class models.

Study accuracies are logit-normal: each study's (logit Se, logit Sp) pair of
a test is bivariate normal around the test's population mean with standard
deviations (sigma_se, sigma_sp) and correlation rho.
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .sampler import LcbmState

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class HyperPriors:
    """
    Hyperprior settings shared by every test.

    Attributes:
        mu_precision: Precision of the normal prior on each population logit mean
        sigma_prior: ``"half_cauchy"`` or ``"uniform"``
        sigma_scale: Half-Cauchy scale, or the upper bound of the uniform prior
        sp_mean_positive: Truncate the specificity population mean to positive logits
    """

    mu_precision: float = 0.5
    sigma_prior: str = "half_cauchy"
    sigma_scale: float = 16.0
    sp_mean_positive: bool = False

    def __post_init__(self):
        if self.mu_precision <= 0:
            raise ValueError(f"mu_precision must be positive, got {self.mu_precision}")
        if self.sigma_prior not in ("half_cauchy", "uniform"):
            raise ValueError(f"Unknown sigma prior '{self.sigma_prior}'")
        if self.sigma_scale <= 0:
            raise ValueError(f"sigma_scale must be positive, got {self.sigma_scale}")

    @classmethod
    def lcbm(cls) -> "HyperPriors":
        """Bivariate latent class model: N(0, precision 0.5) means, half-Cauchy(16) scales."""
        return cls(mu_precision=0.5, sigma_prior="half_cauchy", sigma_scale=16.0)

    @classmethod
    def pvb(cls) -> "HyperPriors":
        """Verification model: N(0, precision 0.01) means, Sp means > 0, U(0, 2) scales."""
        return cls(
            mu_precision=0.01,
            sigma_prior="uniform",
            sigma_scale=2.0,
            sp_mean_positive=True,
        )

    @property
    def sigma_upper(self) -> float:
        return self.sigma_scale if self.sigma_prior == "uniform" else math.inf


def sigma_log_density(sigma, priors: HyperPriors):
    """
    Log density of a standard deviation under ``priors``.

    The half-Cauchy density is evaluated on sigma >= 0 (so the mode at 0 can be
    inspected); the uniform density on the open interval.
    """
    sigma = np.asarray(sigma, dtype=float)
    if priors.sigma_prior == "half_cauchy":
        s = priors.sigma_scale
        value = math.log(2.0 / (math.pi * s)) - np.log1p((sigma / s) ** 2)
        return np.where(sigma >= 0, value, -np.inf)
    inside = (sigma > 0) & (sigma < priors.sigma_scale)
    return np.where(inside, -math.log(priors.sigma_scale), -np.inf)


def bivariate_normal_logpdf(x_se, x_sp, mu_se, mu_sp, sigma_se, sigma_sp, rho):
    """Log density of (x_se, x_sp) under a bivariate normal; broadcasts over studies."""
    z_se = (x_se - mu_se) / sigma_se
    z_sp = (x_sp - mu_sp) / sigma_sp
    one_minus = 1.0 - rho * rho
    quad = (z_se * z_se - 2.0 * rho * z_se * z_sp + z_sp * z_sp) / one_minus
    return -_LOG_2PI - np.log(sigma_se) - np.log(sigma_sp) - 0.5 * np.log(one_minus) - 0.5 * quad


def log_prior(state: "LcbmState", priors: HyperPriors, enforce_dv_gt_1: bool = False) -> float:
    """
    Joint log prior density of a state, up to a constant.

    Prevalences are Beta(1, 1), study accuracies bivariate normal given the
    hyperparameters, means normal, rho uniform on (-1, 1), sigma per ``priors``.

    Args:
        state: Parameter state
        priors: Hyperprior settings
        enforce_dv_gt_1: Require mean logit Se + mean logit Sp > 0 for each test

    Returns:
        Log density, or -inf outside the support
    """
    prev = state.prev
    if np.any((prev <= 0) | (prev >= 1)):
        return -math.inf
    sigma = state.sigma
    if np.any(sigma <= 0) or np.any(sigma >= priors.sigma_upper):
        return -math.inf
    if np.any(np.abs(state.rho) >= 1):
        return -math.inf
    mu = state.mu
    if priors.sp_mean_positive and np.any(mu[:, 1] <= 0):
        return -math.inf
    if enforce_dv_gt_1 and np.any(mu[:, 0] + mu[:, 1] <= 0):
        return -math.inf

    total = 0.0
    var = 1.0 / priors.mu_precision
    total += float(np.sum(-0.5 * (math.log(2.0 * math.pi * var) + mu * mu / var)))
    total += float(np.sum(sigma_log_density(sigma, priors)))
    for test in range(mu.shape[0]):
        total += float(
            np.sum(
                bivariate_normal_logpdf(
                    state.theta[:, test, 0],
                    state.theta[:, test, 1],
                    mu[test, 0],
                    mu[test, 1],
                    sigma[test, 0],
                    sigma[test, 1],
                    state.rho[test],
                )
            )
        )
    return total
