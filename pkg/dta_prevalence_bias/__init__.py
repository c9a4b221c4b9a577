"""
DTA Prevalence Bias - simulate how bias in diagnostic accuracy studies ties
accuracy estimates to prevalence, and remove the tie by latent class meta-analysis.

This package provides functionality to:
1. Simulate meta-analyses under five bias structures (reference standard
   error, spectrum effect, confounding, partial verification, conditional
   dependence)
2. Measure the Spearman association between naive accuracy and prevalence
3. Fit latent class meta-analysis models with a Metropolis-within-Gibbs sampler
4. Write reproducible CSV, JSON, SVG and markdown outputs with a checksum manifest
"""

__version__ = "0.1.0"

from .association import (  # noqa: E402
    CorrelationReport,
    DegenerateInputError,
    analytic_naive_accuracy,
    correlation_report,
    spearman_rho,
)
from .config import ConfigError, RunPlan, parse_config  # noqa: E402
from .core import BiasStudyPipeline  # noqa: E402
from .experiment import run_scenario  # noqa: E402
from .lcbm import FitResult, MetaDataset, fit_lcbm, fit_lcbm_subgroup  # noqa: E402
from .pvb import PvbMetaDataset, fit_pvb  # noqa: E402
from .sampler import McmcConfig, run_chain  # noqa: E402
from .scenarios import BiasStructure, ScenarioSetup, make_scenario_grid  # noqa: E402

__all__ = [
    "BiasStudyPipeline",
    "BiasStructure",
    "ScenarioSetup",
    "make_scenario_grid",
    "run_scenario",
    "CorrelationReport",
    "DegenerateInputError",
    "analytic_naive_accuracy",
    "correlation_report",
    "spearman_rho",
    "ConfigError",
    "RunPlan",
    "parse_config",
    "McmcConfig",
    "run_chain",
    "MetaDataset",
    "FitResult",
    "fit_lcbm",
    "fit_lcbm_subgroup",
    "PvbMetaDataset",
    "fit_pvb",
]
