"""
Run configuration: TOML files resolved into a :class:`RunPlan`.

A configuration has three optional tables. ``[run]`` selects the bias
structure, setups, study counts, seed, worker count and output directory.
``[grid]`` overrides scenario parameters on every selected setup. ``[mcmc]``
holds the fitting settings. Unknown keys are errors. Command-line values are
merged into the same mapping before validation, so both routes share one set
of checks.
"""

import logging
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from .scenarios import VERIFICATION_RATES, BiasStructure, ScenarioSetup, make_scenario_grid, select_setups
from .sampler import McmcConfig

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

logger = logging.getLogger(__name__)

MODELS = ("lcbm", "pvb")

_RUN_KEYS = {"bias", "setups", "studies", "subjects", "seed", "jobs", "out"}
_GRID_KEYS = {
    "verif_rate",
    "verif_low",
    "verif_high",
    "prev_low",
    "prev_high",
    "prev_low_r1",
    "prev_high_r1",
    "prev_low_r0",
    "prev_high_r0",
    "ref_se",
    "ref_sp",
    "index_se",
    "index_sp",
}
_MCMC_KEYS = {
    "model",
    "subgroup",
    "chains",
    "iters",
    "burnin",
    "thin",
    "adapt_window",
    "enforce_dv_gt_1",
    "fix_rho",
    "fit_studies",
    "rhat_threshold",
}
_TABLES = {"run": _RUN_KEYS, "grid": _GRID_KEYS, "mcmc": _MCMC_KEYS}
_ACCURACY_KEYS = ("ref_se", "ref_sp", "index_se", "index_sp")


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass(frozen=True)
class RunPlan:
    """
    Fully resolved run.

    Attributes:
        structure: Bias structure to simulate
        setups: Selected setups with grid overrides applied
        n_studies: Studies per setup
        n_subjects: Subjects per study
        seed: Master seed of simulation and sampling
        n_jobs: joblib worker count
        out: Output directory
        model: ``"lcbm"`` or ``"pvb"``
        subgroup: Fit each covariate stratum separately
        mcmc: Sampler settings (seeded with ``seed``)
        fit_studies: Leading studies of each setup that ``fit`` uses
        verif_rate: Verification preset name, or None with explicit bounds
    """

    structure: BiasStructure
    setups: List[ScenarioSetup]
    n_studies: int = 10000
    n_subjects: int = 500
    seed: int = 20240601
    n_jobs: int = 1
    out: Path = Path("results")
    model: str = "lcbm"
    subgroup: bool = False
    mcmc: McmcConfig = McmcConfig()
    fit_studies: int = 100
    verif_rate: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        """Plain representation for manifests and fit documents."""
        mcmc = self.mcmc
        return {
            "bias": self.structure.value,
            "setups": [s.number for s in self.setups],
            "studies": self.n_studies,
            "subjects": self.n_subjects,
            "seed": self.seed,
            "verif_rate": self.verif_rate,
            "model": self.model,
            "subgroup": self.subgroup,
            "chains": mcmc.n_chains,
            "iters": mcmc.n_iters,
            "burnin": mcmc.n_burnin,
            "thin": mcmc.thin,
            "adapt_window": mcmc.adapt_window,
            "enforce_dv_gt_1": mcmc.enforce_dv_gt_1,
            "fix_rho": mcmc.fix_rho,
            "fit_studies": self.fit_studies,
            "rhat_threshold": mcmc.rhat_threshold,
        }


def load_config(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a TOML configuration file into a nested mapping.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigError: If the file is not valid TOML; the message names the line
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file '{path}' not found")
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        match = re.search(r"line (\d+)", str(e))
        where = f" at line {match.group(1)}" if match else ""
        raise ConfigError(f"Invalid TOML in '{path}'{where}: {e}") from e


def merge_overrides(data: Mapping[str, Any], overrides: Mapping[str, Mapping[str, Any]]) -> Dict[str, Any]:
    """Overlay non-None override values table by table."""
    merged = {table: dict(values) for table, values in data.items()}
    for table, values in overrides.items():
        for key, value in values.items():
            if value is not None:
                merged.setdefault(table, {})[key] = value
    return merged


def _check_keys(data: Mapping[str, Any]) -> None:
    for table, values in data.items():
        if table not in _TABLES:
            raise ConfigError(f"Unknown config table [{table}]; expected one of: {', '.join(_TABLES)}")
        if not isinstance(values, Mapping):
            raise ConfigError(f"[{table}] must be a table")
        unknown = sorted(set(values) - _TABLES[table])
        if unknown:
            raise ConfigError(f"Unknown key(s) in [{table}]: {', '.join(unknown)}")


def _get(table: Mapping[str, Any], name: str, key: str, kind, default):
    value = table.get(key, default)
    if value is None:
        return None
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if (kind is int and isinstance(value, bool)) or not isinstance(value, kind):
        raise ConfigError(f"[{name}] {key} must be of type {kind.__name__}, got {value!r}")
    return value


def _grid_overrides(grid: Mapping[str, Any], structure: BiasStructure) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    preset = _get(grid, "grid", "verif_rate", str, None)
    if preset is not None:
        if preset not in VERIFICATION_RATES:
            raise ConfigError(
                f"Unknown verification rate '{preset}'; expected one of: {', '.join(VERIFICATION_RATES)}"
            )
        overrides["verif_low"], overrides["verif_high"] = VERIFICATION_RATES[preset]
    for key in sorted(_GRID_KEYS - {"verif_rate"} - set(_ACCURACY_KEYS)):
        if key in grid:
            overrides[key] = _get(grid, "grid", key, float, None)
    for key in _ACCURACY_KEYS:
        if key in grid:
            values = grid[key]
            if not isinstance(values, list) or not all(isinstance(v, (int, float)) for v in values):
                raise ConfigError(f"[grid] {key} must be a list of numbers, got {values!r}")
            overrides[key] = tuple(float(v) for v in values)
    if (overrides.keys() & {"verif_low", "verif_high"}) and not structure.uses_verification:
        raise ConfigError(f"Verification bounds do not apply to {structure.value}")
    return overrides


def build_plan(data: Mapping[str, Any]) -> RunPlan:
    """
    Validate a configuration mapping and resolve it into a RunPlan.

    Args:
        data: Mapping with optional ``run``, ``grid`` and ``mcmc`` tables

    Returns:
        The resolved plan; missing values take their defaults

    Raises:
        ConfigError: On unknown tables or keys, wrong types, unknown bias or
            model names, or setups that fail validation
    """
    _check_keys(data)
    run = data.get("run", {})
    grid = data.get("grid", {})
    mcmc = data.get("mcmc", {})

    try:
        structure = BiasStructure.from_name(_get(run, "run", "bias", str, "reference_standard_error"))
    except ValueError as e:
        raise ConfigError(str(e)) from e

    overrides = _grid_overrides(grid, structure)
    try:
        setups = make_scenario_grid(structure)
        if overrides:
            setups = [s.with_overrides(**overrides) for s in setups]
        numbers = run.get("setups", "all")
        if numbers != "all":
            if not isinstance(numbers, list) or not all(isinstance(n, int) for n in numbers):
                raise ConfigError(f"[run] setups must be \"all\" or a list of integers, got {numbers!r}")
            setups = select_setups(setups, numbers)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from e

    model = _get(mcmc, "mcmc", "model", str, "pvb" if structure.uses_verification else "lcbm")
    if model not in MODELS:
        raise ConfigError(f"Unknown model '{model}'; expected one of: {', '.join(MODELS)}")
    subgroup = _get(mcmc, "mcmc", "subgroup", bool, structure.uses_covariate)
    if subgroup and not structure.uses_covariate:
        raise ConfigError(f"Subgroup fitting needs a covariate; {structure.value} has none")
    if subgroup and model == "pvb":
        raise ConfigError("Subgroup fitting is only available for the lcbm model")
    fix_rho = _get(mcmc, "mcmc", "fix_rho", bool, None)
    if fix_rho is None:
        fix_rho = model == "pvb"

    n_studies = _get(run, "run", "studies", int, 10000)
    n_subjects = _get(run, "run", "subjects", int, 500)
    seed = _get(run, "run", "seed", int, 20240601)
    n_jobs = _get(run, "run", "jobs", int, 1)
    fit_studies = _get(mcmc, "mcmc", "fit_studies", int, 100)
    for key, value, low in (
        ("studies", n_studies, 1),
        ("subjects", n_subjects, 1),
        ("seed", seed, 0),
        ("fit_studies", fit_studies, 2),
    ):
        if value < low:
            raise ConfigError(f"{key} must be at least {low}, got {value}")
    if n_jobs == 0:
        raise ConfigError("jobs must be non-zero (negative values count back from all cores)")

    try:
        mcmc_config = McmcConfig(
            n_chains=_get(mcmc, "mcmc", "chains", int, 3),
            n_iters=_get(mcmc, "mcmc", "iters", int, 50000),
            n_burnin=_get(mcmc, "mcmc", "burnin", int, 25000),
            thin=_get(mcmc, "mcmc", "thin", int, 5),
            adapt_window=_get(mcmc, "mcmc", "adapt_window", int, 100),
            seed=seed,
            enforce_dv_gt_1=_get(mcmc, "mcmc", "enforce_dv_gt_1", bool, True),
            fix_rho=fix_rho,
            rhat_threshold=_get(mcmc, "mcmc", "rhat_threshold", float, 1.1),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e

    return RunPlan(
        structure=structure,
        setups=setups,
        n_studies=n_studies,
        n_subjects=n_subjects,
        seed=seed,
        n_jobs=n_jobs,
        out=Path(_get(run, "run", "out", str, "results")),
        model=model,
        subgroup=subgroup,
        mcmc=mcmc_config,
        fit_studies=fit_studies,
        verif_rate=_verification_preset(grid, structure),
    )


def _verification_preset(grid: Mapping[str, Any], structure: BiasStructure) -> Optional[str]:
    if not structure.uses_verification or grid.keys() & {"verif_low", "verif_high"}:
        return None
    return grid.get("verif_rate", "default")


def parse_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Mapping[str, Any]]] = None,
) -> RunPlan:
    """
    Read a configuration file and resolve it, with optional overrides.

    Args:
        path: TOML file; the defaults alone when None
        overrides: Values per table that replace the file's (None values are ignored)

    Returns:
        The resolved RunPlan

    Raises:
        FileNotFoundError: If ``path`` does not exist
        ConfigError: If the file or the overrides are invalid
    """
    data = load_config(path) if path is not None else {}
    if overrides:
        data = merge_overrides(data, overrides)
    plan = build_plan(data)
    logger.debug("Resolved run plan: %s", plan.to_dict())
    return plan
