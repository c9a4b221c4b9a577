"""
Scenario definitions for the five bias structures.

Each structure has a grid of "setups" (one per reference standard scenario)
whose parameter values come from the simulation settings table and the
figure captions of the source study. Test subscript convention: 1 is the
reference standard, 2 is the index test.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

# Verification rate bounds for index-negative subjects.
VERIFICATION_RATES: Dict[str, Tuple[float, float]] = {
    "default": (0.5, 0.9),
    "high": (0.7, 0.9),
    "low": (0.1, 0.9),
}

# Reference standard (Se, Sp) per setup, shared by four of the five grids.
_REFERENCE_GRID = [(0.7, 0.95), (0.8, 0.95), (0.9, 0.95), (1.0, 1.0)]


class BiasStructure(str, Enum):
    """The five bias structures, valued by their configuration names."""

    REFERENCE_STANDARD_ERROR = "reference_standard_error"
    SPECTRUM_EFFECT = "spectrum_effect"
    CONFOUNDING = "confounding"
    PARTIAL_VERIFICATION = "partial_verification"
    CONDITIONAL_DEPENDENCE = "conditional_dependence"

    @classmethod
    def from_name(cls, name: str) -> "BiasStructure":
        """
        Resolve a structure from its configuration name.

        Args:
            name: Name such as ``"confounding"``; dashes are accepted

        Returns:
            The matching BiasStructure

        Raises:
            ValueError: If the name is not one of the five structures
        """
        key = name.strip().lower().replace("-", "_")
        for member in cls:
            if member.value == key:
                return member
        known = ", ".join(m.value for m in cls)
        raise ValueError(f"Unknown bias '{name}'. Expected one of: {known}")

    @property
    def uses_covariate(self) -> bool:
        return self in (
            BiasStructure.SPECTRUM_EFFECT,
            BiasStructure.CONFOUNDING,
            BiasStructure.CONDITIONAL_DEPENDENCE,
        )

    @property
    def uses_verification(self) -> bool:
        return self is BiasStructure.PARTIAL_VERIFICATION


# Accuracy values are tuples: (value,) when unstratified, (R=1, R=0) otherwise.
Stratified = Tuple[float, ...]


@dataclass(frozen=True)
class ScenarioSetup:
    """
    One fully resolved parameterization of one bias structure.

    Attributes:
        structure: Bias structure this setup belongs to
        label: Display label, e.g. ``"Setup 1"``
        ref_se: Reference standard sensitivity, ``(S1,)`` or ``(S11, S10)``
        ref_sp: Reference standard specificity, ``(C1,)`` or ``(C11, C10)``
        index_se: Index test sensitivity, ``(S2,)`` or ``(S21, S20)``
        index_sp: Index test specificity, ``(C2,)`` or ``(C21, C20)``
        prev_low: Lower bound of the study prevalence distribution
        prev_high: Upper bound of the study prevalence distribution
        prev_low_r1: Lower prevalence bound in the R=1 stratum (confounding)
        prev_high_r1: Upper prevalence bound in the R=1 stratum (confounding)
        prev_low_r0: Lower prevalence bound in the R=0 stratum (confounding)
        prev_high_r0: Upper prevalence bound in the R=0 stratum (confounding)
        verif_low: Lower bound of the verification rate (partial verification)
        verif_high: Upper bound of the verification rate (partial verification)
    """

    structure: BiasStructure
    label: str
    ref_se: Stratified
    ref_sp: Stratified
    index_se: Stratified
    index_sp: Stratified
    prev_low: float = 0.1
    prev_high: float = 0.9
    prev_low_r1: Optional[float] = None
    prev_high_r1: Optional[float] = None
    prev_low_r0: Optional[float] = None
    prev_high_r0: Optional[float] = None
    verif_low: Optional[float] = None
    verif_high: Optional[float] = None

    def __post_init__(self):
        self.validate()

    @property
    def number(self) -> int:
        """Setup number parsed from the label (``"Setup 3"`` -> 3)."""
        return int(self.label.split()[-1])

    @property
    def is_perfect_reference(self) -> bool:
        return all(v == 1.0 for v in self.ref_se + self.ref_sp)

    def accuracy(self, name: str, r=None):
        """
        Look up an accuracy parameter, optionally by stratum.

        Args:
            name: One of ``ref_se``, ``ref_sp``, ``index_se``, ``index_sp``
            r: Covariate value(s); scalar or array of 0/1. Ignored when the
               parameter is unstratified.

        Returns:
            A float, or an array matching ``r`` when stratified
        """
        values = getattr(self, name)
        if len(values) == 1:
            return values[0]
        if r is None:
            raise ValueError(f"{name} is stratified; a covariate value is required")
        return np.where(np.asarray(r) == 1, values[0], values[1])

    def validate(self) -> None:
        """
        Check the setup invariants.

        Raises:
            ValueError: If a probability is outside [0, 1], a bound pair is
                reversed, the index test is uninformative in a stratum, or the
                stratum-specific fields do not match the structure
        """
        width = 2 if self.structure.uses_covariate else 1
        for name in ("ref_se", "ref_sp", "index_se", "index_sp"):
            values = getattr(self, name)
            if len(values) != width:
                raise ValueError(
                    f"{self.label}: {name} needs {width} value(s) for "
                    f"{self.structure.value}, got {len(values)}"
                )
            for v in values:
                _check_probability(f"{self.label}: {name}", v)

        for se, sp in zip(self.index_se, self.index_sp):
            if se + sp <= 1:
                raise ValueError(
                    f"{self.label}: index test diagnostic value must exceed 1 "
                    f"(sensitivity={se}, specificity={sp})"
                )

        _check_bounds(f"{self.label}: prevalence", self.prev_low, self.prev_high)

        confounding = self.structure is BiasStructure.CONFOUNDING
        stratum_bounds = (
            self.prev_low_r1,
            self.prev_high_r1,
            self.prev_low_r0,
            self.prev_high_r0,
        )
        if confounding:
            if any(b is None for b in stratum_bounds):
                raise ValueError(
                    f"{self.label}: confounding needs prevalence bounds per stratum"
                )
            _check_bounds(f"{self.label}: R=1 prevalence", self.prev_low_r1, self.prev_high_r1)
            _check_bounds(f"{self.label}: R=0 prevalence", self.prev_low_r0, self.prev_high_r0)
        elif any(b is not None for b in stratum_bounds):
            raise ValueError(
                f"{self.label}: per-stratum prevalence bounds apply to confounding only"
            )

        verif = (self.verif_low, self.verif_high)
        if self.structure.uses_verification:
            if any(b is None for b in verif):
                raise ValueError(f"{self.label}: partial verification needs verification bounds")
            _check_bounds(f"{self.label}: verification rate", self.verif_low, self.verif_high)
        elif any(b is not None for b in verif):
            raise ValueError(
                f"{self.label}: verification bounds apply to partial verification only"
            )

    def with_overrides(self, **overrides) -> "ScenarioSetup":
        """Return a copy with fields replaced; the copy is re-validated."""
        return replace(self, **overrides)


def _check_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be a probability in [0, 1], got {value}")


def _check_bounds(name: str, low: float, high: float) -> None:
    _check_probability(f"{name} lower bound", low)
    _check_probability(f"{name} upper bound", high)
    if low > high:
        raise ValueError(f"{name} bounds are reversed: low={low} > high={high}")


def make_scenario_grid(
    structure: BiasStructure,
    verif_bounds: Optional[Tuple[float, float]] = None,
) -> List[ScenarioSetup]:
    """
    Build the setups of one bias structure as shown in its figure.

    Args:
        structure: Bias structure to build
        verif_bounds: Verification rate bounds for index-negative subjects
            (partial verification only). Defaults to ``(0.5, 0.9)``.

    Returns:
        Setups labeled ``"Setup 1"`` onwards (four, or three for conditional
        dependence)
    """
    structure = BiasStructure(structure)
    if verif_bounds is not None and not structure.uses_verification:
        raise ValueError(f"Verification bounds do not apply to {structure.value}")

    setups = []
    if structure is BiasStructure.CONDITIONAL_DEPENDENCE:
        ref_r1 = [(0.6, 0.85), (0.7, 0.85), (0.8, 0.85)]
        ref_r0 = [(0.7, 0.95), (0.8, 0.95), (0.9, 0.95)]
        for i, ((se1, sp1), (se0, sp0)) in enumerate(zip(ref_r1, ref_r0), start=1):
            setups.append(
                ScenarioSetup(
                    structure=structure,
                    label=f"Setup {i}",
                    ref_se=(se1, se0),
                    ref_sp=(sp1, sp0),
                    index_se=(0.8, 0.9),
                    index_sp=(0.8, 0.9),
                )
            )
        return setups

    for i, (se, sp) in enumerate(_REFERENCE_GRID, start=1):
        label = f"Setup {i}"
        if structure is BiasStructure.REFERENCE_STANDARD_ERROR:
            setup = ScenarioSetup(structure, label, (se,), (sp,), (0.9,), (0.9,))
        elif structure is BiasStructure.SPECTRUM_EFFECT:
            setup = ScenarioSetup(structure, label, (se, se), (sp, sp), (0.8, 0.9), (0.8, 0.9))
        elif structure is BiasStructure.CONFOUNDING:
            setup = ScenarioSetup(
                structure,
                label,
                (se, se),
                (sp, sp),
                (0.8, 0.9),
                (0.8, 0.9),
                prev_low_r1=0.7,
                prev_high_r1=0.9,
                prev_low_r0=0.1,
                prev_high_r0=0.3,
            )
        else:
            low, high = verif_bounds or VERIFICATION_RATES["default"]
            setup = ScenarioSetup(
                structure,
                label,
                (se,),
                (sp,),
                (0.9,),
                (0.9,),
                verif_low=low,
                verif_high=high,
            )
        setups.append(setup)
    return setups


def select_setups(
    setups: Iterable[ScenarioSetup], numbers: Optional[Iterable[int]] = None
) -> List[ScenarioSetup]:
    """
    Keep the setups whose numbers are listed (all when ``numbers`` is None).

    Raises:
        ValueError: If a requested setup number does not exist
    """
    setups = list(setups)
    if numbers is None:
        return setups
    wanted = list(numbers)
    available = {s.number: s for s in setups}
    missing = [n for n in wanted if n not in available]
    if missing:
        raise ValueError(
            f"Unknown setup number(s) {missing}; available: {sorted(available)}"
        )
    return [available[n] for n in sorted(set(wanted))]
