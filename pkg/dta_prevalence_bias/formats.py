"""
Interchange file formats.

CSV files use ``\\n`` line endings, a fixed header per file type, floats with
exactly 6 decimals (round-half-even on the exact binary value) and empty
fields for missing values. Reading a written file gives back the values
rounded to 6 decimals, and writing them again reproduces the same bytes.
"""

import json
import logging
import math
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from .association import CorrelationReport
from .tables import EstimateRecord, TwoByTwoTable, VerificationTable

logger = logging.getLogger(__name__)

ESTIMATES_HEADER = ["study_id", "setup", "prev_hat", "se_hat", "sp_hat", "n_ref_pos", "n_ref_neg"]
META_HEADER = ["study_id", "setup", "stratum", "n_pp", "n_pn", "n_np", "n_nn"]
VERIF_HEADER = ["study_id", "setup", "n_total", "n1", "v1", "v0", "x1", "x0"]
CORRELATIONS_HEADER = ["setup", "rho_se_prev", "n_pairs_se", "rho_sp_prev", "n_pairs_sp"]

_QUANTUM = Decimal("0.000001")

PathLike = Union[str, Path]


def format_probability(value: Optional[float]) -> str:
    """
    Render a float with 6 decimals, round-half-even; "" for None or NaN.

    >>> format_probability(0.0000005)
    '0.000000'
    >>> format_probability(None)
    ''
    """
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    text = str(Decimal(float(value)).quantize(_QUANTUM, rounding=ROUND_HALF_EVEN))
    return "0.000000" if text == "-0.000000" else text


def _parse_float(value) -> Optional[float]:
    return None if pd.isna(value) else float(value)


def _write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.debug("Wrote %d rows to %s", len(frame), path)
    return path


def _read_frame(path: PathLike, header: Sequence[str], kind: str, **kwargs) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{kind.capitalize()} file '{path}' not found")
    try:
        frame = pd.read_csv(path, dtype={"setup": str}, **kwargs)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
        raise ValueError(f"Malformed {kind} file '{path}': {e}") from e
    if list(frame.columns) != list(header):
        raise ValueError(
            f"Malformed {kind} file '{path}': expected columns {','.join(header)}, "
            f"got {','.join(map(str, frame.columns))}"
        )
    return frame


def write_estimates(records: Iterable[EstimateRecord], path: PathLike) -> Path:
    """Write naive estimates, one row per study."""
    rows = [
        (
            r.study_id,
            r.setup_label,
            format_probability(r.prev_hat),
            format_probability(r.se_hat),
            format_probability(r.sp_hat),
            r.n_ref_pos,
            r.n_ref_neg,
        )
        for r in records
    ]
    return _write_frame(pd.DataFrame(rows, columns=ESTIMATES_HEADER), path)


def read_estimates(path: PathLike) -> List[EstimateRecord]:
    """
    Read an estimates file.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the header or a value is malformed
    """
    frame = _read_frame(path, ESTIMATES_HEADER, "estimates")
    try:
        return [
            EstimateRecord(
                study_id=int(row.study_id),
                setup_label=str(row.setup),
                prev_hat=_parse_float(row.prev_hat),
                se_hat=_parse_float(row.se_hat),
                sp_hat=_parse_float(row.sp_hat),
                n_ref_pos=int(row.n_ref_pos),
                n_ref_neg=int(row.n_ref_neg),
            )
            for row in frame.itertuples(index=False)
        ]
    except (TypeError, ValueError) as e:
        raise ValueError(f"Malformed estimates file '{path}': {e}") from e


def write_meta(entries: Iterable[Tuple[int, str, TwoByTwoTable]], path: PathLike) -> Path:
    """Write two-by-two tables; pooled tables have an empty stratum field."""
    rows = [
        (study_id, label, "" if t.stratum is None else t.stratum, t.n_pp, t.n_pn, t.n_np, t.n_nn)
        for study_id, label, t in entries
    ]
    return _write_frame(pd.DataFrame(rows, columns=META_HEADER), path)


def read_meta(path: PathLike) -> List[Tuple[int, str, TwoByTwoTable]]:
    """Read two-by-two tables as (study_id, setup, table) in file order."""
    frame = _read_frame(path, META_HEADER, "meta-dataset")
    try:
        return [
            (
                int(row.study_id),
                str(row.setup),
                TwoByTwoTable(
                    n_pp=int(row.n_pp),
                    n_pn=int(row.n_pn),
                    n_np=int(row.n_np),
                    n_nn=int(row.n_nn),
                    stratum=None if pd.isna(row.stratum) else int(row.stratum),
                ),
            )
            for row in frame.itertuples(index=False)
        ]
    except (TypeError, ValueError) as e:
        raise ValueError(f"Malformed meta-dataset file '{path}': {e}") from e


def write_verif(entries: Iterable[Tuple[int, str, VerificationTable]], path: PathLike) -> Path:
    """Write verification tables, one row per study."""
    rows = [(study_id, label, t.n_total, t.n1, t.v1, t.v0, t.x1, t.x0) for study_id, label, t in entries]
    return _write_frame(pd.DataFrame(rows, columns=VERIF_HEADER), path)


def read_verif(path: PathLike) -> List[Tuple[int, str, VerificationTable]]:
    """Read verification tables as (study_id, setup, table) in file order."""
    frame = _read_frame(path, VERIF_HEADER, "verification")
    try:
        return [
            (
                int(row.study_id),
                str(row.setup),
                VerificationTable(
                    n_total=int(row.n_total),
                    n1=int(row.n1),
                    v1=int(row.v1),
                    v0=int(row.v0),
                    x1=int(row.x1),
                    x0=int(row.x0),
                ),
            )
            for row in frame.itertuples(index=False)
        ]
    except (TypeError, ValueError) as e:
        raise ValueError(f"Malformed verification file '{path}': {e}") from e


def write_correlations(reports: Iterable[CorrelationReport], path: PathLike) -> Path:
    """Write one row of Spearman correlations per setup."""
    rows = [
        (
            r.setup_label,
            format_probability(r.rho_se_prev),
            r.n_pairs_se,
            format_probability(r.rho_sp_prev),
            r.n_pairs_sp,
        )
        for r in reports
    ]
    return _write_frame(pd.DataFrame(rows, columns=CORRELATIONS_HEADER), path)


def read_correlations(path: PathLike) -> List[CorrelationReport]:
    frame = _read_frame(path, CORRELATIONS_HEADER, "correlations")
    return [
        CorrelationReport(
            setup_label=str(row.setup),
            rho_se_prev=_parse_float(row.rho_se_prev),
            rho_sp_prev=_parse_float(row.rho_sp_prev),
            n_pairs_se=int(row.n_pairs_se),
            n_pairs_sp=int(row.n_pairs_sp),
        )
        for row in frame.itertuples(index=False)
    ]


def write_json(document: Dict[str, Any], path: PathLike) -> Path:
    """Write a JSON document with stable key order and a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(document, f, indent=2, allow_nan=False)
        f.write("\n")
    return path


def read_json(path: PathLike) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"JSON file '{path}' not found")
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(f"Malformed JSON file '{path}': {e}") from e
