"""
Run manifests: what produced an output directory, and checksums of its files.
"""

import hashlib
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

from .formats import read_json, write_json

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def sha256_file(path: Union[str, Path]) -> str:
    """Hex SHA-256 digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """
    Reproducibility record of one command.

    Attributes:
        tool_version: Package version
        command: Command line that produced the outputs
        seed: Master seed
        scenarios: "<structure>/<setup label>" identifiers
        created: UTC timestamp; the only field that differs between re-runs
        plan: Resolved run plan
        outputs: SHA-256 per output file, keyed by path relative to the manifest
    """

    tool_version: str
    command: str
    seed: int
    scenarios: List[str]
    created: str
    plan: Dict[str, Any] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def build_manifest(
    out_dir: Union[str, Path],
    files: Iterable[Union[str, Path]],
    command: str,
    seed: int,
    scenarios: Iterable[str],
    plan: Optional[Dict[str, Any]] = None,
) -> RunManifest:
    """
    Checksum the given output files.

    Args:
        out_dir: Directory the manifest will live in
        files: Output files inside ``out_dir``
        command: Command line of the run
        seed: Master seed
        scenarios: Scenario identifiers
        plan: Resolved run plan

    Returns:
        RunManifest with one checksum per file, sorted by relative path
    """
    from . import __version__

    out_dir = Path(out_dir)
    outputs = {}
    for f in files:
        f = Path(f)
        outputs[f.resolve().relative_to(out_dir.resolve()).as_posix()] = sha256_file(f)
    return RunManifest(
        tool_version=__version__,
        command=command,
        seed=seed,
        scenarios=list(scenarios),
        created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        plan=dict(plan or {}),
        outputs=dict(sorted(outputs.items())),
    )


def write_manifest(manifest: RunManifest, out_dir: Union[str, Path]) -> Path:
    """Write ``manifest.json`` into ``out_dir``."""
    path = write_json(manifest.to_dict(), Path(out_dir) / MANIFEST_NAME)
    logger.info("Manifest with %d checksums written to %s", len(manifest.outputs), path)
    return path


def read_manifest(path: Union[str, Path]) -> RunManifest:
    data = read_json(path)
    try:
        return RunManifest(**data)
    except TypeError as e:
        raise ValueError(f"Malformed manifest '{path}': {e}") from e


def verify_manifest(path: Union[str, Path]) -> List[str]:
    """
    Recompute the checksum of every file a manifest lists.

    Args:
        path: Manifest file

    Returns:
        Relative paths whose file is missing or whose checksum differs;
        empty when everything matches
    """
    path = Path(path)
    manifest = read_manifest(path)
    mismatches = []
    for name, expected in manifest.outputs.items():
        target = path.parent / name
        if not target.exists() or sha256_file(target) != expected:
            mismatches.append(name)
    if mismatches:
        logger.warning("%d file(s) do not match %s: %s", len(mismatches), path, ", ".join(mismatches))
    return mismatches
