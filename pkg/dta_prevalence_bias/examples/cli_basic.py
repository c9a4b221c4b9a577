"""
Basic command-line usage example for dta-prevalence-bias package.

Runs the stages of a small partial verification experiment one at a time and
checks the manifest afterwards.
"""

import subprocess
from pathlib import Path

from dta_prevalence_bias.manifest import verify_manifest

CONFIG = "pvb_small.toml"
STAGES = ["simulate", "correlate", "fit", "report"]


def main():
    """Basic CLI example."""
    print("💻 Command Line - Stage by Stage")
    print("=" * 50)

    for stage in STAGES:
        cmd = ["dta-bias", stage, "--config", CONFIG]
        print(f"\n$ {' '.join(cmd)}")
        try:
            result = subprocess.run(cmd, capture_output=True, text=True, timeout=1800)
        except FileNotFoundError:
            print("❌ dta-bias not found. Install the package with: pip install -e .")
            return
        if result.returncode != 0:
            print(f"❌ {result.stderr.strip()}")
            return
        print(result.stdout.strip())

    manifest = Path("results/pvb-small/manifest.json")
    mismatches = verify_manifest(manifest)
    if mismatches:
        print(f"⚠️ Files changed since the manifest was written: {', '.join(mismatches)}")
    else:
        print(f"\n✅ All checksums in {manifest} match")


if __name__ == "__main__":
    main()
