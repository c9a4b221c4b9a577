#!/usr/bin/env python3
"""
Example runner for the dta-prevalence-bias package.

Python examples are run as scripts; TOML examples are passed to
``dta-bias all --config``.

    python run_examples.py                  # list examples
    python run_examples.py all              # every Python example
    python run_examples.py lcbm_adjustment  # one example, with or without suffix
    python run_examples.py pvb_small.toml   # full pipeline on a configuration
"""

import os
import runpy
import sys
from pathlib import Path
from typing import List, Optional

EXAMPLES_DIR = Path(__file__).parent / "dta_prevalence_bias" / "examples"


def list_available_examples() -> List[Path]:
    """Python scripts and TOML configurations in the examples directory."""
    if not EXAMPLES_DIR.exists():
        return []
    scripts = [p for p in EXAMPLES_DIR.glob("*.py") if p.name != "__init__.py"]
    return sorted(scripts) + sorted(EXAMPLES_DIR.glob("*.toml"))


def resolve_example(name: str, examples: List[Path]) -> Optional[Path]:
    for path in examples:
        if name in (path.name, path.stem):
            return path
    return None


def run_example(path: Path) -> bool:
    """Run one example from inside the examples directory."""
    print(f"🚀 Running example: {path.name}")
    print("=" * 60)

    original_cwd = os.getcwd()
    os.chdir(EXAMPLES_DIR)
    try:
        if path.suffix == ".toml":
            from dta_prevalence_bias.__main__ import main as cli_main

            cli_main(["all", "--config", path.name, "-v"])
        else:
            runpy.run_path(str(path), run_name="__main__")
    except SystemExit as e:
        if e.code not in (None, 0):
            print(f"\n❌ Example exited with status {e.code}")
            return False
    except Exception as e:
        print(f"\n❌ Example failed: {e}")
        return False
    finally:
        os.chdir(original_cwd)

    print("\n✅ Example completed successfully!")
    return True


def main():
    """Main function."""
    print("📚 DTA Prevalence Bias - Example Runner")
    print("=" * 60)

    examples = list_available_examples()
    if not examples:
        print("❌ No examples found!")
        sys.exit(1)

    if len(sys.argv) < 2:
        print(f"Available examples ({len(examples)}):")
        for i, path in enumerate(examples, 1):
            kind = "config" if path.suffix == ".toml" else "script"
            print(f"  {i}. {path.name} ({kind})")
        print("\nUsage: python run_examples.py <name>|all")
        return

    if sys.argv[1] == "all":
        scripts = [p for p in examples if p.suffix == ".py"]
        passed = sum(run_example(p) for p in scripts)
        print(f"\n📊 Results: {passed}/{len(scripts)} examples completed successfully")
        sys.exit(0 if passed == len(scripts) else 1)

    path = resolve_example(sys.argv[1], examples)
    if path is None:
        print(f"❌ Unknown example: {sys.argv[1]}")
        print(f"Available examples: {', '.join(p.name for p in examples)}")
        sys.exit(1)
    sys.exit(0 if run_example(path) else 1)


if __name__ == "__main__":
    main()
