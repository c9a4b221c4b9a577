"""
Command-line interface for dta-prevalence-bias.
"""

import argparse
import logging
import sys
from typing import List, Optional

from . import __version__
from .config import parse_config
from .core import BiasStudyPipeline
from .scenarios import VERIFICATION_RATES


def _setups(value: str):
    if value == "all":
        return "all"
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'all' or a comma-separated list of numbers, got '{value}'")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML run configuration")
    parser.add_argument("--bias", help="Bias structure, e.g. reference_standard_error")
    parser.add_argument("--setups", type=_setups, help="'all' or setup numbers, e.g. 1,4")
    parser.add_argument("--studies", type=int, help="Studies per setup (default: 10000)")
    parser.add_argument("--subjects", type=int, help="Subjects per study (default: 500)")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--verif-rate", choices=sorted(VERIFICATION_RATES), help="Verification rate preset")
    parser.add_argument("--model", choices=["lcbm", "pvb"], help="Model to fit")
    parser.add_argument(
        "--subgroup",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Fit each covariate stratum separately",
    )
    parser.add_argument("--chains", type=int, help="MCMC chains (default: 3)")
    parser.add_argument("--iters", type=int, help="Iterations per chain (default: 50000)")
    parser.add_argument("--burnin", type=int, help="Burn-in iterations (default: 25000)")
    parser.add_argument("--out", help="Output directory (default: results)")
    parser.add_argument("--jobs", type=int, help="Parallel workers (default: 1)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More log output (repeatable)")
    parser.add_argument("-q", "--quiet", action="store_true", help="Only warnings and errors")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dta-bias",
        description="Simulate prevalence-related bias in diagnostic accuracy studies and adjust for it",
    )
    parser.add_argument("--version", action="version", version=f"dta-prevalence-bias {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("simulate", "Simulate studies and write estimates.csv and meta.csv"),
        ("correlate", "Write per-setup Spearman correlations"),
        ("fit", "Fit the latent class model and write fit.json"),
        ("report", "Draw figures and write report.md / report.html"),
        ("all", "Run every stage"),
    ):
        sub = commands.add_parser(name, help=help_text)
        _add_common(sub)
        if name in ("report", "all"):
            sub.add_argument("--png", action="store_true", help="Also write PNG overview panels")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {
        "run": {
            "bias": args.bias,
            "setups": args.setups,
            "studies": args.studies,
            "subjects": args.subjects,
            "seed": args.seed,
            "jobs": args.jobs,
            "out": args.out,
        },
        "grid": {"verif_rate": args.verif_rate},
        "mcmc": {
            "model": args.model,
            "subgroup": args.subgroup,
            "chains": args.chains,
            "iters": args.iters,
            "burnin": args.burnin,
        },
    }


def _configure_logging(verbose: int, quiet: bool) -> None:
    if quiet:
        level = logging.WARNING
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None):
    """Main entry point for the command-line interface."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose, args.quiet)

    try:
        plan = parse_config(args.config, _overrides(args))
        command = " ".join(["dta-bias"] + list(sys.argv[1:] if argv is None else argv))
        pipeline = BiasStudyPipeline(plan, command=command)

        if args.command == "simulate":
            paths = pipeline.simulate()
        elif args.command == "correlate":
            paths = [pipeline.correlate()]
        elif args.command == "fit":
            paths = [pipeline.fit()]
        elif args.command == "report":
            paths = pipeline.report(png=args.png)
        else:
            paths = pipeline.run_all(png=args.png)

        for path in paths:
            print(f"Written: {path}")

    except Exception as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
