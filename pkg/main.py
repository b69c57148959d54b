#!/usr/bin/env python3
"""
ATMCMC Lab - Main Entry Point

Experiment harness for additive transformation MCMC and random-walk
Metropolis-Hastings: acceptance-rate tables, ensemble KS curves, optimal
scaling curves, drift and regularity checks. Emits CSV/JSON data only.

Exit status: 0 on success, 1 on validation errors, 2 on runtime failures.
"""

import argparse
import os
import sys
from dataclasses import replace
from typing import List, Optional

from core import __version__
from core.errors import ConfigError, InvalidParameterError, SamplerError
from experiments.config import EXPERIMENT_KINDS, default_config, load_config
from experiments.runner import run_experiment

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILURE = 2


def print_banner():
    """Print welcome banner."""
    banner = f"""
╔═══════════════════════════════════════════════════════════╗
║                    ATMCMC Lab v{__version__:<8}                   ║
║   Additive Transformation MCMC vs Random-Walk Metropolis  ║
╚═══════════════════════════════════════════════════════════╝
    """
    print(banner)


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with the validation status."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    """Subcommand parser; every subcommand shares the same flags."""
    parser = ArgumentParser(
        description='ATMCMC Lab - sampler experiments and optimal-scaling calculus'
    )
    common = ArgumentParser(add_help=False)
    common.add_argument(
        '--config',
        type=str,
        help='Path to an experiment config file (or a metadata.json sidecar)'
    )
    common.add_argument(
        '--out',
        type=str,
        help='Output directory (overrides config)'
    )
    common.add_argument(
        '--seed',
        type=int,
        help='Root seed, unsigned 64-bit (overrides config)'
    )
    common.add_argument(
        '--threads',
        type=int,
        help='Worker threads for ensemble runs (default: machine parallelism)'
    )
    common.add_argument(
        '--quiet',
        action='store_true',
        help='Disable progress bars'
    )

    subcommands = parser.add_subparsers(dest='experiment', required=True, metavar='experiment')
    for kind in EXPERIMENT_KINDS:
        subcommands.add_parser(kind, parents=[common], help=f'Run the {kind} experiment')
    return parser


def resolve_config(args: argparse.Namespace):
    """Config file (or defaults) for the chosen subcommand, with flag overrides applied."""
    if args.config:
        print(f"Loading configuration from: {args.config}")
        config = load_config(args.config)
        if config.kind != args.experiment:
            raise ConfigError(f"config describes a '{config.kind}' experiment, not '{args.experiment}'",
                              field="experiment.kind")
    else:
        print(f"No config given, using defaults for '{args.experiment}'.")
        config = default_config(args.experiment)

    overrides = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer", field="--seed")
        overrides['seed'] = args.seed
    if args.out:
        overrides['out_dir'] = args.out
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("threads must be >= 1", field="--threads")
        overrides['threads'] = args.threads
    return replace(config, **overrides) if overrides else config


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point."""
    args = build_parser().parse_args(argv)

    print_banner()

    try:
        config = resolve_config(args)
    except (ConfigError, InvalidParameterError) as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_INVALID

    print(f"\nExperiment: {config.kind}")
    print(f"Target: {config.target.component} (variance={config.target.variance:g}), d={config.target.d}")
    print(f"Seed: {config.seed}")
    print(f"Output directory: {os.path.abspath(config.out_dir)}\n")

    try:
        files = run_experiment(config, quiet=args.quiet)
    except (ConfigError, InvalidParameterError) as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (SamplerError, OSError) as e:
        print(f"Experiment failed: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except KeyboardInterrupt:
        print("\nExperiment interrupted by user.", file=sys.stderr)
        return EXIT_FAILURE

    print("\n" + "=" * 60)
    print("Experiment completed! Files written:")
    for path in files:
        print(f"  {path}")
    print("=" * 60)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
