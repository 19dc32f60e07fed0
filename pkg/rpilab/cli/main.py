"""
RPIlab: Command-line entry point.

    rpilab [--verbose] run <config>
    rpilab [--verbose] check <config>
    rpilab list-presets
    rpilab version

Exit status is 0 when every metric is within tolerance, 2 for an unreadable or
invalid configuration, 3 when a size guard would be exceeded, and 4 when a metric
falls outside its tolerance. RPILAB_MAX_WORKERS overrides the corridor-sweep
worker count.

Copyright 2024 RPIlab Developers
"""

import argparse
import logging
import pathlib
import sys
import time
from typing import Optional, Sequence

import rpilab
from rpilab.cli.artifacts import write_artifacts
from rpilab.cli.config import load_config
from rpilab.cli.experiments import build_setup, failed_metrics, run_experiment
from rpilab.common import GuardExceededError
from rpilab.model.presets import PRESETS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_THRESHOLD = 4


def run(config_path: pathlib.Path) -> int:
    """Run the experiment of a configuration file and write its artifacts."""
    start = time.perf_counter()

    try:
        config = load_config(config_path)
        result = run_experiment(config)
    except GuardExceededError as exc:
        logger.error("guard exceeded: %s", exc)
        return EXIT_GUARD
    except ValueError as exc:
        logger.error("invalid configuration '%s': %s", config_path, exc)
        return EXIT_CONFIG

    summary = write_artifacts(
        config, result, wall_time_s=time.perf_counter() - start
    )
    failed = failed_metrics(result)

    if failed:
        logger.warning("metrics outside tolerance: %s", ", ".join(failed))
        return EXIT_THRESHOLD

    logger.info("%s passed in %.3f s", summary["experiment"], summary["wall_time_s"])

    return EXIT_OK


def check(config_path: pathlib.Path) -> int:
    """Validate a configuration and its size guards without running it."""
    try:
        build_setup(load_config(config_path))
    except GuardExceededError as exc:
        logger.error("guard exceeded: %s", exc)
        return EXIT_GUARD
    except ValueError as exc:
        logger.error("invalid configuration '%s': %s", config_path, exc)
        return EXIT_CONFIG

    logger.info("configuration '%s' is valid", config_path)

    return EXIT_OK


def list_presets() -> int:
    """Print the named presets with their default parameters."""
    for name in sorted(PRESETS):
        info = PRESETS[name]
        parameters = ", ".join(
            f"{key}={value}" for key, value in sorted(info["parameters"].items())
        )
        print(f"{name}: {info['description']} ({parameters})")

    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpilab",
        description=(
            "Run corridor, influence-functional, and restricted-path-integral "
            "experiments on compound system-environment models."
        ),
    )
    parser.add_argument(
        "--verbose", action="store_true", help="Log debug records. Default: off."
    )
    verbs = parser.add_subparsers(dest="verb", required=True)
    run_parser = verbs.add_parser("run", help="Run an experiment configuration.")
    run_parser.add_argument("config", type=pathlib.Path, help="TOML configuration.")
    check_parser = verbs.add_parser(
        "check", help="Validate a configuration without running it."
    )
    check_parser.add_argument("config", type=pathlib.Path, help="TOML configuration.")
    verbs.add_parser("list-presets", help="List named model presets.")
    verbs.add_parser("version", help="Print the package version.")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, configure logging, and dispatch the verb."""
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    # Library warnings go to the same handlers.
    logging.captureWarnings(True)

    if args.verb == "run":
        return run(args.config)

    if args.verb == "check":
        return check(args.config)

    if args.verb == "list-presets":
        return list_presets()

    print(rpilab.__version__)

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
