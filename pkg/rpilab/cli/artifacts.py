"""
RPIlab: CSV and JSON artifacts of experiment runs.

Copyright 2024 RPIlab Developers
"""

import json
import logging
import pathlib
from typing import Any, Dict, List, TypedDict

import pandas

from rpilab.cli.config import ExperimentConfig
from rpilab.cli.experiments import ExperimentResult, Metric
from rpilab.cli.plotting import emit_plot

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"
METRICS_FILE = "metrics.csv"


class RunSummary(TypedDict):
    """Contents of summary.json."""

    experiment: str
    config: Dict[str, Any]
    wall_time_s: float
    metrics: Dict[str, Metric]
    passed: bool
    artifacts: List[str]


def write_csv(frame: pandas.DataFrame, path: pathlib.Path) -> None:
    """Write a table without index, with newline line endings and round-trip floats."""
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")


def write_artifacts(
    config: ExperimentConfig, result: ExperimentResult, *, wall_time_s: float
) -> RunSummary:
    """
    Write metrics.csv, the CSV tables, plots, and summary.json of a run into the
    output directory.

    Parameters
    ----------
    config
        Configuration of the run
    result
        Metrics, tables, and plot kinds of the run
    wall_time_s
        Elapsed time of the run

    Returns
    -------
    summary
        The summary as written
    """
    out_dir = config.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics = result["metrics"]
    # Every summary metric is also a CSV row.
    write_csv(
        pandas.DataFrame(
            {
                "metric": list(metrics),
                "value": [item["value"] for item in metrics.values()],
                "tolerance": [item["tolerance"] for item in metrics.values()],
                "passed": [item["passed"] for item in metrics.values()],
            }
        ),
        out_dir / METRICS_FILE,
    )
    artifacts = [METRICS_FILE]

    for name in sorted(result["tables"]):
        write_csv(result["tables"][name], out_dir / name)
        artifacts.append(name)
        logger.debug("wrote %s", out_dir / name)

    if config["output.plots"]:
        for name in sorted(result["plots"]):
            svg_path = emit_plot(out_dir / name, result["plots"][name])
            artifacts.append(svg_path.name)
            logger.debug("wrote %s", svg_path)

    summary = RunSummary(
        experiment=config.experiment.value,
        config=config.echo(),
        wall_time_s=wall_time_s,
        metrics=metrics,
        passed=all(item["passed"] for item in metrics.values()),
        artifacts=artifacts,
    )

    with open(out_dir / SUMMARY_FILE, "w", encoding="utf-8") as file:
        json.dump(summary, file, indent=2, sort_keys=True, allow_nan=False)
        file.write("\n")

    logger.info(
        "wrote %d artifacts and %s to %s", len(artifacts), SUMMARY_FILE, out_dir
    )

    return summary
