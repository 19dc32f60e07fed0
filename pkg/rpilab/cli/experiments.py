"""
RPIlab: Named experiments of the command-line runner.

Each experiment turns a validated configuration into headline metrics, checked
against configured tolerances, and the tables written as CSV artifacts.

Copyright 2024 RPIlab Developers
"""

import contextlib
import logging
import time
from typing import Callable, Dict, Iterator, List, NamedTuple, Optional, TypedDict

import numpy
import pandas

from rpilab.cli.config import ConfigError, Experiment, ExperimentConfig
from rpilab.common import (
    MAX_PAIR_CORRIDORS,
    MAX_SYSTEM_PATHS,
    GuardExceededError,
)
from rpilab.corridors.computation import build_measure, resolution_check
from rpilab.corridors.types import (
    CorridorMeasure,
    CorridorSpec,
    Normalization,
    Window,
    WindowKind,
)
from rpilab.decoherence.computation import classical_corridor_scan, consistency_report
from rpilab.decoherence.influence import (
    NegligibleInfluenceError,
    factorize_pif,
    pif_decomposition_residual,
    pif_table,
    require_product_coupling,
)
from rpilab.evolution.computation import reconstruct_total
from rpilab.evolution.types import Placement, SliceScheme, Splitting
from rpilab.hilbert.computation import eigenbasis
from rpilab.model import presets
from rpilab.model.computation import (
    branch_pointer_trajectory,
    check_pointer_excursion,
)
from rpilab.model.types import CompoundModel
from rpilab.rpi.computation import compare_rpi_vs_exact
from rpilab.rpi.lindblad import coherence_decay, markov_limit_check
from rpilab.rpi.types import LindbladGenerator

logger = logging.getLogger(__name__)


class Metric(TypedDict):
    """Headline value with the tolerance it is checked against."""

    value: Optional[float]
    tolerance: float
    passed: bool


class ExperimentResult(TypedDict):
    """Metrics, CSV tables keyed by file name, and plot kinds keyed by CSV name."""

    metrics: Dict[str, Metric]
    tables: Dict[str, pandas.DataFrame]
    plots: Dict[str, str]


class Setup(NamedTuple):
    """Objects built from a configuration before any computation runs."""

    model: CompoundModel
    scheme: SliceScheme
    window: Window
    measure: CorridorMeasure


def metric(value: float, tolerance: float) -> Metric:
    """Metric passing when value is finite and at most tolerance."""
    value = float(value)
    finite = bool(numpy.isfinite(value))

    return Metric(
        value=value if finite else None,
        tolerance=float(tolerance),
        passed=finite and value <= tolerance,
    )


@contextlib.contextmanager
def stage(name: str) -> Iterator[None]:
    """Log the beginning and end of a stage with its elapsed time."""
    logger.info("%s: started", name)
    start = time.perf_counter()
    yield
    logger.info("%s: finished in %.3f s", name, time.perf_counter() - start)


def _enum(enum_type, config: ExperimentConfig, key: str):
    try:
        return enum_type(config[key])
    except ValueError as exc:
        raise ConfigError(
            f"key '{key}' has unrecognized value '{config[key]}', expected one of "
            f"{[e.value for e in enum_type]}"
        ) from exc


def _window(config: ExperimentConfig, width: Optional[float] = None) -> Window:
    return Window(
        kind=_enum(WindowKind, config, "window.kind"),
        width=config["window.width"] if width is None else width,
        normalization=_enum(Normalization, config, "window.normalization"),
    )


def build_setup(config: ExperimentConfig) -> Setup:
    """
    Build the model, slice scheme, window, and corridor measure of a configuration
    and check the size guards of its experiment.

    Raises
    ------
    ConfigError
        If a value is out of range for the objects it builds
    GuardExceededError
        If the experiment would exceed an enumeration guard
    """
    overrides = config.section("model")
    preset = overrides.pop("preset")

    try:
        m = presets.build_preset(preset, **overrides)
        s = SliceScheme(
            K=config["scheme.K"],
            dt=config["scheme.dt"],
            splitting=_enum(Splitting, config, "scheme.splitting"),
            placement=_enum(Placement, config, "scheme.placement"),
        )
        check_pointer_excursion(m, duration=s.t)
        w = _window(config)
        meas = build_measure(
            m,
            w,
            n_nodes=config["measure.n_nodes"],
            n_sigma=config["measure.n_sigma"],
            origin=config["measure.origin"],
        )
    except GuardExceededError:
        raise
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    experiment = config.experiment

    if experiment in (Experiment.CHECK, Experiment.CONSISTENCY):
        if meas.G**s.K > MAX_PAIR_CORRIDORS:
            raise GuardExceededError(
                f"corridor count {meas.G}**{s.K} exceeds pair guard "
                f"{MAX_PAIR_CORRIDORS}"
            )

    if experiment in (Experiment.PIF, Experiment.RPI_COMPARE):
        if m.dim_S**s.K > MAX_SYSTEM_PATHS:
            raise GuardExceededError(
                f"system path count {m.dim_S}**{s.K} exceeds guard {MAX_SYSTEM_PATHS}"
            )

    if experiment in (Experiment.PIF, Experiment.RPI_COMPARE, Experiment.CORRIDOR_SCAN):
        if not 0 <= config["corridor.branch"] < m.dim_S:
            raise ConfigError(
                f"corridor.branch must be in [0, {m.dim_S}), got "
                f"{config['corridor.branch']}"
            )

    if experiment is Experiment.MARKOV_LIMIT:
        if m.dim_S != 2:
            raise ConfigError(
                f"markov-limit requires a qubit system, got dimension {m.dim_S}"
            )

        if len(config["markov.dts"]) < 2:
            raise ConfigError("markov.dts must hold at least two slice durations")

    return Setup(model=m, scheme=s, window=w, measure=meas)


def _branch_centers(
    config: ExperimentConfig, m: CompoundModel, s: SliceScheme
) -> numpy.ndarray:
    tracks = branch_pointer_trajectory(m, times=s.weight_times)["mean_pointer"]

    return tracks[config["corridor.branch"]]


def run_check(config: ExperimentConfig, built: Setup) -> ExperimentResult:
    """Decomposition, completeness, and influence-functional identities."""
    m, s, w, meas = built

    with stage("reconstruction"):
        reconstruction = reconstruct_total(m, s, meas)
        resolution = resolution_check(m, w, meas)

    with stage("completeness"):
        completeness = consistency_report(
            m, s, meas, prune_tol=config["measure.prune_tol"]
        )["completeness_residual"]

    metrics = {
        "reconstruction_residual": metric(
            reconstruction, config["thresholds.reconstruction"]
        ),
        "resolution_residual": metric(resolution, config["thresholds.resolution"]),
        "completeness_residual": metric(
            completeness, config["thresholds.completeness"]
        ),
    }

    if m.env_obs is not None:
        with stage("influence decomposition"):
            metrics["pif_decomposition_residual"] = metric(
                pif_decomposition_residual(m, s, meas),
                config["thresholds.pif_decomposition"],
            )

    table = pandas.DataFrame(
        {
            "metric": list(metrics),
            "value": [item["value"] for item in metrics.values()],
            "tolerance": [item["tolerance"] for item in metrics.values()],
        }
    )

    return ExperimentResult(metrics=metrics, tables={"check.csv": table}, plots={})


def run_consistency(config: ExperimentConfig, built: Setup) -> ExperimentResult:
    """Consistency and environment-decoherence ratios of a corridor family."""
    m, s, _, meas = built

    with stage("consistency report"):
        report = consistency_report(
            m,
            s,
            meas,
            prune_tol=config["measure.prune_tol"],
            prob_floor=config["measure.prob_floor"],
        )

    indices = numpy.array([c.index for c in report["corridors"]])
    n = indices.size
    table = pandas.DataFrame(
        {
            "alpha": numpy.repeat(indices, n),
            "beta": numpy.tile(indices, n),
            "re_P": report["P"].real.reshape(-1),
            "im_P": report["P"].imag.reshape(-1),
            "coherence_ratio": report["coherence_ratios"].reshape(-1),
            "env_ratio": report["env_ratios"].reshape(-1),
        }
    )
    metrics = {
        "consistency_ratio": metric(
            report["consistency_ratio"], config["thresholds.consistency"]
        ),
        "env_ratio": metric(report["env_ratio"], config["thresholds.env"]),
        "completeness_residual": metric(
            report["completeness_residual"], config["thresholds.completeness"]
        ),
    }

    return ExperimentResult(
        metrics=metrics, tables={"decoherence.csv": table}, plots={}
    )


def _snap(centers: numpy.ndarray, nodes: numpy.ndarray) -> numpy.ndarray:
    # Nearest node, the lower one on ties.
    return nodes[numpy.abs(centers[:, numpy.newaxis] - nodes).argmin(axis=1)]


def run_pif(config: ExperimentConfig, built: Setup) -> ExperimentResult:
    """
    Diagonal partial influence functional of the branch-tracking corridor.

    With corridor.snap the corridor follows the measure nodes nearest to the branch
    trajectory, so that box corridors sit on cells of the partition. A negligible
    functional is reported with a missing residual.
    """
    m, s, w, meas = built
    branch = config["corridor.branch"]
    centers = _branch_centers(config, m, s)

    if config["corridor.snap"]:
        centers = _snap(centers, meas.nodes)

    corridor = CorridorSpec(centers=centers, window=w, index=branch)

    with stage("partial influence functional"):
        table = pif_table(m, s, (corridor, corridor))

        try:
            residual = factorize_pif(table)[0].residual
        except NegligibleInfluenceError as exc:
            logger.warning("%s", exc)
            residual = numpy.nan

    n = table.F.shape[0]
    frame = pandas.DataFrame(
        {
            "alpha": numpy.full(n * n, branch),
            "s_index": numpy.repeat(numpy.arange(n), n),
            "sbar_index": numpy.tile(numpy.arange(n), n),
            "re_F": table.F.real.reshape(-1),
            "im_F": table.F.imag.reshape(-1),
            "negligible": numpy.full(n * n, bool(numpy.isnan(residual))),
        }
    )
    metrics = {
        "factorization_residual": metric(residual, config["thresholds.factorization"])
    }

    return ExperimentResult(metrics=metrics, tables={"pif.csv": frame}, plots={})


def run_rpi_compare(config: ExperimentConfig, built: Setup) -> ExperimentResult:
    """
    Restricted-path-integral states of branch-tracking corridors of many widths.

    Corridors with a negligible partial influence functional keep their row, with
    missing values, and take no part in the metrics.
    """
    m, s, _, _ = built
    centers = _branch_centers(config, m, s)
    rows = []

    with stage("rpi comparison"):
        for index, width in enumerate(config["compare.widths"]):
            corridor = CorridorSpec(
                centers=centers, window=_window(config, width=width), index=index
            )

            try:
                comparison = compare_rpi_vs_exact(m, s, corridor)
            except NegligibleInfluenceError as exc:
                logger.warning("width %s: %s", width, exc)
                rows.append((index, width, numpy.nan, numpy.nan, numpy.nan, True))
                continue

            rows.append(
                (
                    index,
                    width,
                    comparison["trace_dist"],
                    comparison["prob_rel_err"],
                    comparison["factorization_residual"],
                    False,
                )
            )

    frame = pandas.DataFrame(
        rows,
        columns=[
            "alpha",
            "width",
            "trace_dist",
            "prob_rel_err",
            "factorization_residual",
            "negligible",
        ],
    )
    cutoff = config["thresholds.factorization"]
    factorizing = frame[frame["factorization_residual"] <= cutoff]
    entangled = frame[frame["factorization_residual"] > cutoff]
    # Corridors closer to rank one must not compare worse than the rest.
    trend = (
        max(0.0, factorizing["trace_dist"].max() - entangled["trace_dist"].min())
        if len(factorizing) and len(entangled)
        else 0.0
    )
    metrics = {
        "trace_dist": metric(
            factorizing["trace_dist"].max() if len(factorizing) else numpy.nan,
            config["thresholds.trace_dist"],
        ),
        "prob_rel_err": metric(
            factorizing["prob_rel_err"].max() if len(factorizing) else numpy.nan,
            config["thresholds.prob_rel_err"],
        ),
        "trend_violation": metric(trend, 0.0),
    }

    return ExperimentResult(metrics=metrics, tables={"compare.csv": frame}, plots={})


def run_corridor_scan(config: ExperimentConfig, built: Setup) -> ExperimentResult:
    """Weights of corridors following the branch trajectories at constant offsets."""
    m, s, _, meas = built

    with stage("corridor scan"):
        scan = classical_corridor_scan(m, s, meas, offsets=config["scan.offsets"])

    keep = scan["branch"] == config["corridor.branch"]

    if not numpy.any(keep):
        raise ConfigError("no scan offset keeps the corridor inside the pointer range")

    frame = pandas.DataFrame(
        {
            "alpha": numpy.arange(int(keep.sum())),
            "offset": scan["offset"][keep],
            "prob": scan["prob"][keep],
            "pif_norm": scan["pif_norm"][keep],
        }
    )
    peak = abs(float(frame["offset"][frame["prob"].idxmax()]))
    metrics = {"peak_offset": metric(peak, config["thresholds.peak_offset"])}

    return ExperimentResult(
        metrics=metrics, tables={"scan.csv": frame}, plots={"scan.csv": "scan"}
    )


def _dephasing_oracle(
    A: numpy.ndarray, rho: numpy.ndarray, kappa: float, times: numpy.ndarray
) -> numpy.ndarray:
    # Closed form of -(κ/2)[A, [A, ρ]] in the eigenbasis of A.
    eigenvalues, V = eigenbasis(A)
    rho_A = V.conj().T @ rho @ V
    gaps = (eigenvalues[:, numpy.newaxis] - eigenvalues[numpy.newaxis, :]) ** 2
    off = ~numpy.eye(eigenvalues.size, dtype=bool)
    coherence = []

    for t in times:
        rho_t = V @ (rho_A * numpy.exp(-kappa * gaps * t / 2)) @ V.conj().T
        coherence.append(numpy.abs(rho_t[off]).max())

    return numpy.array(coherence)


def run_markov_limit(config: ExperimentConfig, built: Setup) -> ExperimentResult:
    """Per-slice Gaussian measurement ladder against its Lindblad limit."""
    m = built.model

    try:
        require_product_coupling(m)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    # |+⟩⟨+| commutes with a σx field, so the ladder starts from |0⟩.
    mixing = presets.build_product_model(
        H_S=m.H_S + config["markov.omega_x"] / 2 * presets.SIGMA_X,
        H_E=m.H_E,
        A=m.sys_obs,
        B=m.env_obs,
        pointer_obs=m.pointer_obs,
        rho_in_S=presets.zero_state(),
        rho_in_E=m.rho_in_E,
        name=m.name,
    )

    with stage("markov ladder"):
        ladder = markov_limit_check(
            mixing,
            sigma=config["markov.sigma"],
            dts=config["markov.dts"],
            t=config["markov.t"],
            n_nodes=config["measure.n_nodes"],
            n_sigma=config["measure.n_sigma"],
        )

    with stage("dephasing"):
        g = LindbladGenerator.from_measurement(
            H=numpy.zeros((m.dim_S, m.dim_S)), A=m.sys_obs, kappa=ladder["kappa"]
        )
        times, coherence = coherence_decay(
            g,
            m.rho_in_S,
            numpy.linspace(0.0, config["markov.t"], config["markov.n_times"]),
        )
        expected = _dephasing_oracle(
            m.sys_obs, m.rho_in_S.matrix, ladder["kappa"], times
        )

    distances = ladder["trace_dist"]
    ratios = distances[:-1] / distances[1:]
    metrics = {
        "convergence": metric(
            numpy.abs(ratios / 2 - 1).max(), config["thresholds.convergence"]
        ),
        "dephasing_error": metric(
            numpy.abs(coherence - expected).max(), config["thresholds.dephasing"]
        ),
    }
    tables = {
        "markov.csv": pandas.DataFrame(
            {"dt": ladder["dt"], "trace_dist": ladder["trace_dist"]}
        ),
        "dephasing.csv": pandas.DataFrame({"t": times, "coherence": coherence}),
    }

    return ExperimentResult(
        metrics=metrics,
        tables=tables,
        plots={"markov.csv": "ladder", "dephasing.csv": "decay"},
    )


EXPERIMENTS: Dict[
    Experiment, Callable[[ExperimentConfig, Setup], ExperimentResult]
] = {
    Experiment.CHECK: run_check,
    Experiment.CONSISTENCY: run_consistency,
    Experiment.PIF: run_pif,
    Experiment.RPI_COMPARE: run_rpi_compare,
    Experiment.CORRIDOR_SCAN: run_corridor_scan,
    Experiment.MARKOV_LIMIT: run_markov_limit,
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Set up and run the experiment a configuration names."""
    with stage(f"setup {config.experiment.value}"):
        built = build_setup(config)

    return EXPERIMENTS[config.experiment](config, built)


def failed_metrics(result: ExperimentResult) -> List[str]:
    """Names of metrics outside their tolerance."""
    return [name for name, item in result["metrics"].items() if not item["passed"]]
