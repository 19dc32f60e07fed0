"""
RPIlab: Experiment configuration files.

Configurations are UTF-8 TOML with flat dotted keys, for example

    experiment = "consistency"
    model.preset = "von_neumann_strong"
    scheme.K = 4
    window.width = 0.5

Tables written as [model] sections are flattened to the same dotted keys. Every
key is checked against a declared schema, and unknown keys are rejected.

Copyright 2024 RPIlab Developers
"""

from enum import Enum
import pathlib
import sys
from typing import Any, Dict, NamedTuple, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class Experiment(Enum):
    """Named experiments of the runner."""

    CHECK = "check"
    CONSISTENCY = "consistency"
    PIF = "pif"
    RPI_COMPARE = "rpi-compare"
    CORRIDOR_SCAN = "corridor-scan"
    MARKOV_LIMIT = "markov-limit"


class ConfigError(ValueError):
    """Raised for unreadable, malformed, or inconsistent configurations."""


class KeySpec(NamedTuple):
    """Declared type and default of one configuration key."""

    kind: str  # One of "str", "int", "float", "bool", "floats".
    default: Any
    description: str


_REQUIRED = object()

# Key schema, flat dotted keys.
SCHEMA: Dict[str, KeySpec] = {
    "experiment": KeySpec("str", _REQUIRED, "experiment name"),
    "model.preset": KeySpec("str", _REQUIRED, "named preset"),
    "model.g": KeySpec("float", None, "coupling strength"),
    "model.n_grid": KeySpec("int", None, "pointer grid size"),
    "model.x_max": KeySpec("float", None, "pointer grid half width"),
    "model.sigma0": KeySpec("float", None, "initial pointer spread"),
    "model.omega_S": KeySpec("float", None, "system splitting"),
    "model.n_spins": KeySpec("int", None, "bath spin count"),
    "model.epsilon": KeySpec("float", None, "bath spin splitting"),
    "scheme.K": KeySpec("int", 2, "slice count"),
    "scheme.dt": KeySpec("float", 0.5, "slice duration"),
    "scheme.splitting": KeySpec("str", "exact-slice", "slice propagator"),
    "scheme.placement": KeySpec("str", "evolve-then-weight", "weight placement"),
    "window.kind": KeySpec("str", "box-partition", "window shape"),
    "window.width": KeySpec("float", 0.5, "box width or gaussian sigma"),
    "window.normalization": KeySpec("str", "amplitude", "window normalization"),
    "measure.n_nodes": KeySpec("int", 64, "gaussian nodes per slice"),
    "measure.n_sigma": KeySpec("float", 6.0, "gaussian range in sigma"),
    "measure.origin": KeySpec("float", 0.0, "box cell origin"),
    "measure.prune_tol": KeySpec("float", 0.0, "corridor prefix pruning"),
    "measure.prob_floor": KeySpec("float", 1.0e-12, "ratio probability floor"),
    "corridor.branch": KeySpec("int", 0, "tracked system eigenbranch"),
    "corridor.snap": KeySpec("bool", True, "snap pif corridor to measure nodes"),
    "compare.widths": KeySpec("floats", [2.0, 3.0, 8.5, 16.0], "box widths"),
    "scan.offsets": KeySpec("floats", None, "corridor center offsets"),
    "markov.sigma": KeySpec("float", 2.0, "window width at the first rung"),
    "markov.dts": KeySpec("floats", [0.1, 0.05, 0.025], "slice durations"),
    "markov.t": KeySpec("float", 1.0, "evolution time"),
    "markov.omega_x": KeySpec("float", 1.0, "transverse system field"),
    "markov.n_times": KeySpec("int", 21, "dephasing time samples"),
    "thresholds.reconstruction": KeySpec("float", 1.0e-10, "operator residual"),
    "thresholds.completeness": KeySpec("float", 1.0e-10, "probability residual"),
    "thresholds.pif_decomposition": KeySpec("float", 1.0e-9, "pif residual"),
    "thresholds.resolution": KeySpec("float", 1.0e-10, "window resolution"),
    "thresholds.consistency": KeySpec("float", 0.1, "consistency ratio"),
    "thresholds.env": KeySpec("float", 0.1, "environment ratio"),
    "thresholds.factorization": KeySpec("float", 0.1, "factorization residual"),
    "thresholds.trace_dist": KeySpec("float", 0.05, "rpi trace distance"),
    "thresholds.prob_rel_err": KeySpec("float", 0.05, "rpi probability error"),
    "thresholds.peak_offset": KeySpec("float", 0.0, "scan peak offset"),
    "thresholds.convergence": KeySpec("float", 0.25, "ladder ratio deviation"),
    "thresholds.dephasing": KeySpec("float", 1.0e-6, "dephasing error"),
    "output.dir": KeySpec("str", "output", "artifact directory"),
    "output.plots": KeySpec("bool", True, "emit svg plots"),
}


def _flatten(table: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat = {}

    for key, value in table.items():
        dotted = f"{prefix}{key}"

        if isinstance(value, dict):
            flat.update(_flatten(value, f"{dotted}."))
        else:
            flat[dotted] = value

    return flat


def _coerce(key: str, spec: KeySpec, value: Any) -> Any:
    if spec.kind == "str" and isinstance(value, str):
        return value

    if spec.kind == "bool" and isinstance(value, bool):
        return value

    if spec.kind == "int" and isinstance(value, int) and not isinstance(value, bool):
        return value

    if spec.kind == "float" and isinstance(value, (int, float)):
        if not isinstance(value, bool):
            return float(value)

    if spec.kind == "floats" and isinstance(value, list) and len(value) > 0:
        if all(
            isinstance(item, (int, float)) and not isinstance(item, bool)
            for item in value
        ):
            return [float(item) for item in value]

    raise ConfigError(f"key '{key}' expects {spec.kind}, got {value!r}")


class ExperimentConfig:
    """Validated experiment configuration over flat dotted keys."""

    def __init__(
        self, *, values: Dict[str, Any], base_dir: Optional[pathlib.Path] = None
    ) -> None:
        """
        Parameters
        ----------
        values
            Flat dotted keys and their values, defaults filled in for missing keys
        base_dir
            Directory that relative output paths resolve against

        Raises
        ------
        ConfigError
            If a key is unknown, a required key is missing, or a value has the wrong
            type
        """
        unknown = sorted(set(values) - set(SCHEMA))

        if unknown:
            raise ConfigError(f"unknown configuration keys {unknown}")

        resolved = {}

        for key, spec in SCHEMA.items():
            if key in values:
                resolved[key] = _coerce(key, spec, values[key])
            elif spec.default is _REQUIRED:
                raise ConfigError(f"missing required configuration key '{key}'")
            elif spec.default is not None:
                resolved[key] = (
                    list(spec.default) if spec.kind == "floats" else spec.default
                )

        try:
            experiment = Experiment(resolved["experiment"])
        except ValueError as exc:
            raise ConfigError(
                f"unrecognized experiment '{resolved['experiment']}', expected one "
                f"of {[e.value for e in Experiment]}"
            ) from exc

        self._values = resolved
        self._experiment = experiment
        self._base_dir = pathlib.Path(".") if base_dir is None else base_dir

    def __getitem__(self, key: str) -> Any:
        if key not in SCHEMA:
            raise KeyError(key)

        return self._values.get(key)

    def __contains__(self, key: str) -> bool:
        return key in self._values

    @property
    def experiment(self) -> Experiment:
        """Return experiment."""
        return self._experiment

    @property
    def output_dir(self) -> pathlib.Path:
        """Return artifact directory, relative paths taken from the config file."""
        path = pathlib.Path(self._values["output.dir"])

        return path if path.is_absolute() else self._base_dir / path

    def section(self, prefix: str) -> Dict[str, Any]:
        """Return keys set under a prefix, with the prefix stripped."""
        head = f"{prefix}."

        return {
            key[len(head) :]: value
            for key, value in self._values.items()
            if key.startswith(head)
        }

    def echo(self) -> Dict[str, Any]:
        """Return resolved keys in sorted order for the run summary."""
        return {key: self._values[key] for key in sorted(self._values)}


def parse_config(
    text: str, *, base_dir: Optional[pathlib.Path] = None
) -> ExperimentConfig:
    """Parse configuration text."""
    try:
        table = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc

    return ExperimentConfig(values=_flatten(table), base_dir=base_dir)


def load_config(path: pathlib.Path) -> ExperimentConfig:
    """
    Read and validate a configuration file.

    Raises
    ------
    ConfigError
        If the file cannot be read or decoded, or fails validation
    """
    path = pathlib.Path(path)

    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read configuration '{path}': {exc}") from exc

    return parse_config(text, base_dir=path.resolve().parent)

