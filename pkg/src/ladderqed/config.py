"""Experiment configuration: schema, validation, presets.

Configs are JSON documents with a fail-closed schema: unknown keys are
errors.  A config fully determines a run; the sweep field fans out into
independent runs, each a list of dotted-path overrides.

Top-level schema::

    {
      "experiment": "bands" | "chiral-emission" | "loss-reflection" |
                    "bound-state" | "size-sweep" | "dipole-rabi",
      "model":    {"t", "t_prime", "phi", "n_cells", "boundary", "kappa"},
      "emitters": [{"delta_q", "g", "points": [[x, "A"|"B"], ...]}, ...],
      "numeric":  {optional solver overrides, see NUMERIC_KEYS},
      "output":   "relative/or/absolute/dir",
      "sweep":    [{"name": str, "set": {"dotted.path": value, ...}}, ...]
    }
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import EmitterSpec
from .errors import ConfigError, ParameterError
from .lattice import LadderParams, Site

EXPERIMENTS = (
    "bands",
    "chiral-emission",
    "loss-reflection",
    "bound-state",
    "size-sweep",
    "dipole-rabi",
)

MODEL_KEYS = ("t", "t_prime", "phi", "n_cells", "boundary", "kappa")
EMITTER_KEYS = ("delta_q", "g", "points")
NUMERIC_KEYS = (
    "n_k",
    "t_final",
    "stride",
    "snapshot_times",
    "origin",
    "fit_t_min",
    "fit_t_max",
    "quadrature_points",
    "d_max",
    "plateau_fraction",
    "rabi_samples",
    "self_energy_y_max_factor",
)
TOP_KEYS = ("experiment", "model", "emitters", "numeric", "output", "sweep")


@dataclass
class NumericParams:
    """Optional numeric overrides with experiment-appropriate defaults."""

    n_k: int = 2001
    t_final: float | None = None
    stride: float | None = None
    snapshot_times: tuple[float, ...] | None = None
    origin: int | None = None
    fit_t_min: float | None = None
    fit_t_max: float | None = None
    quadrature_points: int = 20001
    d_max: int = 12
    plateau_fraction: float = 0.2
    rabi_samples: int = 400
    self_energy_y_max_factor: float = 3.0


@dataclass
class ExperimentConfig:
    experiment: str
    model: LadderParams
    emitters: list[EmitterSpec]
    numeric: NumericParams = field(default_factory=NumericParams)
    output: str = "out"
    sweep: list[dict] = field(default_factory=list)


def _require_mapping(obj, name: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{name} must be an object", field=name)
    return obj


def _check_keys(mapping: dict, allowed, name: str):
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {name}: {', '.join(unknown)}", field=unknown[0])


def _parse_model(raw: dict) -> LadderParams:
    _check_keys(raw, MODEL_KEYS, "model")
    for key in ("t", "t_prime", "phi", "n_cells"):
        if key not in raw:
            raise ConfigError(f"model is missing required field '{key}'", field=f"model.{key}")
    try:
        return LadderParams(
            t=float(raw["t"]),
            t_prime=float(raw["t_prime"]),
            phi=float(raw["phi"]),
            n_cells=int(raw["n_cells"]),
            boundary=str(raw.get("boundary", "open")),
            kappa=float(raw.get("kappa", 0.0)),
        )
    except ParameterError as exc:
        raise ConfigError(f"invalid model: {exc}", field="model") from exc


def _parse_emitter(raw: dict, index: int) -> EmitterSpec:
    name = f"emitters[{index}]"
    _check_keys(raw, EMITTER_KEYS, name)
    for key in EMITTER_KEYS:
        if key not in raw:
            raise ConfigError(f"{name} is missing required field '{key}'", field=f"{name}.{key}")
    try:
        points = tuple(Site(int(x), str(leg)) for x, leg in raw["points"])
        return EmitterSpec(delta_q=float(raw["delta_q"]), g=float(raw["g"]), points=points)
    except (ParameterError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {name}: {exc}", field=name) from exc


def _parse_numeric(raw: dict) -> NumericParams:
    _check_keys(raw, NUMERIC_KEYS, "numeric")
    numeric = NumericParams()
    for key, value in raw.items():
        if key == "snapshot_times" and value is not None:
            value = tuple(float(v) for v in value)
        setattr(numeric, key, value)
    return numeric


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a raw JSON object into an ExperimentConfig (fail-closed)."""
    _require_mapping(raw, "config")
    _check_keys(raw, TOP_KEYS, "config")
    if "experiment" not in raw:
        raise ConfigError("config is missing required field 'experiment'", field="experiment")
    experiment = raw["experiment"]
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; valid: {', '.join(EXPERIMENTS)}",
            field="experiment",
        )
    if "model" not in raw:
        raise ConfigError("config is missing required field 'model'", field="model")
    model = _parse_model(_require_mapping(raw["model"], "model"))
    emitters = [
        _parse_emitter(_require_mapping(e, f"emitters[{i}]"), i)
        for i, e in enumerate(raw.get("emitters", []))
    ]
    for i, em in enumerate(emitters):
        for p in em.points:
            if p.x >= model.n_cells:
                raise ConfigError(
                    f"emitters[{i}] point x={p.x} outside lattice of {model.n_cells} cells",
                    field=f"emitters[{i}].points",
                )
    numeric = _parse_numeric(_require_mapping(raw.get("numeric", {}), "numeric"))
    sweep = raw.get("sweep", [])
    if not isinstance(sweep, list):
        raise ConfigError("sweep must be a list", field="sweep")
    for i, entry in enumerate(sweep):
        _require_mapping(entry, f"sweep[{i}]")
        _check_keys(entry, ("name", "set"), f"sweep[{i}]")
        if "name" not in entry or "set" not in entry:
            raise ConfigError(f"sweep[{i}] needs 'name' and 'set'", field=f"sweep[{i}]")

    config = ExperimentConfig(
        experiment=experiment,
        model=model,
        emitters=emitters,
        numeric=numeric,
        output=str(raw.get("output", "out")),
        sweep=list(sweep),
    )
    _validate_experiment(config)
    return config


def _validate_experiment(config: ExperimentConfig):
    needs_emitter = {
        "chiral-emission": 1,
        "loss-reflection": 1,
        "bound-state": 1,
        "size-sweep": 1,
        "dipole-rabi": 2,
    }
    required = needs_emitter.get(config.experiment)
    if required is not None and len(config.emitters) != required:
        raise ConfigError(
            f"experiment {config.experiment!r} needs exactly {required} emitter(s), "
            f"got {len(config.emitters)}",
            field="emitters",
        )
    if config.experiment == "size-sweep" and len(config.emitters[0].points) != 2:
        raise ConfigError("size-sweep needs a two-point template emitter", field="emitters")


def config_to_raw(config: ExperimentConfig) -> dict:
    """Inverse of parse_config, for printing presets and applying overrides."""
    raw = {
        "experiment": config.experiment,
        "model": {
            "t": config.model.t,
            "t_prime": config.model.t_prime,
            "phi": config.model.phi,
            "n_cells": config.model.n_cells,
            "boundary": config.model.boundary,
            "kappa": config.model.kappa,
        },
        "emitters": [
            {
                "delta_q": em.delta_q,
                "g": em.g,
                "points": [[p.x, p.leg] for p in em.points],
            }
            for em in config.emitters
        ],
        "numeric": {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in vars(config.numeric).items()
            if v is not None and v != getattr(NumericParams(), k)
        },
        "output": config.output,
    }
    if config.sweep:
        raw["sweep"] = copy.deepcopy(config.sweep)
    return raw


def apply_override(raw: dict, dotted: str, value):
    """Set a dotted-path key in a raw config dict, fail-closed on bad paths."""
    parts = dotted.split(".")
    node = raw
    for i, part in enumerate(parts[:-1]):
        if part.endswith("]") and "[" in part:
            key, idx = part[:-1].split("[")
            try:
                node = node[key][int(idx)]
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise ConfigError(f"no such config path: {dotted}", field=dotted) from exc
        else:
            if not isinstance(node, dict) or part not in node and i == 0 and part not in TOP_KEYS:
                raise ConfigError(f"no such config path: {dotted}", field=dotted)
            node = node.setdefault(part, {})
            if not isinstance(node, (dict, list)):
                raise ConfigError(f"config path {dotted} does not address a field", field=dotted)
    leaf = parts[-1]
    if isinstance(node, dict):
        node[leaf] = value
    else:
        raise ConfigError(f"no such config path: {dotted}", field=dotted)


def load_config_file(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}", field=None) from exc
    return parse_config(raw)


# --------------------------------------------------------------------------
# Figure presets.  Common waveguide: t'=1, t=2, phi=pi/3.  The chiral runs
# use the reconstructed detuning -2.042 (flagged in manifests).  Emitters
# sit at the chain center so both propagation directions exist.
# --------------------------------------------------------------------------

_COMMON_MODEL = {"t": 2.0, "t_prime": 1.0, "phi": np.pi / 3}

DELTA_Q_CHIRAL = -2.042  # reconstructed from eta^2/(2 f(k_r)^2) = 0.058
DELTA_Q_BOUND = -4.2


def _preset_fig2() -> dict:
    return {
        "experiment": "bands",
        "model": {**_COMMON_MODEL, "n_cells": 1000, "boundary": "periodic", "kappa": 0.0},
        "emitters": [
            {"delta_q": DELTA_Q_CHIRAL, "g": 0.4, "points": [[500, "A"]]},
        ],
        "numeric": {"n_k": 2001},
        "output": "out/fig2",
    }


def _preset_fig3() -> dict:
    return {
        "experiment": "chiral-emission",
        "model": {**_COMMON_MODEL, "n_cells": 1000, "boundary": "open", "kappa": 0.0},
        "emitters": [
            {"delta_q": DELTA_Q_CHIRAL, "g": 0.4, "points": [[500, "A"]]},
        ],
        "numeric": {"t_final": 100.0, "stride": 1.0, "fit_t_min": 5.0, "fit_t_max": 80.0},
        "output": "out/fig3",
        "sweep": [
            {"name": "markovian-g0.4", "set": {}},
            {"name": "strong-g3", "set": {"emitters[0].g": 3.0}},
        ],
    }


def _preset_fig4() -> dict:
    return {
        "experiment": "loss-reflection",
        "model": {**_COMMON_MODEL, "n_cells": 1000, "boundary": "open", "kappa": 0.01},
        "emitters": [
            {"delta_q": DELTA_Q_CHIRAL, "g": 0.4, "points": [[500, "A"]]},
        ],
        "numeric": {"t_final": 180.0, "stride": 2.0, "snapshot_times": [100.0, 180.0]},
        "output": "out/fig4",
        "sweep": [
            {"name": "lossless-t100", "set": {"model.kappa": 0.0, "numeric.t_final": 100.0}},
            {"name": "lossy-t100", "set": {"numeric.t_final": 100.0}},
            {"name": "lossy-t180", "set": {}},
        ],
    }


def _preset_fig6() -> dict:
    return {
        "experiment": "bound-state",
        "model": {**_COMMON_MODEL, "n_cells": 400, "boundary": "open", "kappa": 0.0},
        "emitters": [
            {"delta_q": DELTA_Q_BOUND, "g": 0.1, "points": [[199, "A"], [199, "A"]]},
        ],
        "numeric": {"t_final": 1000.0, "stride": 2.0},
        "output": "out/fig6",
        "sweep": [
            {"name": f"size-{ds}", "set": {"emitters[0].points": [[199, "A"], [199 + ds, "A"]]}}
            for ds in (0, 1, 2, 3)
        ],
    }


def _preset_fig7() -> dict:
    return {
        "experiment": "size-sweep",
        "model": {**_COMMON_MODEL, "n_cells": 400, "boundary": "open", "kappa": 0.0},
        "emitters": [
            {"delta_q": DELTA_Q_BOUND, "g": 0.1, "points": [[199, "A"], [199, "A"]]},
        ],
        "numeric": {"d_max": 12},
        "output": "out/fig7",
    }


def _preset_fig8() -> dict:
    # t_final is the small-atom exchange window pi/J12; the near-decoupled
    # giant pair is observed over the same window for comparison
    return {
        "experiment": "dipole-rabi",
        "model": {**_COMMON_MODEL, "n_cells": 100, "boundary": "open", "kappa": 0.0},
        "emitters": [
            {"delta_q": DELTA_Q_BOUND, "g": 0.015, "points": [[48, "A"], [48, "A"]]},
            {"delta_q": DELTA_Q_BOUND, "g": 0.015, "points": [[52, "A"], [52, "A"]]},
        ],
        "numeric": {"rabi_samples": 400, "t_final": 3200.0},
        "output": "out/fig8",
        "sweep": [
            {"name": "small-atoms", "set": {}},
            {
                "name": "giant-ds3",
                "set": {
                    "emitters[0].points": [[45, "A"], [48, "A"]],
                    "emitters[1].points": [[49, "A"], [52, "A"]],
                },
            },
        ],
    }


_PRESETS = {
    "fig2": _preset_fig2,
    "fig3": _preset_fig3,
    "fig4": _preset_fig4,
    "fig6": _preset_fig6,
    "fig7": _preset_fig7,
    "fig8": _preset_fig8,
}


def preset_names() -> tuple[str, ...]:
    return tuple(sorted(_PRESETS))


def preset_raw(name: str) -> dict:
    """Raw (JSON-ready) preset config for one figure."""
    if name not in _PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; valid presets: {', '.join(preset_names())}",
            field="preset",
        )
    return _PRESETS[name]()


def preset(name: str) -> ExperimentConfig:
    """Fully resolved, validated preset configuration."""
    return parse_config(preset_raw(name))
