"""Strict run-configuration parsing for the command-line front end.

A run config is a YAML (or JSON) mapping with the sections below; every
section is optional and any unknown key is rejected with its dotted name
and source line.

.. code-block:: yaml

    seed: 7
    output: runs/demo
    system: {packet_count: 128, snr_db: 20}
    paths:                      # explicit ground truth, or ...
      dynamic: [{gain: [1, 0], doppler: 120, delay: 1.0e-7, aoa: 0.3}]
      static: [{gain: [2, 0], delay: 5.0e-8, aoa: -0.2}]
    scenario: {n_dynamic: 1, n_static: 5}   # ... a randomization recipe
    offsets: {kind: iid-uniform}
    estimator: {n_paths: 1, static_mode: oracle}
    sweep: {snr_db: [0, 10, 20], trials: 20}
    convergence: {L_values: [0, 1, 2], Ls_values: [1, 2], trials: 50}
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path as FsPath
from typing import Any, Optional

import numpy as np
import yaml

from .delay import STATIC_MODES
from .doppler import SELECTIONS
from .exceptions import InvalidConfigError
from .signal_model import OffsetModel, PathSet, ScenarioSpec, SystemConfig, random_paths

ESTIMATOR_KEYS = {"n_paths", "static_mode", "selection", "pairing", "los_delay", "los_phi",
                  "guard_threshold", "joint_window_count"}
SWEEP_KEYS = {"snr_db", "trials"}
CONVERGENCE_KEYS = {"L_values", "Ls_values", "trials", "p", "q", "los", "los_advantage_db"}
SPECTRUM_KEYS = {"min_doppler_gap", "min_sin_gap"}
TOP_KEYS = {"seed", "output", "system", "paths", "scenario", "offsets", "estimator", "sweep", "convergence",
            "spectrum"}


class ConfigError(InvalidConfigError):
    """Config error annotated with the offending field and line."""

    def __init__(self, message, field_name: Optional[str] = None, line: Optional[int] = None):
        self.field_name = field_name
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field_name:
            where.append(f"field '{field_name}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


def _line_map(node, prefix="", out=None) -> dict:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            name = f"{prefix}.{key.value}" if prefix else str(key.value)
            out[name] = key.start_mark.line + 1
            _line_map(value, name, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, value in enumerate(node.value):
            name = f"{prefix}[{i}]"
            out[name] = value.start_mark.line + 1
            _line_map(value, name, out)
    return out


@dataclass
class RunConfig:
    seed: int = 0
    output: Optional[str] = None
    system: SystemConfig = field(default_factory=SystemConfig)
    paths: Optional[PathSet] = None
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    offsets: OffsetModel = field(default_factory=OffsetModel)
    estimator: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    convergence: dict = field(default_factory=dict)
    spectrum: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def n_paths(self) -> int:
        if "n_paths" in self.estimator:
            return int(self.estimator["n_paths"])
        return self.paths.n_dynamic if self.paths is not None else self.scenario.n_dynamic


def _check_keys(section: dict, allowed: set, prefix: str, lines: dict):
    if not isinstance(section, dict):
        raise ConfigError("expected a mapping", prefix or None, lines.get(prefix))
    for key in section:
        if key not in allowed:
            name = f"{prefix}.{key}" if prefix else str(key)
            raise ConfigError(f"unknown key '{key}' (allowed: {sorted(allowed)})", name, lines.get(name))


def _dataclass_keys(cls) -> set:
    return {f.name for f in fields(cls)}


def _tuples(data: dict) -> dict:
    return {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}


def parse_run_config(data: Any, lines: Optional[dict] = None) -> RunConfig:
    """Validate a parsed mapping into a :class:`RunConfig`."""
    lines = lines or {}
    if data is None:
        data = {}
    _check_keys(data, TOP_KEYS, "", lines)

    def build(name, fn):
        try:
            return fn()
        except ConfigError:
            raise
        except (InvalidConfigError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc), name, lines.get(name)) from exc

    cfg = RunConfig(raw=data)
    cfg.seed = build("seed", lambda: int(data.get("seed", 0)))
    cfg.output = data.get("output")
    if "system" in data:
        _check_keys(data["system"], _dataclass_keys(SystemConfig), "system", lines)
        cfg.system = build("system", lambda: SystemConfig.from_dict(data["system"]))
    if "paths" in data:
        _check_keys(data["paths"], {"dynamic", "static"}, "paths", lines)
        for kind in ("dynamic", "static"):
            for i, p in enumerate(data["paths"].get(kind, []) or []):
                _check_keys(p, {"gain", "doppler", "delay", "aoa"}, f"paths.{kind}[{i}]", lines)
        cfg.paths = build("paths", lambda: PathSet.from_dict(data["paths"]))
        build("paths", lambda: cfg.paths.check_delays(cfg.system))
    if "scenario" in data:
        _check_keys(data["scenario"], _dataclass_keys(ScenarioSpec), "scenario", lines)
        cfg.scenario = build("scenario", lambda: ScenarioSpec(**_tuples(data["scenario"])))
        if cfg.scenario.n_static < 1:
            raise ConfigError("L_S >= 1 static paths are required", "scenario.n_static",
                              lines.get("scenario.n_static"))
    if "offsets" in data:
        _check_keys(data["offsets"], _dataclass_keys(OffsetModel), "offsets", lines)
        cfg.offsets = build("offsets", lambda: OffsetModel(**_tuples(data["offsets"])))
        if cfg.offsets.kind not in OffsetModel.KINDS:
            raise ConfigError(f"kind must be one of {OffsetModel.KINDS}", "offsets.kind",
                              lines.get("offsets.kind"))
    for name, allowed in (("estimator", ESTIMATOR_KEYS), ("sweep", SWEEP_KEYS),
                          ("convergence", CONVERGENCE_KEYS), ("spectrum", SPECTRUM_KEYS)):
        if name in data:
            _check_keys(data[name], allowed, name, lines)
            setattr(cfg, name, dict(data[name]))
    est = cfg.estimator
    if est.get("static_mode", "oracle") not in STATIC_MODES:
        raise ConfigError(f"must be one of {STATIC_MODES}", "estimator.static_mode",
                          lines.get("estimator.static_mode"))
    if est.get("selection", "auto") not in SELECTIONS:
        raise ConfigError(f"must be one of {SELECTIONS}", "estimator.selection", lines.get("estimator.selection"))
    if int(est.get("n_paths", 1)) < 1:
        raise ConfigError("must be >= 1", "estimator.n_paths", lines.get("estimator.n_paths"))
    trials = cfg.sweep.get("trials", 1)
    if not isinstance(trials, int) or trials < 1:
        raise ConfigError("must be a positive integer", "sweep.trials", lines.get("sweep.trials"))
    return cfg


def load_run_config(path) -> RunConfig:
    """Read and validate a YAML/JSON run config; errors carry line numbers."""
    path = FsPath(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"parse error: {getattr(exc, 'problem', exc)}",
                          line=None if mark is None else mark.line + 1) from exc
    lines = _line_map(node) if node is not None else {}
    return parse_run_config(data, lines)


def draw_truth(cfg: RunConfig) -> PathSet:
    """Explicit ``paths`` when given, else a scenario draw seeded from ``cfg.seed``."""
    if cfg.paths is not None:
        return cfg.paths
    return random_paths(cfg.scenario, np.random.default_rng(np.random.SeedSequence([cfg.seed, 0])))
