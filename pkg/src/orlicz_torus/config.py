"""Run configuration: YAML file validated against a JSON schema, then CLI overrides."""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Any, Optional

import jsonschema
import yaml

from .errors import ConfigError, OrliczTorusError
from .qtorus import ThetaMatrix
from .young import YoungFunction, parse_young

_num_list = {"type": "array", "items": {"type": "number"}, "minItems": 1}


def _block(props: dict) -> dict:
    return {"type": "object", "additionalProperties": False, "properties": props}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "orlicz-torus run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "d": {"type": "integer", "minimum": 1, "maximum": 4},
        "R": {"type": "integer", "minimum": 1},
        "theta": {"type": "array", "items": {"type": "number"}},
        "s": {"type": "number", "exclusiveMinimum": 0},
        "phi": {"type": "string", "minLength": 1},
        "seed": {"type": "integer", "minimum": 0},
        "spectrum": _block(
            {
                "R": {"type": "integer", "minimum": 1},
                "R_1d": {"type": "integer", "minimum": 1},
            }
        ),
        "scan": _block(
            {
                "radii": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2},
                "plateau_tol": {"type": "number", "exclusiveMinimum": 0},
            }
        ),
        "factorize": _block(
            {
                "n_vectors": {"type": "integer", "minimum": 1},
                "n_families": {"type": "integer", "minimum": 0},
                "n_jobs": {"type": "integer", "minimum": 1},
            }
        ),
        "ideal": _block({"trials": {"type": "integer", "minimum": 1}}),
        "pde": _block(
            {
                "V": {"type": ["object", "null"]},
                "c": {"type": "number", "exclusiveMinimum": 0},
                "c_large": {"type": "number", "exclusiveMinimum": 0},
                "trials": {"type": "integer", "minimum": 1},
                "survey_trials": {"type": "integer", "minimum": 1},
            }
        ),
        "heat": _block(
            {
                "t_list": {**_num_list, "items": {"type": "number", "exclusiveMinimum": 0}},
                "trials": {"type": "integer", "minimum": 1},
                "scaling_t": {**_num_list, "items": {"type": "number", "exclusiveMinimum": 0}},
                "p": {"type": "number", "minimum": 1},
            }
        ),
        "metric": _block(
            {
                "trials": {"type": "integer", "minimum": 1},
                "n_random": {"type": "integer", "minimum": 0},
                "perturbations": _num_list,
            }
        ),
    },
}

DEFAULTS: dict = {
    "d": 2,
    "R": 6,
    "theta": [0.3],
    "s": 1.0,
    "phi": "powerlog:p=2.5,alpha=0",
    "seed": 42,
    "spectrum": {"R": 40, "R_1d": 200},
    "scan": {"radii": [4, 8, 16, 32], "plateau_tol": 0.02},
    "factorize": {"n_vectors": 100, "n_families": 200, "n_jobs": 1},
    "ideal": {"trials": 30},
    "pde": {"V": None, "c": 1.0, "c_large": 10.0, "trials": 50, "survey_trials": 20},
    "heat": {"t_list": [0.01, 0.1], "trials": 30, "scaling_t": [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1], "p": 2.0},
    "metric": {"trials": 50, "n_random": 100, "perturbations": [0.01, 0.1, 0.5, 1.0]},
}


def _node_line(root, path) -> Optional[int]:
    node = root
    for key in path:
        if isinstance(node, yaml.MappingNode):
            match = [v for k, v in node.value if k.value == key]
            if not match:
                break
            node = match[0]
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
    return None if node is None else node.start_mark.line + 1


def _deep_merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate(data: Any, source: str = "<config>", root=None) -> None:
    """Raise ConfigError listing every schema violation with key path and line."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    problems = []
    for err in sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path))):
        path = list(err.absolute_path)
        key = ".".join(map(str, path)) or "<root>"
        if err.validator == "additionalProperties" and root is not None:
            extra = [k for k in err.instance if k not in err.schema.get("properties", {})]
            for k in extra:
                line = _node_line(root, path + [k])
                problems.append(f"{source}:{line}: unknown key '{'.'.join(map(str, path + [k]))}'")
            continue
        line = _node_line(root, path) if root is not None else None
        where = f"{source}:{line}" if line else source
        problems.append(f"{where}: {key}: {err.message}")
    if problems:
        raise ConfigError("invalid configuration\n  " + "\n  ".join(problems))


def load_text(text: str, source: str = "<config>") -> dict:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark is not None else source
        raise ConfigError(f"{where}: cannot parse YAML: {getattr(exc, 'problem', exc)}") from exc
    data = {} if data is None else data
    validate(data, source, root)
    return data


@dataclass(frozen=True)
class RunConfig:
    data: dict

    @classmethod
    def from_sources(cls, path: Optional[str] = None, overrides: Optional[dict] = None) -> "RunConfig":
        user = {}
        if path is not None:
            try:
                with open(path) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            user = load_text(text, path)
        overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        merged = _deep_merge(DEFAULTS, user)
        merged.update(overrides)
        d = merged["d"]
        n_theta = d * (d - 1) // 2
        if "theta" not in user and "theta" not in overrides:
            merged["theta"] = ([DEFAULTS["theta"][0]] + [0.0] * n_theta)[:n_theta]
        elif len(merged["theta"]) != n_theta:
            raise ConfigError(f"theta: expected {n_theta} upper-triangle entries for d={d}, got {len(merged['theta'])}")
        validate(merged, "<merged config>")
        cfg = cls(merged)
        try:
            cfg.phi
        except OrliczTorusError as exc:
            raise ConfigError(f"phi: {exc}") from exc
        return cfg

    def __getitem__(self, key):
        return self.data[key]

    @property
    def d(self) -> int:
        return int(self.data["d"])

    @property
    def R(self) -> int:
        return int(self.data["R"])

    @property
    def s(self) -> float:
        return float(self.data["s"])

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def theta(self) -> ThetaMatrix:
        return ThetaMatrix(self.d, tuple(float(x) for x in self.data["theta"]))

    @property
    def phi(self) -> YoungFunction:
        return parse_young(self.data["phi"])

    def block(self, name: str) -> dict:
        return self.data[name]
