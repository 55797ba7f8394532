"""Scenario configuration: JSON document plus key=value overrides."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

SCENARIOS = (
    "curvature-check",
    "connection-check",
    "bundle-identities",
    "linear-accel",
    "rotating-frame",
    "equivalence-principle",
)

GRID_DEFAULTS = {
    "rotating-frame": {"dims": 2, "N": 128, "L": 20.0},
}


class ConfigError(ValueError):
    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        super().__init__("; ".join(f"{k}: {msg}" for k, msg in problems))


@dataclass
class ScenarioConfig:
    scenario: str
    dims: int = 1
    N: int = 256
    L: float = 40.0
    m: float = 1.0
    g: float = 0.5
    omega: float = 0.5
    r: float = 2.0
    dt: float = 1e-3
    T: float = 1.0
    h: float = 1e-3
    sigma: float = 1.0
    fiber: int = 4
    patch_h: float = 0.1
    seed: int = 0
    record_every: int = 10
    tolerances: dict[str, float] = field(default_factory=dict)
    out: str = "out"
    format: str = "json"

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    def problems(self) -> list[tuple[str, str]]:
        p = []
        if self.scenario not in SCENARIOS:
            p.append(("scenario", f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}"))
        if self.dims not in (1, 2):
            p.append(("dims", "must be 1 or 2"))
        elif self.scenario == "rotating-frame" and self.dims != 2:
            p.append(("dims", "rotating-frame needs dims=2"))
        elif self.scenario in ("curvature-check", "connection-check", "linear-accel", "equivalence-principle") and self.dims != 1:
            p.append(("dims", f"{self.scenario} runs on a 1D grid"))
        if self.N < 8:
            p.append(("N", "need at least 8 points per axis"))
        for name in ("L", "m", "dt", "T", "h", "sigma", "patch_h"):
            if not getattr(self, name) > 0:
                p.append((name, "must be positive"))
        if self.r < 0:
            p.append(("r", "must be non-negative"))
        if self.fiber < 2:
            p.append(("fiber", "fiber dimension must be at least 2"))
        if self.record_every < 1:
            p.append(("record_every", "must be at least 1"))
        if self.format != "json":
            p.append(("format", "only 'json' reports are supported"))
        for k, v in self.tolerances.items():
            if not isinstance(v, (int, float)) or v < 0:
                p.append((f"tolerances.{k}", "must be a non-negative number"))
        return p

    def echo(self) -> dict[str, Any]:
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _coerce(key: str, raw: Any) -> Any:
    kind = _FIELD_TYPES[key]
    if kind == "int":
        if isinstance(raw, float) and not raw.is_integer():
            raise ValueError("expected an integer")
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "str":
        return str(raw)
    return raw


def parse_override(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise ConfigError([(text, "override must look like key=value")])
    key, value = text.split("=", 1)
    try:
        return key.strip(), json.loads(value)
    except json.JSONDecodeError:
        return key.strip(), value


def build_config(scenario: str, document: dict | None = None, overrides: list[str] = ()) -> ScenarioConfig:
    """Defaults < scenario grid defaults < config document < --set overrides."""
    values: dict[str, Any] = dict(GRID_DEFAULTS.get(scenario, {}))
    values.update(document or {})
    for item in overrides:
        key, val = parse_override(item)
        if key.startswith("tolerances."):
            values.setdefault("tolerances", {})
            values["tolerances"] = {**values["tolerances"], key.split(".", 1)[1]: val}
        else:
            values[key] = val
    values.pop("scenario", None)
    problems = []
    clean = {}
    for key, val in values.items():
        if key not in _FIELD_TYPES:
            problems.append((key, "unknown field"))
            continue
        try:
            clean[key] = _coerce(key, val)
        except (TypeError, ValueError) as exc:
            problems.append((key, f"bad value {val!r}: {exc}"))
    if "tolerances" in clean and not isinstance(clean["tolerances"], dict):
        problems.append(("tolerances", "must be a mapping of check name to tolerance"))
        clean.pop("tolerances")
    if problems:
        raise ConfigError(problems)
    cfg = ScenarioConfig(scenario=scenario, **clean)
    problems = cfg.problems()
    if problems:
        raise ConfigError(problems)
    return cfg


def load_document(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError([("config", f"cannot read {path}: {exc}")]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([("config", f"{path} is not valid JSON: {exc}")]) from exc
    if not isinstance(doc, dict):
        raise ConfigError([("config", "top level must be an object")])
    return doc
