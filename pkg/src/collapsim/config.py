"""Experiment configuration: plain-text nested key-value sections.

Grammar (one construct per line, '#' starts a comment):

    key = value          top-level entry
    [section]            opens a (possibly dotted) section
    key = value          entry inside the open section

Values parse as int, float, bool (true/false), or comma-separated lists
thereof; anything else stays a string.  Unknown keys are rejected per
experiment, so the config file is the whole truth of a run.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

EXPERIMENTS = (
    "qmsl-hitting",
    "qmsl-master",
    "csl-born",
    "csl-equivalence",
    "csl-discrete",
    "colored-damping",
    "epr",
    "gisin",
    "rates-report",
    "decoherence-table",
    "mass-profile",
)

DEFAULT_SEED = 20_260_101


def _parse_scalar(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _parse_value(text: str):
    if "," in text:
        return [_parse_scalar(part) for part in text.split(",")]
    return _parse_scalar(text)


@dataclass
class ExperimentConfig:
    """Parsed experiment description."""

    experiment: str
    seed: int
    trajectories: int
    output: str
    fmt: str
    params: dict = field(default_factory=dict)
    source_text: str = ""
    defaults_applied: list[str] = field(default_factory=list)

    def config_hash(self) -> str:
        return hashlib.sha256(self.source_text.encode()).hexdigest()[:16]

    def require(self, *keys: str) -> None:
        missing = [k for k in keys if k not in self.params]
        if missing:
            raise ConfigError(
                f"experiment {self.experiment!r} is missing params: {missing}"
            )

    def reject_unknown(self, *allowed: str) -> None:
        unknown = sorted(set(self.params) - set(allowed))
        if unknown:
            raise ConfigError(
                f"experiment {self.experiment!r} got unknown params: {unknown}"
            )


_TOP_KEYS = ("experiment", "seed", "trajectories", "output", "format")


def parse_config_text(text: str) -> ExperimentConfig:
    top: dict = {}
    sections: dict[str, dict] = {}
    current: dict | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ConfigError(f"line {lineno}: empty section name")
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        target = top if current is None else current
        if key in target:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        target[key] = _parse_value(value)

    unknown_top = sorted(set(top) - set(_TOP_KEYS))
    if unknown_top:
        raise ConfigError(f"unknown top-level keys: {unknown_top}")
    if "experiment" not in top:
        raise ConfigError("missing required key 'experiment'")
    experiment = str(top["experiment"])
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}"
        )
    unknown_sections = sorted(set(sections) - {"params"})
    if unknown_sections:
        raise ConfigError(f"unknown sections: {unknown_sections}")

    defaults = []
    if "seed" not in top:
        defaults.append(f"seed defaulted to {DEFAULT_SEED}")
    seed = int(top.get("seed", DEFAULT_SEED))
    trajectories = int(top.get("trajectories", 0))
    fmt = str(top.get("format", "csv"))
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    return ExperimentConfig(
        experiment=experiment,
        seed=seed,
        trajectories=trajectories,
        output=str(top.get("output", experiment)),
        fmt=fmt,
        params=sections.get("params", {}),
        source_text=text,
        defaults_applied=defaults,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)
