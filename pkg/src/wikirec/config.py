"""Pipeline and service configuration.

Config files are flat ``key = value`` lines (# comments allowed). Unknown
keys are rejected so typos fail loudly instead of silently running with
defaults. Service settings also honor WIKIREC_* environment variables.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    quality_cutoff: float = 0.5
    rule_min_edits: int = 5
    rule_window_days: int = 30
    bonds_window_days: int = 90
    coedit_top_k: int = 5
    per_cell_n: int = 5
    allow_rerecommend: bool = False
    brand_new_max_edits: int = 50
    brand_new_recency_days: int = 30
    highly_experienced_min_edits: int = 3000
    quality_evidence_min: int = 10
    impact_window_days: int = 30

    def __post_init__(self) -> None:
        if not 0.0 <= self.quality_cutoff <= 1.0:
            raise ConfigError(f"quality_cutoff must be in [0, 1], got {self.quality_cutoff}")
        for name in (
            "rule_min_edits",
            "rule_window_days",
            "bonds_window_days",
            "coedit_top_k",
            "per_cell_n",
            "brand_new_max_edits",
            "brand_new_recency_days",
            "highly_experienced_min_edits",
            "quality_evidence_min",
            "impact_window_days",
        ):
            value = getattr(self, name)
            if value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")


_BOOL_WORDS = {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}


def _coerce(name: str, raw: str, kind: type):
    raw = raw.strip()
    if kind is bool:
        try:
            return _BOOL_WORDS[raw.lower()]
        except KeyError:
            raise ConfigError(f"{name}: expected a boolean, got {raw!r}") from None
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{name}: expected {kind.__name__}, got {raw!r}") from None


def parse_config_text(text: str, source: str = "<config>") -> PipelineConfig:
    known = {f.name: f.type for f in fields(PipelineConfig)}
    types = {"quality_cutoff": float, "allow_rerecommend": bool}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in known:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = _coerce(key, raw, types.get(key, int))
    return PipelineConfig(**values)


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    p = Path(path)
    return parse_config_text(p.read_text(encoding="utf-8"), source=str(p))


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: Path = Path("data")
    port: int = 8340
    token: str = "change-me"

    def with_env(self) -> "ServiceConfig":
        out = self
        if "WIKIREC_DATA_DIR" in os.environ:
            out = replace(out, data_dir=Path(os.environ["WIKIREC_DATA_DIR"]))
        if "WIKIREC_PORT" in os.environ:
            out = replace(out, port=int(os.environ["WIKIREC_PORT"]))
        if "WIKIREC_TOKEN" in os.environ:
            out = replace(out, token=os.environ["WIKIREC_TOKEN"])
        return out
