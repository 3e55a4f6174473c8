"""Flat key = value pipeline configuration with CLI overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

METHODS = ("walk", "clamped", "bestpath", "pmi")


@dataclass
class PipelineConfig:
    """Everything one pipeline run needs, with defaults matching the
    recommended settings: window 4, smoothing 0.75, 300 dimensions,
    50 bootstrap runs of 7 seeds per side."""

    corpus: str = ""
    stopwords: str = ""
    seeds_positive: str = ""
    seeds_negative: str = ""
    output_dir: str = "."
    min_count: int = 5
    top_n: int | None = None
    lowercase: bool = True
    window_size: int = 4
    smoothing: float = 0.75
    embedding_dim: int = 300
    svd_seed: int = 0
    graph_k: int = 25
    beta: float = 0.9
    tol: float = 1e-6
    max_iter: int = 500
    bootstrap_b: int = 50
    subset_size: int = 7
    bootstrap_seed: int = 0
    workers: int = 1
    method: str = "walk"
    bestpath_k: int = 25
    bestpath_hops: int = 4
    pmi_alpha: float = 0.01

    def validate(self) -> None:
        checks = [
            (self.min_count >= 1, "min_count must be >= 1"),
            (self.top_n is None or self.top_n >= 1, "top_n must be >= 1"),
            (self.window_size >= 1, "window_size must be >= 1"),
            (0.0 < self.smoothing <= 1.0, "smoothing must be in (0, 1]"),
            (self.embedding_dim >= 1, "embedding_dim must be >= 1"),
            (self.graph_k >= 1, "graph_k must be >= 1"),
            (0.0 < self.beta < 1.0, "beta must be in (0, 1)"),
            (self.tol > 0.0, "tol must be > 0"),
            (self.max_iter >= 1, "max_iter must be >= 1"),
            (self.bootstrap_b >= 2, "bootstrap_b must be >= 2"),
            (self.subset_size >= 1, "subset_size must be >= 1"),
            (self.workers >= 1, "workers must be >= 1"),
            (self.method in METHODS, f"method must be one of {', '.join(METHODS)}"),
            (self.bestpath_k >= 1, "bestpath_k must be >= 1"),
            (self.bestpath_hops >= 1, "bestpath_hops must be >= 1"),
            (self.pmi_alpha > 0.0, "pmi_alpha must be > 0"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def _parse_value(key: str, raw: str):
    f = _FIELDS[key]
    raw = raw.strip()
    if f.type in ("int | None",):
        if raw.lower() in ("", "none"):
            return None
        return _parse_scalar(key, raw, int)
    if f.type == "bool":
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if f.type == "int":
        return _parse_scalar(key, raw, int)
    if f.type == "float":
        return _parse_scalar(key, raw, float)
    return raw


def _parse_scalar(key: str, raw: str, typ):
    try:
        return typ(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected {typ.__name__}, got {raw!r}") from None


def parse_assignments(pairs: list[str]) -> dict:
    """Parse 'key=value' strings as produced by repeated --set flags."""
    out = {}
    for pair in pairs:
        key, eq, value = pair.partition("=")
        key = key.strip()
        if not eq:
            raise ConfigError(f"override {pair!r} is not of the form key=value")
        if key not in _FIELDS:
            raise ConfigError(f"unknown configuration key {key!r}")
        out[key] = _parse_value(key, value)
    return out


def load_config(
    path: str | Path | None, overrides: dict | None = None
) -> PipelineConfig:
    """Read a 'key = value' config file and apply overrides on top."""
    values: dict = {}
    if path is not None:
        base = Path(path).parent
        try:
            fh = open(path, encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        with fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, eq, value = line.partition("=")
                key = key.strip()
                if not eq:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                if key not in _FIELDS:
                    raise ConfigError(f"{path}:{lineno}: unknown configuration key {key!r}")
                parsed = _parse_value(key, value)
                # path-valued keys resolve relative to the config file
                if key in ("corpus", "stopwords", "seeds_positive",
                           "seeds_negative", "output_dir") and parsed:
                    parsed = str((base / parsed).resolve()) if not Path(parsed).is_absolute() else parsed
                values[key] = parsed
    if overrides:
        values.update(overrides)
    cfg = PipelineConfig(**values)
    cfg.validate()
    return cfg
