"""Flat key = value pipeline configuration with typed validation.

Unknown keys are rejected with their line number; `#` starts a comment;
serialization round-trips exactly through load_config.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields

from .corpus import TOKENIZER_PROFILES
from .errors import ConfigError


@dataclass
class PipelineConfig:
    data_dir: str = ""
    work_dir: str = ""
    src_lang: str = "src"
    pivot_lang: str = "piv"
    tgt_lang: str = "tgt"
    selection_lang: str = ""  # empty: fall back to pivot_lang
    profile: str = "lowercase"
    max_len: int = 100
    max_ratio: float = 3.0
    dev_size: int = 100
    test_size: int = 100
    pool_factor: int = 2
    em_iterations: int = 5
    max_phrase_len: int = 10
    lm_order: int = 5
    beam_size: int = 100
    distortion_limit: int | None = 6
    nbest_size: int = 100
    use_lex_reordering: bool = True
    tune_rounds: int = 5
    samples: int = 1000
    level: float = 0.99
    seed: int = 1234
    jobs: int = 1

    def validate(self) -> None:
        positive = (
            "max_len", "pool_factor", "em_iterations", "max_phrase_len",
            "lm_order", "beam_size", "nbest_size", "tune_rounds", "samples",
            "jobs",
        )
        for key in positive:
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be >= 1, got {getattr(self, key)}")
        if self.max_ratio <= 0:
            raise ConfigError(f"max_ratio must be positive, got {self.max_ratio}")
        if not 0 < self.level <= 1:
            raise ConfigError(f"level must be in (0, 1], got {self.level}")
        if self.dev_size < 0 or self.test_size < 0:
            raise ConfigError("dev_size and test_size must be >= 0")
        if self.distortion_limit is not None and self.distortion_limit < 0:
            raise ConfigError("distortion_limit must be >= 0 or none")
        if self.profile not in TOKENIZER_PROFILES:
            raise ConfigError(f"unknown tokenizer profile: {self.profile!r}")
        if self.data_dir and not os.path.isdir(self.data_dir):
            raise ConfigError(f"data_dir does not exist: {self.data_dir}")


_FIELDS = {f.name: f for f in fields(PipelineConfig)}


def parse_value(key: str, text: str):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key: {key}")
    ftype = _FIELDS[key].type
    text = text.strip()
    try:
        if ftype == "int | None":
            return None if text.lower() == "none" else int(text)
        if ftype == "bool":
            if text.lower() not in ("true", "false"):
                raise ValueError(text)
            return text.lower() == "true"
        if ftype == "int":
            return int(text)
        if ftype == "float":
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}")


def load_config(path: str) -> PipelineConfig:
    cfg = PipelineConfig()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            try:
                setattr(cfg, key, parse_value(key, value))
            except ConfigError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    cfg.validate()
    return cfg


def serialize_config(cfg: PipelineConfig) -> str:
    lines = []
    for f in fields(PipelineConfig):
        value = getattr(cfg, f.name)
        if value is None:
            value = "none"
        elif isinstance(value, bool):
            value = str(value).lower()
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def save_config(cfg: PipelineConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_config(cfg))
