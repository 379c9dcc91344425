"""Service/CLI configuration file handling (JSON)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional


@dataclass
class AppConfig:
    data_dir: str = "data/store"
    generations_path: str = "data/generations.jsonl"
    annotations_per_generation: int = 10
    seed: int = 0
    rng: str = "numpy-pcg64"  # the only supported generator
    host: str = "127.0.0.1"
    port: int = 8000
    require_qualification: bool = True
    qualification_key_path: Optional[str] = None

    @classmethod
    def from_obj(cls, obj: dict) -> "AppConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**obj)
        if cfg.rng != "numpy-pcg64":
            raise ValueError(f"unsupported rng {cfg.rng!r}; only 'numpy-pcg64' is available")
        return cfg


def load_config(path: Optional[str]) -> AppConfig:
    if path is None:
        return AppConfig()
    with open(path, encoding="utf-8") as f:
        return AppConfig.from_obj(json.load(f))
