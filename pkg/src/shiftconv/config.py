"""Runtime configuration.

Values come from dataclass defaults, optionally overridden by a flat
``key=value`` text file and then by command-line flags. The cache directory
can also be set through the ``SHIFTCONV_CACHE_DIR`` environment variable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

CACHE_ENV_VAR = "SHIFTCONV_CACHE_DIR"


@dataclass(frozen=True)
class Config:
    cache_dir: Path = Path(".shiftconv-cache")
    memory_budget: int = 200_000_000  # sieve/table entries
    quad_tol: float = 1e-12
    cutoff_eps: float = 0.1
    safety_factor: float = 10.0
    threads: int = 1
    op_budget: int = 2_000_000_000  # multiply-adds allowed in direct sums
    maass_kernels: bool = False

    def __post_init__(self):
        for name in ("memory_budget", "quad_tol", "cutoff_eps", "safety_factor", "threads", "op_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"config value {name} must be positive")

    def with_overrides(self, **kw) -> "Config":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **_coerce(kw))


def _coerce(raw: dict) -> dict:
    types = {f.name: f.type for f in fields(Config)}
    out = {}
    for key, val in raw.items():
        if key not in types:
            raise KeyError(f"unknown config key: {key}")
        t = types[key]
        if not isinstance(val, str):
            out[key] = Path(val) if t == "Path" else val
        elif t == "Path":
            out[key] = Path(val)
        elif t == "int":
            out[key] = int(float(val))
        elif t == "float":
            out[key] = float(val)
        elif t == "bool":
            out[key] = val.strip().lower() in ("1", "true", "yes", "on")
        else:
            out[key] = val
    return out


def parse_config_text(text: str) -> dict:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value")
        key, val = line.split("=", 1)
        raw[key.strip()] = val.strip()
    return raw


def load_config(path: str | os.PathLike | None = None, env: dict | None = None) -> Config:
    env = os.environ if env is None else env
    cfg = Config()
    if path is not None:
        cfg = cfg.with_overrides(**parse_config_text(Path(path).read_text()))
    if env.get(CACHE_ENV_VAR):
        cfg = cfg.with_overrides(cache_dir=env[CACHE_ENV_VAR])
    return cfg
