"""Runtime configuration: defaults < config file < environment < flags.

The config file is a flat ``key = value`` text file; environment variables
use the CITADEL_ prefix (e.g. CITADEL_LISTEN_ADDRESS).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from typing import Optional

ENV_PREFIX = "CITADEL_"


@dataclass
class Config:
    listen_address: str = "127.0.0.1:8080"
    data_dir: str = "./citadel-data"
    session_ttl_hours: int = 12
    max_upload_mib: int = 50
    chat_longpoll_seconds: int = 25
    self_enrollment: bool = True

    @property
    def host(self) -> str:
        return self.listen_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_address.rsplit(":", 1)[1])

    @property
    def max_upload_bytes(self) -> int:
        return self.max_upload_mib * 1024 * 1024


def _coerce(name: str, raw: str, target_type: type):
    if target_type is bool:
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"config key {name}: expected boolean, got {raw!r}")
    if target_type is int:
        return int(raw)
    return raw


def parse_config_file(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def load_config(
    file_path: Optional[str] = None,
    overrides: Optional[dict] = None,
    environ: Optional[dict] = None,
) -> Config:
    """Build a Config honoring the fixed precedence order.

    ``overrides`` are flag-level values (highest precedence); keys with a
    None value are ignored so absent flags don't mask lower layers.
    """
    environ = os.environ if environ is None else environ
    types = {f.name: f.type for f in fields(Config)}
    type_map = {"str": str, "int": int, "bool": bool}
    merged: dict = {}
    if file_path:
        for key, raw in parse_config_file(file_path).items():
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, raw, type_map[str(types[key])])
    for name in types:
        env_key = ENV_PREFIX + name.upper()
        if env_key in environ:
            merged[name] = _coerce(name, environ[env_key], type_map[str(types[name])])
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in types:
            raise ValueError(f"unknown config override {key!r}")
        merged[key] = value
    return Config(**merged)
