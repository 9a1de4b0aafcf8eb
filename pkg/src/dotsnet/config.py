"""``key=value`` configuration files.

Keys are the field names of the target dataclass; ``#`` starts a comment.
Unknown or repeated keys are errors.
"""
from __future__ import annotations

from dataclasses import fields
from pathlib import Path
from typing import TypeVar

T = TypeVar("T")


class ConfigError(ValueError):
    pass


def _convert(raw: str, example):
    if isinstance(example, bool):
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(example, int):
        return int(raw)
    if isinstance(example, float):
        return float(raw)
    return raw


def parse_config(text: str, cls: type[T], overrides: dict | None = None, source: str = "<config>") -> T:
    defaults = cls()
    known = {f.name for f in fields(cls)}
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: {key!r} given twice")
        try:
            values[key] = _convert(raw, getattr(defaults, key))
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    values.update(overrides or {})
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path | None, cls: type[T], overrides: dict | None = None) -> T:
    if path is None:
        try:
            return cls(**(overrides or {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, cls, overrides, str(path))
