"""Flat ``key = value`` experiment configuration files.

``mode``, ``B``, ``K`` and ``C`` accept comma-separated lists; the file then
describes the full grid of their combinations. ``preset`` (``full`` or
``desk``) supplies scale defaults that explicit keys override. Lines starting
with ``#`` are comments.
"""

from __future__ import annotations

import itertools
from dataclasses import fields
from pathlib import Path

from .experiments import PRESETS
from .records import MODES, ExperimentSpec

LIST_KEYS = ("mode", "B", "K", "C")
INT_KEYS = ("R", "N", "B", "K", "C", "S", "generations", "cycles", "runs_per_landscape",
            "landscapes", "log_every")
BOOL_KEYS = ("scramble_control", "clamp_coupled")
KNOWN_KEYS = ("mode", *INT_KEYS, "seed", *BOOL_KEYS, "preset")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0, source: str = "<config>"):
        where = f"{source}:{line}:{col}: " if line else f"{source}: "
        super().__init__(where + msg)
        self.line, self.col = line, col


def _parse_value(key, raw, line, col, source):
    def bad(why):
        return ConfigError(f"{key}: {why}", line, col, source)

    if key == "preset":
        if raw not in PRESETS:
            raise bad(f"unknown preset {raw!r} (expected {', '.join(PRESETS)})")
        return raw
    if key in BOOL_KEYS:
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise bad(f"expected a boolean, got {raw!r}")
    if key == "seed":
        if not raw.isdigit() or int(raw) >= 2**64:
            raise bad(f"expected an unsigned 64-bit decimal, got {raw!r}")
        return int(raw)
    items = [x.strip() for x in raw.split(",")] if key in LIST_KEYS else [raw]
    out = []
    for item in items:
        if key == "mode":
            if item not in MODES:
                raise bad(f"unknown mode {item!r} (expected one of {', '.join(MODES)})")
            out.append(item)
        else:
            try:
                out.append(int(item))
            except ValueError:
                raise bad(f"expected an integer, got {item!r}") from None
    return out if key in LIST_KEYS else out[0]


def parse_config(text: str, source: str = "<config>") -> list[ExperimentSpec]:
    values: dict[str, object] = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", ln, len(line) - len(line.lstrip()) + 1, source)
        key_part, raw = line.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}", ln, key_col, source)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", ln, key_col, source)
        val_col = len(key_part) + 2 + (len(raw) - len(raw.lstrip()))
        raw = raw.split("#", 1)[0].strip()
        if not raw:
            raise ConfigError(f"{key}: missing value", ln, val_col, source)
        values[key] = _parse_value(key, raw, ln, val_col, source)

    base: dict[str, object] = {}
    if "preset" in values:
        base.update(PRESETS[values.pop("preset")])
    base.update({k: v for k, v in values.items() if k not in LIST_KEYS})
    defaults = {f.name: f.default for f in fields(ExperimentSpec)}
    axes = [values.get(k, [base.get(k, defaults[k])]) for k in LIST_KEYS]
    grid = []
    try:
        for combo in itertools.product(*axes):
            params = dict(base, **dict(zip(LIST_KEYS, combo)))
            spec = ExperimentSpec(**params)
            if not spec.coupled and any(s.cell == spec.cell for s in grid):
                continue  # C is irrelevant to single-cell modes
            grid.append(spec)
    except ValueError as exc:
        raise ConfigError(str(exc), source=source) from None
    return grid


def load_config(path) -> list[ExperimentSpec]:
    p = Path(path)
    return parse_config(p.read_text(), source=str(p))
