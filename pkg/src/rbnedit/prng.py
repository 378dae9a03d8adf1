"""Deterministic, splittable random streams.

Every stream is a numpy ``Generator`` over ``PCG64`` seeded by a
``SeedSequence(root_seed, spawn_key=...)``. Deriving a child stream appends
the encoded label to the parent's spawn key, so a stream is a pure function
of ``(root seed, label path)`` and no two label paths share state.

Labels have the form ``tag[/index[/index...]]`` where ``tag`` is a
non-numeric name and each index is a non-negative integer, e.g.
``"landscape/3"`` or ``"run/2/7"``. The tag is folded into the key via the
first 8 bytes of its SHA-256 digest, which is stable across platforms.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

MAX_SEED = 2**64 - 1


def _tag_word(tag: str) -> int:
    return int.from_bytes(hashlib.sha256(tag.encode("utf-8")).digest()[:8], "little")


def parse_label(label: str) -> tuple[str, tuple[int, ...]]:
    parts = label.split("/")
    tag, rest = parts[0], parts[1:]
    if not tag or tag.isdigit():
        raise ValueError(f"malformed stream label {label!r}: needs a non-numeric tag")
    indices = []
    for p in rest:
        if not p.isdigit():
            raise ValueError(f"malformed stream label {label!r}: index {p!r} is not a non-negative integer")
        indices.append(int(p))
    return tag, tuple(indices)


@dataclass
class RngStream:
    seed: int
    key: tuple[int, ...] = ()
    label: str = ""
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def generator(self) -> np.random.Generator:
        """The underlying generator; draws from it advance this stream."""
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def derive(self, label: str) -> RngStream:
        return derive(self, label)

    def next_unit(self) -> float:
        return next_unit(self)

    def next_index(self, n: int) -> int:
        return next_index(self, n)

    def next_bits(self, size) -> np.ndarray:
        """Uniform 0/1 values as ``uint8``."""
        return self.generator.integers(0, 2, size=size, dtype=np.uint8)

    def indices(self, n: int, size) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be >= 1")
        return self.generator.integers(0, n, size=size, dtype=np.int32)


def root(seed: int) -> RngStream:
    return RngStream(int(seed), (), "")


def derive(parent: RngStream, label: str) -> RngStream:
    """Child stream for ``label``; independent of how much ``parent`` has been drawn."""
    tag, indices = parse_label(label)
    key = parent.key + (_tag_word(tag), len(indices), *indices)
    name = f"{parent.label}:{label}" if parent.label else label
    return RngStream(parent.seed, key, name)


def next_unit(r: RngStream) -> float:
    """Uniform real in [0, 1)."""
    return float(r.generator.random())


def next_index(r: RngStream, n: int) -> int:
    """Unbiased uniform integer in [0, n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return int(r.generator.integers(0, n))
