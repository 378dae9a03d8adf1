"""NK and NKCS fitness landscapes.

Each trait ``i`` owns a lookup table indexed by a bit key built from, most
significant first: the trait's own bit, its ``K`` neighbour bits in stored
order, then ``C`` bits from each of the ``S`` partners in partner order.
Table entries are uniform on [0, 1).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .prng import RngStream

MAGIC = "rbnedit-landscape 1"


@dataclass(frozen=True, eq=False)
class NkLandscape:
    N: int
    K: int
    neighbors: np.ndarray  # (N, K) int32
    table: np.ndarray  # (N, 2**(K+1)) float64

    C = 0
    S = 0

    @property
    def partner_neighbors(self) -> np.ndarray:
        return np.zeros((self.N, 0, 0), dtype=np.int32)

    def kernel_arrays(self):
        return self.neighbors, np.zeros((self.N, 0), dtype=np.int32), self.table


@dataclass(frozen=True, eq=False)
class NkcsLandscape:
    N: int
    K: int
    C: int
    S: int
    neighbors: np.ndarray  # (N, K) int32
    partner_neighbors: np.ndarray  # (N, S, C) int32
    table: np.ndarray  # (N, 2**(K+1+C*S)) float64

    def kernel_arrays(self):
        # partner s's trait j lives at offset s*N + j in the concatenated partner vector
        offsets = (np.arange(self.S, dtype=np.int32) * self.N)[None, :, None]
        flat = (self.partner_neighbors + offsets).reshape(self.N, self.S * self.C)
        return self.neighbors, np.ascontiguousarray(flat, dtype=np.int32), self.table


def _check_nk(N: int, K: int):
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not 0 <= K <= N - 1:
        raise ValueError(f"K must satisfy 0 <= K <= N-1, got K={K}, N={N}")


def _draw_neighbors(N: int, K: int, rng: RngStream) -> np.ndarray:
    gen = rng.generator
    nb = np.empty((N, K), dtype=np.int32)
    for i in range(N):
        others = np.delete(np.arange(N), i)
        nb[i] = gen.choice(others, size=K, replace=False)
    return nb


def generate_nk(N: int, K: int, rng: RngStream) -> NkLandscape:
    _check_nk(N, K)
    nb = _draw_neighbors(N, K, rng)
    table = rng.generator.random((N, 2 ** (K + 1)))
    return NkLandscape(N, K, nb, table)


def generate_nkcs(N: int, K: int, C: int, S: int, rng: RngStream) -> NkcsLandscape:
    _check_nk(N, K)
    if not 1 <= C <= N:
        raise ValueError(f"C must satisfy 1 <= C <= N, got C={C}, N={N}")
    if S < 1:
        raise ValueError(f"S must be >= 1, got {S}")
    gen = rng.generator
    nb = _draw_neighbors(N, K, rng)
    pnb = np.empty((N, S, C), dtype=np.int32)
    for i in range(N):
        for s in range(S):
            pnb[i, s] = gen.choice(N, size=C, replace=False)
    table = gen.random((N, 2 ** (K + 1 + C * S)))
    return NkcsLandscape(N, K, C, S, nb, pnb, table)


def flat_nk(N: int, K: int, value: float = 0.5) -> NkLandscape:
    """Landscape whose every table entry equals ``value``; neighbours are the next K traits."""
    nb = np.array([[(i + 1 + k) % N for k in range(K)] for i in range(N)], dtype=np.int32).reshape(N, K)
    return NkLandscape(N, K, nb, np.full((N, 2 ** (K + 1)), value))


def _lookup_key(traits, partner_flat, nb, pflat, i) -> int:
    key = int(traits[i])
    for j in nb[i]:
        key = (key << 1) | int(traits[j])
    for q in pflat[i]:
        key = (key << 1) | int(partner_flat[q])
    return key


def evaluate_nk(L: NkLandscape, traits) -> float:
    traits = np.asarray(traits, dtype=np.uint8)
    if traits.shape != (L.N,):
        raise ValueError(f"expected {L.N} trait bits, got shape {traits.shape}")
    nb, pflat, table = L.kernel_arrays()
    total = 0.0
    for i in range(L.N):
        total += table[i, _lookup_key(traits, (), nb, pflat, i)]
    return total / L.N


def evaluate_nkcs(L: NkcsLandscape, own, partners) -> float:
    own = np.asarray(own, dtype=np.uint8)
    partners = np.asarray(partners, dtype=np.uint8)
    if own.shape != (L.N,):
        raise ValueError(f"expected {L.N} own trait bits, got shape {own.shape}")
    if partners.ndim != 2 or partners.shape[0] != L.S or partners.shape[1] != L.N:
        raise ValueError(f"expected {L.S} partner vectors of {L.N} bits, got shape {partners.shape}")
    nb, pflat, table = L.kernel_arrays()
    flat = partners.reshape(-1)
    total = 0.0
    for i in range(L.N):
        total += table[i, _lookup_key(own, flat, nb, pflat, i)]
    return total / L.N


# -- serialisation ---------------------------------------------------------

def dumps(L) -> str:
    C, S = L.C, L.S
    lines = [MAGIC, f"N={L.N} K={L.K} C={C} S={S}"]
    for i in range(L.N):
        lines.append("n " + " ".join(str(int(x)) for x in L.neighbors[i]))
        if C * S:
            lines.append("p " + " ".join(str(int(x)) for x in L.partner_neighbors[i].reshape(-1)))
        lines.append("t " + " ".join(float(x).hex() for x in L.table[i]))
    return "\n".join(lines) + "\n"


def loads(text: str):
    lines = text.splitlines()
    if not lines or lines[0] != MAGIC:
        raise ValueError("not a landscape file (bad header)")
    hdr = dict(kv.split("=") for kv in lines[1].split())
    N, K, C, S = (int(hdr[k]) for k in ("N", "K", "C", "S"))
    per = 3 if C * S else 2
    body = lines[2:]
    if len(body) != N * per:
        raise ValueError(f"expected {N * per} trait lines, got {len(body)}")

    def field(line, tag):
        if not line.startswith(tag + " ") and line != tag:
            raise ValueError(f"expected {tag!r} line, got {line[:20]!r}")
        return line[len(tag):].split()

    nb = np.zeros((N, K), dtype=np.int32)
    pnb = np.zeros((N, S, C), dtype=np.int32)
    table = np.zeros((N, 2 ** (K + 1 + C * S)))
    for i in range(N):
        chunk = body[i * per:(i + 1) * per]
        nb[i] = [int(x) for x in field(chunk[0], "n")]
        if C * S:
            pnb[i] = np.array([int(x) for x in field(chunk[1], "p")]).reshape(S, C)
        table[i] = [float.fromhex(x) for x in field(chunk[-1], "t")]
    if C * S:
        return NkcsLandscape(N, K, C, S, nb, pnb, table)
    return NkLandscape(N, K, nb, table)


def save(L, path) -> None:
    Path(path).write_text(dumps(L))


def load(path):
    return loads(Path(path).read_text())


def digest(L) -> str:
    return hashlib.sha256(dumps(L).encode()).hexdigest()
