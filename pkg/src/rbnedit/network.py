"""Random Boolean network genomes with guide-RNA editing.

A genome is a bundle of read-only numpy arrays. Mutation produces a new
genome that shares every array it did not touch.

Layout (``R`` nodes, in-degree ``B``, gRNA in-degree ``Bp``):

* ``start``      (R,) uint8 start states
* ``ttable``     (R, 2**B) uint8 transcription truth tables
* ``inputs``     (R, B) int32 source node per slot; ``-1`` marks a slot bound
  to a partner trait (coupled modes, slot 0 of each coupling target)
* ``editable``   (R,) uint8 editing flag
* ``gtable``     (R, 2**Bp) uint8 gRNA truth tables, zero when not editable
* ``ginputs``    (R, Bp) int32 gRNA sources, ``-1`` when not editable
* ``reconnect``  (R, 2**Bp, cap) int32 reconnection target lists; row ``r``
  of node ``v`` holds ``out_degree(v)`` ids when ``gtable[v, r] == 1`` and
  is ``-1``-padded otherwise

Truth tables are indexed with slot 0 as the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from functools import cached_property
from pathlib import Path

import numpy as np

from . import _kernel
from .prng import RngStream

GENOME_MAGIC = "rbnedit-genome 1"


class GenomeInvariantError(RuntimeError):
    """A genome or its dynamics violated a structural invariant."""


@dataclass(frozen=True)
class NetworkParams:
    R: int
    N: int
    B: int
    B_prime: int | None = None
    n_input: int = 0  # count of clamped leading nodes
    coupled: bool = False
    editing: bool = True  # False builds a plain RBN (no editable nodes)
    p_editable: float = 0.5

    @property
    def Bp(self) -> int:
        return self.B if self.B_prime is None else self.B_prime


@dataclass(frozen=True, eq=False)
class Genome:
    R: int
    B: int
    Bp: int
    n_input: int
    start: np.ndarray
    ttable: np.ndarray
    inputs: np.ndarray
    editable: np.ndarray
    gtable: np.ndarray
    ginputs: np.ndarray
    reconnect: np.ndarray
    trait_ids: np.ndarray
    coupling_targets: np.ndarray | None = None
    _outdeg: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("start", "ttable", "inputs", "editable", "gtable", "ginputs",
                     "reconnect", "trait_ids", "coupling_targets"):
            arr = getattr(self, name)
            if arr is not None:
                arr.flags.writeable = False
        if self._outdeg is None:
            object.__setattr__(self, "_outdeg", _out_degrees(self.inputs, self.R))

    @property
    def N(self) -> int:
        return len(self.trait_ids)

    @cached_property
    def n_editable(self) -> int:
        return int(self.editable.sum())

    @property
    def pct_grna(self) -> float:
        return self.n_editable / self.R

    @property
    def out_degrees(self) -> np.ndarray:
        return self._outdeg

    @cached_property
    def coupling_index(self) -> np.ndarray:
        cidx = np.full(self.R, -1, dtype=np.int32)
        if self.coupling_targets is not None:
            cidx[self.coupling_targets] = np.arange(len(self.coupling_targets), dtype=np.int32)
        return cidx

    @cached_property
    def edit_targets(self) -> np.ndarray:
        """Editable nodes that have at least one reconnect list."""
        ok = (self.editable == 1) & (self._outdeg > 0) & self.gtable.any(axis=1)
        return np.flatnonzero(ok)

    @cached_property
    def intra_slots(self) -> np.ndarray:
        """Flat indices ``u * B + k`` of slots fed by a node of this network."""
        return np.flatnonzero(self.inputs.reshape(-1) >= 0)

    def evolve(self, **changes) -> Genome:
        """Copy with the given arrays replaced; out-degrees are recomputed if inputs change.

        Skips dataclass machinery: this sits on the per-generation path.
        """
        unknown = changes.keys() - _GENOME_FIELDS
        if unknown:
            raise TypeError(f"unknown genome fields {sorted(unknown)}")
        state = {name: self.__dict__[name] for name in _GENOME_FIELDS}
        state.update(changes)
        for name, deps in _DERIVED.items():
            if name in self.__dict__ and deps.isdisjoint(changes):
                state[name] = self.__dict__[name]
        if "inputs" in changes and "_outdeg" not in changes:
            state["_outdeg"] = _out_degrees(state["inputs"], self.R)
        for name in changes:
            if isinstance(state[name], np.ndarray):
                state[name].flags.writeable = False
        new = object.__new__(Genome)
        new.__dict__.update(state)
        return new

    def reconnect_lists(self, v: int) -> dict[int, list[int]]:
        """Reconnection targets of node ``v`` keyed by gRNA table row."""
        if not self.editable[v]:
            return {}
        d = int(self._outdeg[v])
        return {r: [int(x) for x in self.reconnect[v, r, :d]]
                for r in range(2 ** self.Bp) if self.gtable[v, r]}

    def kernel_args(self):
        return (self.start, self.ttable, self.inputs, self.coupling_index, self.editable,
                self.gtable, self.ginputs, self.reconnect, self.trait_ids)


_GENOME_FIELDS = frozenset(f.name for f in fields(Genome))
# cached properties and the fields they are computed from
_DERIVED = {
    "n_editable": {"editable"},
    "coupling_index": {"coupling_targets"},
    "intra_slots": {"inputs"},
    "edit_targets": {"editable", "inputs", "_outdeg", "gtable"},
}


def _out_degrees(inputs: np.ndarray, R: int) -> np.ndarray:
    src = inputs[inputs >= 0]
    deg = np.bincount(src, minlength=R).astype(np.int32)
    deg.flags.writeable = False
    return deg


def out_degree(g: Genome, v: int) -> int:
    """Intra-network slots fed by node ``v``; partner-bound slots are not counted."""
    if not 0 <= v < g.R:
        raise IndexError(f"node {v} outside [0, {g.R})")
    return int(g.out_degrees[v])


def reconnect_capacity(outdeg: np.ndarray) -> int:
    return max(1, int(outdeg.max(initial=0)))


def init_genome(params: NetworkParams, rng: RngStream) -> Genome:
    R, N, B, Bp = params.R, params.N, params.B, params.Bp
    if N < 1 or N > R:
        raise ValueError(f"need 1 <= N <= R, got N={N}, R={R}")
    if B < 1 or Bp < 1:
        raise ValueError(f"B and B' must be >= 1, got B={B}, B'={Bp}")
    if not 0 <= params.n_input <= R:
        raise ValueError(f"n_input must lie in [0, R], got {params.n_input}")
    gen = rng.generator
    start = rng.next_bits(R)
    ttable = rng.next_bits((R, 2 ** B))
    inputs = rng.indices(R, (R, B))
    trait_ids = gen.choice(R, size=N, replace=False).astype(np.int32)
    coupling = None
    if params.coupled:
        coupling = gen.choice(R, size=N, replace=False).astype(np.int32)
        inputs[coupling, 0] = -1
    if params.editing:
        editable = (gen.random(R) < params.p_editable).astype(np.uint8)
    else:
        editable = np.zeros(R, dtype=np.uint8)
    gtable = rng.next_bits((R, 2 ** Bp))
    ginputs = rng.indices(R, (R, Bp))
    gtable[editable == 0] = 0
    ginputs[editable == 0] = -1
    outdeg = _out_degrees(inputs, R)
    reconnect = np.full((R, 2 ** Bp, reconnect_capacity(outdeg)), -1, dtype=np.int32)
    for v in np.flatnonzero(editable):
        d = outdeg[v]
        for r in np.flatnonzero(gtable[v]):
            reconnect[v, r, :d] = rng.indices(R, d)
    return Genome(R, B, Bp, params.n_input, start, ttable, inputs, editable, gtable, ginputs,
                  reconnect, trait_ids, coupling, outdeg)


def validate(g: Genome) -> None:
    """Raise GenomeInvariantError unless every structural invariant holds."""
    R, B, Bp = g.R, g.B, g.Bp

    def fail(msg):
        raise GenomeInvariantError(msg)

    if g.start.shape != (R,) or g.ttable.shape != (R, 2 ** B) or g.inputs.shape != (R, B):
        fail("transcription arrays have wrong shape")
    if g.editable.shape != (R,) or g.gtable.shape != (R, 2 ** Bp) or g.ginputs.shape != (R, Bp):
        fail("gRNA arrays have wrong shape")
    if g.reconnect.ndim != 3 or g.reconnect.shape[:2] != (R, 2 ** Bp):
        fail("reconnect array has wrong shape")
    tr = g.trait_ids
    if len(set(tr.tolist())) != len(tr) or tr.min() < 0 or tr.max() >= R:
        fail("trait ids must be distinct node ids")
    partner_slots = np.zeros((R, B), dtype=bool)
    if g.coupling_targets is not None:
        ct = g.coupling_targets
        if len(ct) != len(tr) or len(set(ct.tolist())) != len(ct):
            fail("coupling targets must be N distinct node ids")
        partner_slots[ct, 0] = True
    if np.any((g.inputs == -1) != partner_slots):
        fail("partner-bound slots must be exactly slot 0 of each coupling target")
    if np.any(g.inputs[~partner_slots] < 0) or np.any(g.inputs >= R):
        fail("input source out of range")
    outdeg = _out_degrees(g.inputs, R)
    if not np.array_equal(outdeg, g.out_degrees):
        fail("cached out-degrees are stale")
    if outdeg.sum() != R * B - partner_slots.sum():
        fail("out-degree sum does not match slot count")
    cap = g.reconnect.shape[2]
    if outdeg.max(initial=0) > cap:
        fail("reconnect capacity below maximum out-degree")
    for v in range(R):
        if not g.editable[v]:
            if g.gtable[v].any() or np.any(g.ginputs[v] != -1) or np.any(g.reconnect[v] != -1):
                fail(f"non-editable node {v} carries gRNA data")
            continue
        if np.any(g.ginputs[v] < 0) or np.any(g.ginputs[v] >= R):
            fail(f"node {v} gRNA input out of range")
        d = outdeg[v]
        for r in range(2 ** Bp):
            row = g.reconnect[v, r]
            if g.gtable[v, r]:
                if np.any(row[:d] < 0) or np.any(row[:d] >= R) or np.any(row[d:] != -1):
                    fail(f"node {v} reconnect row {r} length differs from out-degree {d}")
            elif np.any(row != -1):
                fail(f"node {v} has a reconnect list for inactive gRNA row {r}")


# -- dynamics --------------------------------------------------------------

@dataclass
class NetworkState:
    node_states: np.ndarray
    grna_states: np.ndarray
    grna_rows: np.ndarray  # gRNA table row that switched each gRNA on, -1 when off


@dataclass
class Wiring:
    """Effective wiring of one cycle.

    ``slots[u, k]`` is the node read by slot ``k`` of node ``u``: a node id,
    ``-1`` when the source was edited away (reads 0) or ``-2`` for a partner
    trait. ``extras`` lists ``(u, k, src)`` surplus connections OR-ed into slot
    ``k``.
    """
    slots: np.ndarray
    extras: list[tuple[int, int, int]]

    def sources(self, u: int) -> list[int]:
        srcs = [int(x) for x in self.slots[u] if x >= 0]
        srcs += [src for uu, _, src in self.extras if uu == u]
        return sorted(srcs)


def lifetime_seed(rng: RngStream) -> np.uint64:
    """Seed for the compiled slot-choice generator; one draw from ``rng`` per call."""
    return np.uint64(rng.generator.bit_generator.random_raw())


def initial_state(g: Genome) -> NetworkState:
    s = g.start.copy()
    gs = np.zeros(g.R, dtype=np.uint8)
    rows = np.empty(g.R, dtype=np.int64)
    _kernel.grna_next(s, g.editable, g.gtable, g.ginputs, gs, rows)
    return NetworkState(s, gs, rows)


def step(g: Genome, st: NetworkState, input=None, external_traits=None,
         rng: RngStream | None = None, *, return_wiring: bool = False):
    """Advance one synchronous cycle; ``st`` is left untouched."""
    clamp = np.zeros(0, dtype=np.uint8) if input is None else np.asarray(input, dtype=np.uint8)
    if input is not None and len(clamp) != g.n_input:
        raise ValueError(f"input must have {g.n_input} bits")
    if (external_traits is None) != (g.coupling_targets is None):
        raise ValueError("external traits are required exactly when the genome is coupled")
    ext = np.zeros(0, dtype=np.uint8) if external_traits is None else np.asarray(external_traits, dtype=np.uint8)
    rstate = np.array([lifetime_seed(rng) if rng is not None else 0], dtype=np.uint64)
    R, B = g.R, g.B
    outdeg, ptr, slots = _kernel.out_slots(g.inputs, R)
    s = st.node_states.copy()
    s2, g2 = np.empty_like(s), np.empty(R, dtype=np.uint8)
    rows2 = np.empty(R, dtype=np.int64)
    primary = np.empty((R, B), dtype=np.int64)
    eff = np.empty((R, B), dtype=np.uint8)
    n = R * B + 1
    ex_u, ex_k, ex_src = (np.empty(n, dtype=np.int64) for _ in range(3))
    counters = np.zeros(2, dtype=np.int64)
    rc = _kernel.step(s, st.grna_states.copy(), st.grna_rows.copy(), s2, g2, rows2,
                      g.ttable, g.inputs, g.coupling_index, g.editable, g.gtable, g.ginputs,
                      g.reconnect, outdeg, ptr, slots, clamp, ext,
                      primary, eff, ex_u, ex_k, ex_src, counters, rstate, True)
    if rc < 0:
        raise GenomeInvariantError("malformed reconnect list met during editing")
    nxt = NetworkState(s2, g2, rows2)
    if return_wiring:
        extras = [(int(ex_u[i]), int(ex_k[i]), int(ex_src[i])) for i in range(counters[0])]
        return nxt, Wiring(primary.copy(), extras)
    return nxt


@dataclass(frozen=True)
class Schedule:
    """Per-cycle clamped input and landscape index."""
    inputs: np.ndarray  # (cycles, n_input) uint8
    landscape_ids: np.ndarray  # (cycles,) int32

    @property
    def cycles(self) -> int:
        return len(self.landscape_ids)


def constant_schedule(cycles: int, n_input: int, bit: int = 0) -> Schedule:
    return Schedule(np.full((cycles, n_input), bit, dtype=np.uint8), np.zeros(cycles, dtype=np.int32))


def switching_schedule(cycles: int, n_input: int) -> Schedule:
    """All-0 input on landscape 0 for the first half, all-1 input on landscape 1 after."""
    half = cycles // 2
    inputs = np.zeros((cycles, n_input), dtype=np.uint8)
    inputs[half:] = 1
    ids = np.zeros(cycles, dtype=np.int32)
    ids[half:] = 1
    return Schedule(inputs, ids)


class EpisodeRunner:
    """Evaluator bound to one landscape set and schedule, reused across genomes.

    ``landscapes`` is one NK landscape or a sequence indexed by the schedule.
    Attractor skipping replays exactly what full simulation would produce.
    """

    def __init__(self, landscapes, schedule: Schedule, *, skip_attractors: bool = True):
        if schedule.cycles < 1:
            raise ValueError("cycles must be >= 1")
        if not isinstance(landscapes, (list, tuple)):
            landscapes = [landscapes]
        if schedule.landscape_ids.max() >= len(landscapes):
            raise ValueError("schedule refers to a missing landscape")
        self.schedule = schedule
        self.skip = skip_attractors
        self.nbs = np.stack([L.neighbors for L in landscapes])
        self.tables = np.stack([L.table for L in landscapes])
        self.fits = np.empty(schedule.cycles)

    def __call__(self, g: Genome, rng: RngStream, *, with_trace: bool = False):
        sched = self.schedule
        if sched.inputs.shape[1] != g.n_input:
            raise ValueError(f"schedule inputs must have {g.n_input} columns")
        trace = np.empty((sched.cycles, g.N), dtype=np.uint8)
        mean = _kernel.episode(*g.kernel_args(), sched.inputs, sched.landscape_ids,
                               self.nbs, self.tables, lifetime_seed(rng), trace, self.fits, self.skip)
        if np.isnan(mean):
            raise GenomeInvariantError("malformed reconnect list met during editing")
        return (mean, trace) if with_trace else mean


def run_episode(g: Genome, landscapes, schedule: Schedule, rng: RngStream, *,
                with_trace: bool = False, skip_attractors: bool = True):
    """Mean per-cycle fitness over ``schedule``; optionally also the (cycles, N) trait trace."""
    runner = EpisodeRunner(landscapes, schedule, skip_attractors=skip_attractors)
    return runner(g, rng, with_trace=with_trace)


def run_pair(a: Genome, b: Genome, land_a, land_b, cycles: int, rng: RngStream, *,
             pre_steps: int = 0, clamp: bool = False, with_trace: bool = False):
    """Coupled lifetime of two networks updating in turn, ``a`` first."""
    if a.coupling_targets is None or b.coupling_targets is None:
        raise ValueError("both genomes must be coupled")
    if land_a.S != 1 or land_b.S != 1:
        raise ValueError("paired evaluation needs S=1 landscapes")
    ca = np.zeros(a.n_input if clamp else 0, dtype=np.uint8)
    cb = np.zeros(b.n_input if clamp else 0, dtype=np.uint8)
    ta = np.empty((cycles, a.N), dtype=np.uint8)
    tb = np.empty((cycles, b.N), dtype=np.uint8)
    fa, fb = _kernel.pair_episode(*a.kernel_args(), *b.kernel_args(),
                                  *land_a.kernel_arrays(), *land_b.kernel_arrays(),
                                  ca, cb, cycles, pre_steps, lifetime_seed(rng), ta, tb)
    if np.isnan(fa):
        raise GenomeInvariantError("malformed reconnect list met during editing")
    return (fa, fb, ta, tb) if with_trace else (fa, fb)


# -- text dump -------------------------------------------------------------

def _bits_hex(bits) -> str:
    return format(sum(int(b) << i for i, b in enumerate(bits)), "x")


def _hex_bits(text: str, n: int) -> list[int]:
    v = int(text, 16)
    return [(v >> i) & 1 for i in range(n)]


def dumps(g: Genome) -> str:
    """One node per line: start, table hex, inputs, editable, gRNA hex, gRNA inputs, reconnect rows.

    Truth-table hex packs entry ``i`` into bit ``i``. Partner-bound slots print as ``c``.
    """
    ct = "-" if g.coupling_targets is None else " ".join(map(str, g.coupling_targets.tolist()))
    lines = [GENOME_MAGIC,
             f"R={g.R} B={g.B} Bp={g.Bp} n_input={g.n_input}",
             "traits " + " ".join(map(str, g.trait_ids.tolist())),
             "coupling " + ct]
    for v in range(g.R):
        ins = ",".join("c" if x < 0 else str(x) for x in g.inputs[v].tolist())
        if g.editable[v]:
            rows = ";".join(f"{r}:" + ",".join(map(str, lst)) for r, lst in g.reconnect_lists(v).items())
            tail = f"1 {_bits_hex(g.gtable[v])} {','.join(map(str, g.ginputs[v].tolist()))} {rows or '-'}"
        else:
            tail = "0 - - -"
        lines.append(f"{g.start[v]} {_bits_hex(g.ttable[v])} {ins} {tail}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> Genome:
    lines = text.splitlines()
    if not lines or lines[0] != GENOME_MAGIC:
        raise ValueError("not a genome file (bad header)")
    hdr = dict(kv.split("=") for kv in lines[1].split())
    R, B, Bp, n_input = (int(hdr[k]) for k in ("R", "B", "Bp", "n_input"))
    trait_ids = np.array(lines[2].split()[1:], dtype=np.int32)
    ct_tok = lines[3].split()[1:]
    coupling = None if ct_tok == ["-"] else np.array(ct_tok, dtype=np.int32)
    start = np.zeros(R, dtype=np.uint8)
    ttable = np.zeros((R, 2 ** B), dtype=np.uint8)
    inputs = np.zeros((R, B), dtype=np.int32)
    editable = np.zeros(R, dtype=np.uint8)
    gtable = np.zeros((R, 2 ** Bp), dtype=np.uint8)
    ginputs = np.full((R, Bp), -1, dtype=np.int32)
    rows: dict[tuple[int, int], list[int]] = {}
    for v, line in enumerate(lines[4:4 + R]):
        st, th, ins, ed, gh, gins, rc = line.split()
        start[v] = int(st)
        ttable[v] = _hex_bits(th, 2 ** B)
        inputs[v] = [-1 if x == "c" else int(x) for x in ins.split(",")]
        editable[v] = int(ed)
        if editable[v]:
            gtable[v] = _hex_bits(gh, 2 ** Bp)
            ginputs[v] = [int(x) for x in gins.split(",")]
            if rc != "-":
                for part in rc.split(";"):
                    r, ids = part.split(":")
                    rows[v, int(r)] = [int(x) for x in ids.split(",")] if ids else []
    outdeg = _out_degrees(inputs, R)
    reconnect = np.full((R, 2 ** Bp, reconnect_capacity(outdeg)), -1, dtype=np.int32)
    for (v, r), ids in rows.items():
        reconnect[v, r, :len(ids)] = ids
    g = Genome(R, B, Bp, n_input, start, ttable, inputs, editable, gtable, ginputs,
               reconnect, trait_ids, coupling)
    validate(g)
    return g


def save(g: Genome, path) -> None:
    Path(path).write_text(dumps(g))


def load(path) -> Genome:
    return loads(Path(path).read_text())
