"""Mutation, selection and the hill-climbing protocols."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .network import (EpisodeRunner, Genome, constant_schedule, init_genome, run_pair,
                      switching_schedule)
from .prng import RngStream
from .records import ExperimentSpec, RunResult


class MutationKind(enum.Enum):
    FLIP_TRANSCRIPTION_BIT = "flip_transcription_bit"
    REWIRE_B_CONNECTION = "rewire_b_connection"
    FLIP_START_STATE = "flip_start_state"
    TOGGLE_EDITABLE = "toggle_editable"
    ALTER_RECONNECT_ENTRY = "alter_reconnect_entry"
    REWIRE_BPRIME_CONNECTION = "rewire_bprime_connection"


PLAIN_KINDS = (MutationKind.FLIP_TRANSCRIPTION_BIT, MutationKind.REWIRE_B_CONNECTION,
               MutationKind.FLIP_START_STATE)


def applicable_kinds(g: Genome, *, plain: bool = False) -> list[MutationKind]:
    """Kinds that can act on ``g``; a plain RBN never gains editing machinery."""
    kinds = [MutationKind.FLIP_TRANSCRIPTION_BIT]
    if g.R > 1 and g.intra_slots.size:
        kinds.append(MutationKind.REWIRE_B_CONNECTION)
    kinds.append(MutationKind.FLIP_START_STATE)
    if plain:
        return kinds
    kinds.append(MutationKind.TOGGLE_EDITABLE)
    if g.edit_targets.size:
        kinds.append(MutationKind.ALTER_RECONNECT_ENTRY)
    if g.R > 1 and g.n_editable:
        kinds.append(MutationKind.REWIRE_BPRIME_CONNECTION)
    return kinds


def _other_node(current: int, R: int, rng: RngStream) -> int:
    w = rng.next_index(R - 1)
    return w + 1 if w >= current else w


def _with_capacity(reconnect: np.ndarray, needed: int) -> np.ndarray:
    cap = reconnect.shape[2]
    if needed <= cap:
        return reconnect
    grown = np.full(reconnect.shape[:2] + (needed,), -1, dtype=np.int32)
    grown[:, :, :cap] = reconnect
    return grown


def _shrink_lists(reconnect, g: Genome, v: int, deg: int, rng: RngStream):
    """Drop one uniformly chosen entry from every active list of ``v`` (length ``deg``)."""
    for r in np.flatnonzero(g.gtable[v]):
        pos = rng.next_index(deg)
        reconnect[v, r, pos:deg - 1] = reconnect[v, r, pos + 1:deg]
        reconnect[v, r, deg - 1] = -1


def _grow_lists(reconnect, g: Genome, v: int, deg: int, rng: RngStream):
    for r in np.flatnonzero(g.gtable[v]):
        reconnect[v, r, deg] = rng.next_index(g.R)


def mutate(g: Genome, rng: RngStream, *, plain: bool = False) -> tuple[Genome, MutationKind]:
    """Copy of ``g`` with exactly one change, drawn uniformly from the applicable kinds."""
    kinds = applicable_kinds(g, plain=plain)
    kind = kinds[rng.next_index(len(kinds))]
    return apply_mutation(g, kind, rng), kind


def apply_mutation(g: Genome, kind: MutationKind, rng: RngStream) -> Genome:
    R = g.R
    if kind is MutationKind.FLIP_TRANSCRIPTION_BIT:
        v, bit = rng.next_index(R), rng.next_index(2 ** g.B)
        ttable = g.ttable.copy()
        ttable[v, bit] ^= 1
        return g.evolve(ttable=ttable)

    if kind is MutationKind.FLIP_START_STATE:
        v = rng.next_index(R)
        start = g.start.copy()
        start[v] ^= 1
        return g.evolve(start=start)

    if kind is MutationKind.REWIRE_B_CONNECTION:
        slots = g.intra_slots
        u, k = divmod(int(slots[rng.next_index(len(slots))]), g.B)
        old = int(g.inputs[u, k])
        new = _other_node(old, R, rng)
        inputs = g.inputs.copy()
        inputs[u, k] = new
        deg = g.out_degrees
        reconnect = _with_capacity(g.reconnect, int(deg[new]) + 1)
        if g.editable[old] or g.editable[new]:
            if reconnect is g.reconnect:
                reconnect = reconnect.copy()
            if g.editable[old]:
                _shrink_lists(reconnect, g, old, int(deg[old]), rng)
            if g.editable[new]:
                _grow_lists(reconnect, g, new, int(deg[new]), rng)
        return g.evolve(inputs=inputs, reconnect=reconnect)

    if kind is MutationKind.TOGGLE_EDITABLE:
        v = rng.next_index(R)
        editable, gtable, ginputs = g.editable.copy(), g.gtable.copy(), g.ginputs.copy()
        reconnect = g.reconnect.copy()
        if g.editable[v]:
            editable[v] = 0
            gtable[v] = 0
            ginputs[v] = -1
            reconnect[v] = -1
        else:
            editable[v] = 1
            gtable[v] = rng.next_bits(2 ** g.Bp)
            ginputs[v] = rng.indices(R, g.Bp)
            d = int(g.out_degrees[v])
            for r in np.flatnonzero(gtable[v]):
                reconnect[v, r, :d] = rng.indices(R, d)
        return g.evolve(editable=editable, gtable=gtable, ginputs=ginputs, reconnect=reconnect)

    if kind is MutationKind.ALTER_RECONNECT_ENTRY:
        cands = g.edit_targets
        if not cands.size:
            raise ValueError("no editable node with reconnection entries")
        v = int(cands[rng.next_index(len(cands))])
        rows = np.flatnonzero(g.gtable[v])
        r = int(rows[rng.next_index(len(rows))])
        pos = rng.next_index(int(g.out_degrees[v]))
        reconnect = g.reconnect.copy()
        reconnect[v, r, pos] = rng.next_index(R)
        return g.evolve(reconnect=reconnect)

    if kind is MutationKind.REWIRE_BPRIME_CONNECTION:
        eds = np.flatnonzero(g.editable)
        if not eds.size:
            raise ValueError("no editable node")
        v = int(eds[rng.next_index(len(eds))])
        k = rng.next_index(g.Bp)
        ginputs = g.ginputs.copy()
        ginputs[v, k] = _other_node(int(ginputs[v, k]), R, rng)
        return g.evolve(ginputs=ginputs)

    raise ValueError(f"unknown mutation kind {kind!r}")


def scramble_reconnect(g: Genome, rng: RngStream) -> Genome:
    """Regenerate every reconnection list uniformly at random, keeping lengths."""
    if not g.n_editable:
        return g
    live = g.reconnect >= 0
    reconnect = np.full_like(g.reconnect, -1)
    reconnect[live] = rng.indices(g.R, int(live.sum()))
    return g.evolve(reconnect=reconnect)


@dataclass(frozen=True)
class SelectionOutcome:
    accepted: bool
    reason: str  # higher-fitness | tie-fewer-editable | tie-coin-flip | rejected


def select(parent: tuple[float, int], child: tuple[float, int], rng: RngStream) -> SelectionOutcome:
    """Child wins on higher fitness, then on fewer editable nodes, then on a coin flip."""
    fp, ep = parent
    fc, ec = child
    if fc > fp:
        return SelectionOutcome(True, "higher-fitness")
    if fc < fp:
        return SelectionOutcome(False, "rejected")
    if ec < ep:
        return SelectionOutcome(True, "tie-fewer-editable")
    if ec > ep:
        return SelectionOutcome(False, "rejected")
    if rng.next_index(2):
        return SelectionOutcome(True, "tie-coin-flip")
    return SelectionOutcome(False, "rejected")


class _SeriesLog:
    def __init__(self, spec: ExperimentSpec):
        self.every = spec.log_every
        self.last = spec.generations
        self.rows: list[tuple[int, float, float]] = []

    def __call__(self, gen: int, fitness: float, g: Genome):
        if gen == 0 or gen % self.every == 0 or gen == self.last:
            self.rows.append((gen, float(fitness), g.pct_grna))

    def result(self) -> RunResult:
        _, f, p = self.rows[-1]
        return RunResult(f, p, self.rows)


def _offspring(g: Genome, spec: ExperimentSpec, rng: RngStream, *, plain: bool = False) -> Genome:
    child, _ = mutate(g, rng, plain=plain)
    if spec.scramble_control and not plain:
        child = scramble_reconnect(child, rng)
    return child


def evolve_rbnk(spec: ExperimentSpec, landscapes, rng: RngStream) -> RunResult:
    """Single-cell hill-climber on one (stationary) or two (non-stationary) NK landscapes."""
    if not isinstance(landscapes, (list, tuple)):
        landscapes = [landscapes]
    if spec.mode == "stationary":
        if len(landscapes) != 1:
            raise ValueError("stationary mode takes exactly one landscape")
        schedule = constant_schedule(spec.cycles, spec.n_input)
    elif spec.mode == "nonstationary":
        if len(landscapes) != 2:
            raise ValueError("nonstationary mode needs two landscapes")
        schedule = switching_schedule(spec.cycles, spec.n_input)
    else:
        raise ValueError(f"evolve_rbnk cannot run mode {spec.mode!r}")

    genome = init_genome(spec.network_params(), rng.derive("genome"))
    mut = rng.derive("mutation")
    edit = rng.derive("editing")
    log = _SeriesLog(spec)
    evaluate = EpisodeRunner(landscapes, schedule)
    fp = evaluate(genome, edit)
    log(0, fp, genome)
    for gen in range(1, spec.generations + 1):
        child = _offspring(genome, spec, mut)
        fc = evaluate(child, edit)
        if select((fp, genome.n_editable), (fc, child.n_editable), mut).accepted:
            genome, fp = child, fc
        log(gen, fp, genome)
    return log.result()


def coevolve_hetero(spec: ExperimentSpec, land_a, land_b, rng: RngStream) -> RunResult:
    """Two coupled species; A can edit, B is a plain RBN. Reports A."""
    if land_a.S != 1 or land_b.S != 1:
        raise ValueError("heterogeneous coevolution needs S=1 landscapes")
    a = init_genome(spec.network_params(), rng.derive("genome/0"))
    b = init_genome(spec.network_params(editing=False), rng.derive("genome/1"))
    mut = rng.derive("mutation")
    edit = rng.derive("editing")
    clamp = spec.clamp_coupled
    log = _SeriesLog(spec)

    fa, _ = run_pair(a, b, land_a, land_b, spec.cycles, edit, clamp=clamp)
    log(0, fa, a)
    for gen in range(1, spec.generations + 1):
        fa, _ = run_pair(a, b, land_a, land_b, spec.cycles, edit, clamp=clamp)
        child = _offspring(a, spec, mut)
        fc, _ = run_pair(child, b, land_a, land_b, spec.cycles, edit, clamp=clamp)
        if select((fa, a.n_editable), (fc, child.n_editable), mut).accepted:
            a, fa = child, fc

        fb, _ = run_pair(b, a, land_b, land_a, spec.cycles, edit, clamp=clamp)
        child = _offspring(b, spec, mut, plain=True)
        fc, _ = run_pair(child, a, land_b, land_a, spec.cycles, edit, clamp=clamp)
        if select((fb, b.n_editable), (fc, child.n_editable), mut).accepted:
            b = child
        log(gen, fa, a)
    return log.result()


def evaluate_two_cell(g: Genome, land_1, land_2, cycles: int, rng: RngStream, *, clamp: bool = False) -> float:
    """Mother takes one extra update, then both cells alternate; fitness is the cells' mean."""
    f1, f2 = run_pair(g, g, land_1, land_2, cycles, rng, pre_steps=1, clamp=clamp)
    return (f1 + f2) / 2


def coevolve_homog(spec: ExperimentSpec, land_1, land_2, rng: RngStream) -> RunResult:
    """Mother/daughter clone pair sharing one genome."""
    g = init_genome(spec.network_params(), rng.derive("genome"))
    mut = rng.derive("mutation")
    edit = rng.derive("editing")
    log = _SeriesLog(spec)
    fp = evaluate_two_cell(g, land_1, land_2, spec.cycles, edit, clamp=spec.clamp_coupled)
    log(0, fp, g)
    for gen in range(1, spec.generations + 1):
        child = _offspring(g, spec, mut)
        fc = evaluate_two_cell(child, land_1, land_2, spec.cycles, edit, clamp=spec.clamp_coupled)
        if select((fp, g.n_editable), (fc, child.n_editable), mut).accepted:
            g, fp = child, fc
        log(gen, fp, g)
    return log.result()
