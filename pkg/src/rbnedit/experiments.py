"""Seeded sweeps, aggregation, scramble controls and figure datasets.

Stream layout under the root seed: landscape ``i`` draws from
``landscape/i`` and run ``j`` on it from ``run/i/j``. Neither depends on
mode, B or the scramble flag, so matched cells share landscapes and
initial genomes, and any single run can be recomputed on its own.
"""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import landscape as ls
from . import prng
from .evolution import coevolve_hetero, coevolve_homog, evolve_rbnk
from .records import CellStats, ExperimentSpec, RunResult
from .stats import NotComputable, welch_t_test

PRESETS = {
    "full": dict(R=100, generations=50_000, runs_per_landscape=10, landscapes=10),
    "desk": dict(R=50, generations=10_000, runs_per_landscape=10, landscapes=5),
}


def make_landscapes(spec: ExperimentSpec, index: int):
    """Landscapes for landscape slot ``index``; the first is shared by every mode with the same K."""
    rng = prng.root(spec.seed).derive(f"landscape/{index}")
    if spec.mode == "stationary":
        return [ls.generate_nk(spec.N, spec.K, rng)]
    if spec.mode == "nonstationary":
        return [ls.generate_nk(spec.N, spec.K, rng), ls.generate_nk(spec.N, spec.K, rng)]
    first = ls.generate_nkcs(spec.N, spec.K, spec.C, spec.S, rng)
    if spec.mode == "homog_same":
        return [first, first]
    return [first, ls.generate_nkcs(spec.N, spec.K, spec.C, spec.S, rng)]


def run_cell(spec: ExperimentSpec, landscape_index: int, run_index: int) -> RunResult:
    lands = make_landscapes(spec, landscape_index)
    rng = prng.root(spec.seed).derive(f"run/{landscape_index}/{run_index}")
    if spec.mode in ("stationary", "nonstationary"):
        return evolve_rbnk(spec, lands, rng)
    if spec.mode == "hetero_coevo":
        return coevolve_hetero(spec, lands[0], lands[1], rng)
    return coevolve_homog(spec, lands[0], lands[1], rng)


@dataclass
class RunRecord:
    spec: ExperimentSpec
    landscape: int
    run: int
    result: RunResult

    @property
    def sort_key(self):
        return self.spec.cell + (self.landscape, self.run)


@dataclass
class SweepResult:
    records: list[RunRecord]
    aggregate: dict[tuple, CellStats] = field(default_factory=dict)


class CellFailure(RuntimeError):
    def __init__(self, cell_id: str, cause: Exception):
        super().__init__(f"{cell_id}: {cause}")
        self.cell_id = cell_id
        self.cause = cause


def cell_id(spec: ExperimentSpec, i: int, j: int) -> str:
    mode, B, K, C = spec.cell
    return f"{mode}/B={B}/K={K}/C={C}/landscape={i}/run={j}"


def _task(args):
    spec, i, j = args
    try:
        return run_cell(spec, i, j)
    except Exception as exc:  # re-raised with the cell id attached
        raise CellFailure(cell_id(spec, i, j), exc) from exc


def run_sweep(grid: list[ExperimentSpec], parallelism: int = 1) -> SweepResult:
    """Run every (spec, landscape, run) cell; output is independent of ``parallelism``."""
    if not grid:
        raise ValueError("empty experiment grid")
    tasks = [(s, i, j) for s in grid for i in range(s.landscapes) for j in range(s.runs_per_landscape)]
    if parallelism > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * parallelism))))
    else:
        results = [_task(t) for t in tasks]
    records = sorted((RunRecord(s, i, j, r) for (s, i, j), r in zip(tasks, results)),
                     key=lambda rec: rec.sort_key)
    return SweepResult(records, aggregate(records))


def _stats(fits: list[float], pcts: list[float]) -> CellStats:
    n = len(fits)
    return CellStats(n, math.fsum(fits) / n, min(fits), max(fits),
                     math.fsum(pcts) / n, min(pcts), max(pcts))


def aggregate(records) -> dict[tuple, CellStats]:
    """Mean/min/max of final fitness and %gRNA per (mode, B, K, C) cell.

    ``fsum`` is exactly rounded, so the result does not depend on run order.
    """
    fits, pcts = defaultdict(list), defaultdict(list)
    for rec in records:
        fits[rec.spec.cell].append(rec.result.final_fitness)
        pcts[rec.spec.cell].append(rec.result.final_pct_grna)
    return {cell: _stats(fits[cell], pcts[cell]) for cell in sorted(fits)}


# -- scramble control ------------------------------------------------------

@dataclass(frozen=True)
class ControlRow:
    mode: str
    B: int
    K: int
    C: int
    treatment_mean: float
    control_mean: float
    t: float
    df: float
    p: float
    landscapes_match: bool


def control_comparison(specs, parallelism: int = 1) -> list[ControlRow]:
    """Matched normal vs. scrambled-reconnection cohorts, one row per cell."""
    if isinstance(specs, ExperimentSpec):
        specs = [specs]
    rows = []
    for spec in specs:
        treat = spec.with_(scramble_control=False)
        ctrl = spec.with_(scramble_control=True)
        same = all(
            [ls.digest(L) for L in make_landscapes(treat, i)] == [ls.digest(L) for L in make_landscapes(ctrl, i)]
            for i in range(spec.landscapes))
        sweep = run_sweep([treat, ctrl], parallelism)
        a = [r.result.final_fitness for r in sweep.records if not r.spec.scramble_control]
        b = [r.result.final_fitness for r in sweep.records if r.spec.scramble_control]
        try:
            t, df, p = welch_t_test(a, b)
        except NotComputable:
            t, df, p = math.nan, math.nan, math.nan
        mode, B, K, C = treat.cell
        rows.append(ControlRow(mode, B, K, C, math.fsum(a) / len(a), math.fsum(b) / len(b), t, df, p, same))
    return rows


# -- figure datasets -------------------------------------------------------

FIGURES = {
    "fig4": ("stationary", None),
    "fig5": ("nonstationary", None),
    "fig6": ("hetero_coevo", 1),
    "fig7": ("hetero_coevo", 5),
    "fig8": ("hetero_coevo", None),
    "fig9": ("homog_diff", 1),
}
FIGURE_B = range(1, 6)
FIGURE_K = range(0, 6)


@dataclass
class FigureData:
    figure: str
    columns: list[str]
    rows: list[list]
    missing: list[str]


@dataclass
class Run:
    """Flat view of one run, as held in memory or read back from CSV."""
    mode: str
    B: int
    K: int
    C: int
    landscape: int
    run: int
    final_fitness: float
    final_pct_grna: float
    series: list[tuple[int, float, float]] = field(default_factory=list)


def runs_from_records(records: list[RunRecord]) -> list[Run]:
    out = []
    for rec in records:
        mode, B, K, C = rec.spec.cell
        out.append(Run(mode, B, K, C, rec.landscape, rec.run, rec.result.final_fitness,
                       rec.result.final_pct_grna, list(rec.result.series)))
    return out


def figure_dataset(figure: str, runs: list[Run]) -> FigureData:
    """Per-(B, K) summary rows for fig4-7/9, single-run series rows for fig8.

    Missing grid cells yield a row of ``None`` values and an entry in ``missing``.
    """
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; expected one of {', '.join(FIGURES)}")
    mode, C = FIGURES[figure]
    if figure == "fig8":
        cols = ["B", "K", "C", "landscape", "run", "generation", "fitness", "pct_grna"]
        rows, missing = [], []
        picked = [r for r in runs if r.mode == mode]
        if not picked:
            missing.append(f"{mode}/any run")
        for r in sorted(picked, key=lambda r: (r.B, r.K, r.C, r.landscape, r.run)):
            if not r.series:
                missing.append(f"{mode}/B={r.B}/K={r.K}/C={r.C}/landscape={r.landscape}/run={r.run}/series")
            for g, f, p in r.series:
                rows.append([r.B, r.K, r.C, r.landscape, r.run, g, f, p])
        return FigureData(figure, cols, rows, missing)

    cols = ["B", "K", "n", "fitness_mean", "fitness_min", "fitness_max",
            "pct_grna_mean", "pct_grna_min", "pct_grna_max"]
    by_cell = defaultdict(list)
    for r in runs:
        if r.mode == mode and (C is None or r.C == C):
            by_cell[r.B, r.K].append(r)
    rows, missing = [], []
    for B in FIGURE_B:
        for K in FIGURE_K:
            cell = by_cell.get((B, K))
            if not cell:
                rows.append([B, K, 0] + [None] * 6)
                missing.append(f"{mode}/B={B}/K={K}" + (f"/C={C}" if C is not None else ""))
                continue
            st = _stats([r.final_fitness for r in cell], [r.final_pct_grna for r in cell])
            rows.append([B, K, st.n, st.fitness_mean, st.fitness_min, st.fitness_max,
                         st.pct_mean, st.pct_min, st.pct_max])
    return FigureData(figure, cols, rows, missing)
