"""Command line entry point: ``rbnedit run | figure | ttest | control``.

Exit statuses: 0 ok, 2 configuration or input error, 3 invariant violation
during a run, 4 incomplete data for a figure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from collections import defaultdict
from pathlib import Path

from . import charts
from .config import ConfigError, load_config
from .experiments import (FIGURES, CellFailure, Run, control_comparison, figure_dataset,
                          run_sweep, runs_from_records)
from .network import GenomeInvariantError
from .stats import NotComputable, welch_t_test

log = logging.getLogger("rbnedit")

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT, EXIT_INCOMPLETE = 0, 2, 3, 4
SEED_ENV = "RBNEDIT_SEED"

SUMMARY_HEADER = "mode,B,K,C,S,landscape,run,seed,final_fitness,final_pct_grna"
SERIES_HEADER = "mode,B,K,C,landscape,run,generation,fitness,pct_grna"
AGGREGATE_HEADER = "mode,B,K,C,stat,fitness,pct_grna"
CONTROL_HEADER = "mode,B,K,C,treatment_mean,control_mean,t,df,p,landscapes_match"


def _fit(x) -> str:
    return "NA" if x is None else f"{x:.9f}"


def _pct(x) -> str:
    return "NA" if x is None else f"{x:.6f}"


def _write_lines(path: Path, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_results(out: Path, sweep) -> None:
    out.mkdir(parents=True, exist_ok=True)
    summary, series = [], []
    for rec in sweep.records:
        mode, B, K, C = rec.spec.cell
        res = rec.result
        summary.append([mode, str(B), str(K), str(C), str(rec.spec.S_out), str(rec.landscape),
                        str(rec.run), str(rec.spec.seed), _fit(res.final_fitness), _pct(res.final_pct_grna)])
        for g, f, p in res.series:
            series.append([mode, str(B), str(K), str(C), str(rec.landscape), str(rec.run), str(g), _fit(f), _pct(p)])
    agg = []
    for (mode, B, K, C), st in sweep.aggregate.items():
        head = [mode, str(B), str(K), str(C)]
        agg.append(head + ["mean", _fit(st.fitness_mean), _pct(st.pct_mean)])
        agg.append(head + ["min", _fit(st.fitness_min), _pct(st.pct_min)])
        agg.append(head + ["max", _fit(st.fitness_max), _pct(st.pct_max)])
    _write_lines(out / "summary.csv", SUMMARY_HEADER, summary)
    _write_lines(out / "series.csv", SERIES_HEADER, series)
    _write_lines(out / "aggregate.csv", AGGREGATE_HEADER, agg)


def _resolve_seed(cli_seed):
    if cli_seed is not None:
        return cli_seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return None
    if not env.isdigit() or int(env) >= 2**64:
        raise ConfigError(f"{SEED_ENV} must be an unsigned 64-bit decimal, got {env!r}")
    return int(env)


def _load_grid(config, seed):
    grid = load_config(config)
    seed = _resolve_seed(seed)
    if seed is not None:
        grid = [s.with_(seed=seed) for s in grid]
    return grid


def cmd_run(config, out, seed=None, jobs=1) -> int:
    try:
        grid = _load_grid(config, seed)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    n = sum(s.landscapes * s.runs_per_landscape for s in grid)
    log.info("running %d cells x runs (%d total) with %d job(s)", len(grid), n, jobs)
    t0 = time.time()
    try:
        sweep = run_sweep(grid, jobs)
    except CellFailure as exc:
        if isinstance(exc.cause, GenomeInvariantError):
            print(f"error: invariant violation in cell {exc.cell_id}: {exc.cause}", file=sys.stderr)
            return EXIT_INVARIANT
        raise
    write_results(Path(out), sweep)
    log.info("done in %.1fs; wrote %s", time.time() - t0, out)
    return EXIT_OK


def cmd_control(config, out, seed=None, jobs=1) -> int:
    try:
        grid = _load_grid(config, seed)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rows = control_comparison([s.with_(scramble_control=False) for s in grid], jobs)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    _write_lines(Path(out), CONTROL_HEADER, (
        [r.mode, str(r.B), str(r.K), str(r.C), _fit(r.treatment_mean), _fit(r.control_mean),
         f"{r.t:.6f}", f"{r.df:.6f}", f"{r.p:.6f}", str(int(r.landscapes_match))] for r in rows))
    for r in rows:
        print(f"{r.mode} B={r.B} K={r.K} C={r.C}: treatment={r.treatment_mean:.6f} "
              f"control={r.control_mean:.6f} p={r.p:.6f}")
    return EXIT_OK


def read_runs(results_dir) -> list[Run]:
    d = Path(results_dir)
    series = defaultdict(list)
    if (d / "series.csv").exists():
        with open(d / "series.csv", newline="") as fh:
            for row in csv.DictReader(fh):
                key = (row["mode"], int(row["B"]), int(row["K"]), int(row["C"]), int(row["landscape"]), int(row["run"]))
                series[key].append((int(row["generation"]), float(row["fitness"]), float(row["pct_grna"])))
    runs = []
    with open(d / "summary.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["mode"], int(row["B"]), int(row["K"]), int(row["C"]), int(row["landscape"]), int(row["run"]))
            runs.append(Run(*key, float(row["final_fitness"]), float(row["final_pct_grna"]), series.get(key, [])))
    return runs


def _figure_svg(data) -> str:
    if data.figure == "fig8":
        first = data.rows[0][:5]
        rows = [r for r in data.rows if r[:5] == first]
        gens = [r[5] for r in rows]
        panel = charts.Panel(f"{data.figure}: B={first[0]} K={first[1]} C={first[2]} run {first[3]}/{first[4]}",
                             "generation", "fitness / %gRNA",
                             [charts.Series("fitness", gens, [r[6] for r in rows]),
                              charts.Series("%gRNA", gens, [r[7] for r in rows])])
        return charts.render([panel])
    by_k = defaultdict(list)
    for r in data.rows:
        by_k[r[1]].append(r)
    fit, pct = [], []
    for K, rows in sorted(by_k.items()):
        bs = [r[0] for r in rows]
        fit.append(charts.Series(f"K={K}", bs, [r[3] for r in rows], [r[4] for r in rows], [r[5] for r in rows]))
        pct.append(charts.Series(f"K={K}", bs, [r[6] for r in rows], [r[7] for r in rows], [r[8] for r in rows]))
    return charts.render([charts.Panel(f"{data.figure}: fitness", "B", "final fitness", fit),
                          charts.Panel(f"{data.figure}: %gRNA", "B", "final %gRNA", pct)],
                         title="error bars: min/max over runs; %gRNA is the final-generation value")


def cmd_figure(figure, results_dir, out) -> int:
    if figure not in FIGURES:
        print(f"error: unknown figure {figure!r}", file=sys.stderr)
        return EXIT_INPUT
    try:
        runs = read_runs(results_dir)
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: cannot read results from {results_dir}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    data = figure_dataset(figure, runs)
    if data.missing:
        print("error: incomplete grid; missing cells:", file=sys.stderr)
        for m in data.missing:
            print(f"  {m}", file=sys.stderr)
        return EXIT_INCOMPLETE
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = [[(_pct if col.startswith("pct") else _fit)(v) if isinstance(v, float) else str(v)
             for col, v in zip(data.columns, r)] for r in data.rows]
    _write_lines(out.with_suffix(".csv"), ",".join(data.columns), rows)
    out.with_suffix(".svg").write_text(_figure_svg(data))
    print(f"wrote {out.with_suffix('.csv')} ({len(rows)} rows) and {out.with_suffix('.svg')}")
    return EXIT_OK


def _read_column(path, column):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise KeyError(f"{path}: no column {column!r}")
        return [float(row[column]) for row in reader]


def cmd_ttest(file_a, file_b, column) -> int:
    try:
        a = _read_column(file_a, column)
        b = _read_column(file_b, column)
        t, df, p = welch_t_test(a, b)
    except (OSError, KeyError, ValueError, NotComputable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"t={t:.6f} df={df:.6f} p={p:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rbnedit", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment grid and write CSV results")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None, help=f"overrides config and ${SEED_ENV}")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("control", help="matched normal vs scrambled-reconnection comparison")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="CSV report path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("figure", help="build a figure dataset and SVG chart from results")
    p.add_argument("figure", choices=sorted(FIGURES))
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True, help="output path; .csv and .svg are written")

    p = sub.add_parser("ttest", help="Welch t-test on one column of two CSV files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--column", required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "run":
        return cmd_run(args.config, args.out, args.seed, args.jobs)
    if args.command == "control":
        return cmd_control(args.config, args.out, args.seed, args.jobs)
    if args.command == "figure":
        return cmd_figure(args.figure, args.results, args.out)
    return cmd_ttest(args.file_a, args.file_b, args.column)


if __name__ == "__main__":
    sys.exit(main())
